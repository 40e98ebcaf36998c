#include "doctest.h"
#include "helpers.hpp"
#include "tgfuse/datasets.hpp"
#include "tgfuse/errors.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>

using namespace tgfuse;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = "/tmp/tgfuse_test_" + name;
  std::ofstream os(path);
  os << content;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("parse_edge_list densifies ids in first-appearance order") {
  auto path = write_temp("small.txt", "10 20 5\n20 30 1\n30 10 3\n");
  data::RawEventLog log = data::parse_edge_list(path);
  CHECK(log.num_nodes == 3);
  CHECK(log.events.size() == 3);
  CHECK(log.original_ids == std::vector<std::int64_t>{10, 20, 30});
  // sorted by timestamp
  CHECK(log.events[0].tau == 1.0);
  CHECK(log.events[1].tau == 3.0);
  CHECK(log.events[2].tau == 5.0);
  // first event is 20 -> 30, i.e. dense 1 -> 2
  CHECK(log.events[0].src == 1);
  CHECK(log.events[0].dst == 2);
}

TEST_CASE("parse_edge_list handles csv, comments, weights and self-loops") {
  auto path = write_temp("forms.csv",
                         "# comment line\n"
                         "% another\n"
                         "1,2,0.5,100\n"
                         "2,2,0.9,50\n"       // self-loop dropped
                         "3,1,-1.0,25\n");
  data::RawEventLog log = data::parse_edge_list(path);
  CHECK(log.num_nodes == 3);
  REQUIRE(log.events.size() == 2);          // 4-column: weight ignored, time = col 3
  CHECK(log.events[0].tau == 25.0);
  CHECK(log.events[1].tau == 100.0);
}

TEST_CASE("parse_edge_list accepts dos line endings") {
  auto path = write_temp("crlf.txt", "1 2 5\r\n2 3 1\r\n");
  data::RawEventLog log = data::parse_edge_list(path);
  CHECK(log.events.size() == 2);
  CHECK(log.num_nodes == 3);
}

TEST_CASE("parse_edge_list errors carry the line number") {
  auto path = write_temp("bad.txt", "1 2 3\n1 two 3\n");
  try {
    data::parse_edge_list(path);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
  auto short_path = write_temp("short.txt", "1 2\n");
  CHECK_THROWS_AS(data::parse_edge_list(short_path), DataError);
  auto empty_path = write_temp("empty.txt", "# nothing\n");
  CHECK_THROWS_AS(data::parse_edge_list(empty_path), DataError);
  CHECK_THROWS_AS(data::parse_edge_list("/nonexistent/x.txt"), DataError);
}

TEST_CASE("equal-duration binning splits the span into equal bins") {
  data::RawEventLog log;
  log.num_nodes = 4;
  for (int i = 0; i < 100; ++i)
    log.events.push_back({static_cast<std::int32_t>(i % 4),
                          static_cast<std::int32_t>((i + 1) % 4), static_cast<double>(i)});
  auto snaps = data::bin_snapshots(log, 10, data::BinMode::EqualDuration, data::TimeMode::Rescaled);
  REQUIRE(snaps.size() == 10);
  std::int64_t total = 0;
  for (const Snapshot& s : snaps) total += s.num_edges();
  CHECK(total == 100);
  // t in [0, 99], width 9.9: bin k gets the ~10 events of its slice
  for (const Snapshot& s : snaps) CHECK(s.num_edges() >= 9);
  // rescaled taus live inside [index, index + 1)
  for (const Snapshot& s : snaps) {
    for (const EdgeEvent& e : s.edges()) {
      CHECK(e.tau >= s.index());
      CHECK(e.tau < s.index() + 1.0);
    }
  }
}

TEST_CASE("boundary ties go to the earlier bin") {
  data::RawEventLog log;
  log.num_nodes = 2;
  // span [0, 10], 5 bins of width 2; t = 2 sits exactly on the first boundary
  for (double t : {0.0, 2.0, 4.0, 6.0, 8.0, 10.0}) log.events.push_back({0, 1, t});
  auto snaps = data::bin_snapshots(log, 5, data::BinMode::EqualDuration, data::TimeMode::Index);
  CHECK(snaps[0].num_edges() == 2);  // t=0 and the tie at t=2
  CHECK(snaps[4].num_edges() == 1);  // right-closed last bin holds t=10
}

TEST_CASE("equal-count binning gives ceil(n/steps) per bin in time order") {
  data::RawEventLog log;
  log.num_nodes = 3;
  for (int i = 0; i < 10; ++i)
    log.events.push_back({0, 1, static_cast<double>(10 - i)});  // unsorted on purpose
  std::stable_sort(log.events.begin(), log.events.end(),
                   [](const EdgeEvent& a, const EdgeEvent& b) { return a.tau < b.tau; });
  auto snaps = data::bin_snapshots(log, 5, data::BinMode::EqualCount, data::TimeMode::Rescaled);
  REQUIRE(snaps.size() == 5);
  for (const Snapshot& s : snaps) CHECK(s.num_edges() == 2);
  // chronology across bins
  for (std::size_t k = 0; k + 1 < snaps.size(); ++k) {
    double max_k = -1e300, min_next = 1e300;
    for (const EdgeEvent& e : snaps[k].edges()) max_k = std::max(max_k, e.tau);
    for (const EdgeEvent& e : snaps[k + 1].edges()) min_next = std::min(min_next, e.tau);
    CHECK(max_k <= min_next);
  }
}

TEST_CASE("bin_snapshots rejects more steps than events") {
  data::RawEventLog log;
  log.num_nodes = 2;
  log.events = {{0, 1, 1.0}, {0, 1, 2.0}};
  CHECK_THROWS_AS(data::bin_snapshots(log, 3, data::BinMode::EqualDuration, data::TimeMode::Index),
                  std::invalid_argument);
  CHECK_THROWS_AS(data::bin_snapshots(log, 1, data::BinMode::EqualDuration, data::TimeMode::Index),
                  std::invalid_argument);
}

TEST_CASE("time_split partitions chronologically") {
  data::RawEventLog log;
  log.num_nodes = 2;
  for (int i = 0; i < 50; ++i) log.events.push_back({0, 1, static_cast<double>(i)});
  auto snaps = data::bin_snapshots(log, 50, data::BinMode::EqualCount, data::TimeMode::Index);
  auto view = data::time_split(snaps, {35, 5, 10});
  CHECK(view.train.size() == 35);
  CHECK(view.val.size() == 5);
  CHECK(view.test.size() == 10);
  CHECK(view.test.front().index() == 40);
  CHECK(view.test.back().index() == 49);
  // concatenation reproduces the input order
  std::vector<int> indices;
  for (const Snapshot& s : view.train) indices.push_back(s.index());
  for (const Snapshot& s : view.val) indices.push_back(s.index());
  for (const Snapshot& s : view.test) indices.push_back(s.index());
  for (int i = 0; i < 50; ++i) CHECK(indices[static_cast<std::size_t>(i)] == i);

  CHECK_THROWS_AS(data::time_split(snaps, {35, 5, 9}), std::invalid_argument);
  auto three = data::time_split(std::span(snaps.data(), 3), {1, 1, 1});
  CHECK(three.val.size() == 1);
}

TEST_CASE("pregenerated negatives: counts, determinism, uniformity") {
  std::vector<EdgeEvent> edges;
  for (int i = 0; i < 7; ++i) edges.push_back({0, 1, 0.5});
  std::vector<Snapshot> snaps{Snapshot::build(edges, 1000, 3)};
  data::EvalNegatives negs = data::pregenerate_eval_negatives(snaps, 1000, 100, 7);
  REQUIRE(negs.dst.size() == 1);
  CHECK(negs.dst[0].size() == 700);

  const std::string p1 = "/tmp/tgfuse_negs_a.bin", p2 = "/tmp/tgfuse_negs_b.bin";
  data::save_negatives(negs, p1);
  data::save_negatives(data::pregenerate_eval_negatives(snaps, 1000, 100, 7), p2);
  CHECK(slurp(p1) == slurp(p2));  // byte-identical under the same seed

  data::EvalNegatives loaded = data::load_negatives(p1);
  CHECK(loaded.k == 100);
  CHECK(loaded.seed == 7);
  CHECK(loaded.dst[0] == negs.dst[0]);

  // chi-square over a larger draw
  std::vector<EdgeEvent> many(2000, {0, 1, 0.5});
  std::vector<Snapshot> big{Snapshot::build(many, 1000, 9)};
  data::EvalNegatives wide = data::pregenerate_eval_negatives(big, 1000, 100, 11);
  std::vector<double> hist(1000, 0.0);
  for (std::int32_t d : wide.dst[0]) hist[static_cast<std::size_t>(d)] += 1.0;
  const double expected = 200000.0 / 1000.0;
  double chi2 = 0.0;
  for (double h : hist) chi2 += (h - expected) * (h - expected) / expected;
  CHECK(chi2 < 999.0 + 3.0 * std::sqrt(2.0 * 999.0));
}

TEST_CASE("snapshot cache round-trips") {
  Rng rng(5);
  std::vector<Snapshot> snaps;
  for (int s = 0; s < 4; ++s) {
    std::vector<EdgeEvent> edges;
    for (int e = 0; e < 20; ++e)
      edges.push_back({static_cast<std::int32_t>(rng.below(9)),
                       static_cast<std::int32_t>(rng.below(9)), s + rng.uniform01()});
    snaps.push_back(Snapshot::build(std::move(edges), 9, s));
  }
  const std::string path = "/tmp/tgfuse_snaps.bin";
  data::save_snapshots(snaps, 9, path);
  auto [loaded, n] = data::load_snapshots(path);
  CHECK(n == 9);
  REQUIRE(loaded.size() == 4);
  for (std::size_t s = 0; s < 4; ++s) {
    CHECK(loaded[s].index() == snaps[s].index());
    REQUIRE(loaded[s].num_edges() == snaps[s].num_edges());
    for (std::int64_t e = 0; e < loaded[s].num_edges(); ++e) {
      CHECK(loaded[s].edges()[e].src == snaps[s].edges()[e].src);
      CHECK(loaded[s].edges()[e].dst == snaps[s].edges()[e].dst);
      CHECK(loaded[s].edges()[e].tau == snaps[s].edges()[e].tau);
    }
  }
}

TEST_CASE("synthetic generator is deterministic and conserves events") {
  auto a = data::generate_synthetic_hawkes(100, 200, 0.5, 10, 3);
  auto b = data::generate_synthetic_hawkes(100, 200, 0.5, 10, 3);
  REQUIRE(a.size() == 10);
  for (std::size_t s = 0; s < a.size(); ++s) {
    REQUIRE(a[s].num_edges() == b[s].num_edges());
    for (std::int64_t e = 0; e < a[s].num_edges(); ++e) {
      CHECK(a[s].edges()[e].src == b[s].edges()[e].src);
      CHECK(a[s].edges()[e].dst == b[s].edges()[e].dst);
    }
    CHECK(a[s].num_edges() >= 200);  // at least the spontaneous part
  }
}

TEST_CASE("huge decay makes refires vanish") {
  auto snaps = data::generate_synthetic_hawkes(150, 300, 50.0, 8, 5);
  // expected refires with delta=50 are ~exp(-50) per past event: none fire
  for (const Snapshot& s : snaps) CHECK(s.num_edges() == 300);
}

namespace {

// Excess (excitation-only) refire rate by age over pairs with exactly one
// past fire: each attempt's known spontaneous probability is subtracted, so
// the remainder is the pure kSyntheticExcitation * exp(-delta * age) hazard.
struct RateCurve {
  std::vector<double> attempts, fires, floor;
};

RateCurve excess_rates(const std::vector<Snapshot>& snaps, std::int32_t n, int base_pairs) {
  const std::int32_t core = data::synthetic_core_size(n);
  auto endpoint_prob = [&](std::int32_t v) {
    double p = (1.0 - data::kSyntheticCoreMass) / n;
    if (v < core) p += data::kSyntheticCoreMass / core;
    return p;
  };
  RateCurve curve;
  curve.attempts.assign(snaps.size(), 0.0);
  curve.fires.assign(snaps.size(), 0.0);
  curve.floor.assign(snaps.size(), 0.0);
  std::map<std::pair<int, int>, std::vector<int>> history;
  for (const Snapshot& s : snaps) {
    std::set<std::pair<int, int>> fired_now;
    for (const EdgeEvent& e : s.edges()) fired_now.insert({e.src, e.dst});
    for (const auto& [pair, times] : history) {
      if (times.size() != 1) continue;
      const std::size_t age = static_cast<std::size_t>(s.index() - times[0]);
      curve.attempts[age] += 1.0;
      curve.floor[age] += base_pairs * endpoint_prob(pair.first) * endpoint_prob(pair.second);
      if (fired_now.count(pair) != 0) curve.fires[age] += 1.0;
    }
    for (const auto& pr : fired_now) history[pr].push_back(s.index());
  }
  return curve;
}

}  // namespace

TEST_CASE("zero decay keeps refire rates age-independent") {
  auto snaps = data::generate_synthetic_hawkes(300, 150, 0.0, 22, 13);
  RateCurve c = excess_rates(snaps, 300, 150);
  // with delta = 0 the hazard never decays: early and late excess rates match
  const double early = (c.fires[1] - c.floor[1]) / c.attempts[1];
  double late_f = 0.0, late_a = 0.0;
  for (std::size_t age = 4; age <= 8; ++age) {
    late_f += c.fires[age] - c.floor[age];
    late_a += c.attempts[age];
  }
  const double late = late_f / late_a;
  CHECK(early == doctest::Approx(data::kSyntheticExcitation).epsilon(0.25));
  CHECK(late == doctest::Approx(data::kSyntheticExcitation).epsilon(0.25));
}

TEST_CASE("refire rate decays as exp(-delta * age) with good fit") {
  const double delta = 0.5;
  auto snaps = data::generate_synthetic_hawkes(400, 2000, delta, 20, 7);
  RateCurve c = excess_rates(snaps, 400, 2000);
  std::vector<double> xs, ys;
  for (std::size_t age = 1; age <= 5; ++age) {
    REQUIRE(c.attempts[age] > 500);
    const double rate = (c.fires[age] - c.floor[age]) / c.attempts[age];
    REQUIRE(rate > 0.0);
    xs.push_back(static_cast<double>(age));
    ys.push_back(std::log(rate));
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double r2 = (sxy * sxy) / (sxx * syy);
  CHECK(r2 > 0.9);
  CHECK(slope == doctest::Approx(-delta).epsilon(0.2));
}

// Exercised only when the raw UCI message file is available (set
// TGFUSE_UCI_PATH or place it at data/uci.txt); reproduces the published
// node/event counts, the 35/5/10 step split and window fusion recounts.
TEST_CASE("uci ingestion matches the published statistics when present") {
  std::string path;
  if (const char* env = std::getenv("TGFUSE_UCI_PATH"); env != nullptr && *env != '\0')
    path = env;
  else if (std::ifstream("data/uci.txt").good())
    path = "data/uci.txt";
  if (path.empty()) {
    MESSAGE("uci raw file not present; skipping");
    return;
  }
  data::RawEventLog log = data::parse_edge_list(path);
  CHECK(log.num_nodes == 1899);
  CHECK(log.events.size() == 59835);

  auto snaps = data::bin_snapshots(log, 50, data::BinMode::EqualDuration,
                                   data::TimeMode::Rescaled);
  auto view = data::time_split(snaps, {35, 5, 10});
  CHECK(view.train.size() == 35);
  CHECK(view.test.size() == 10);

  // fused edge count over a window equals the per-snapshot sum, recounted
  std::int64_t want = 0;
  for (int k = 10; k < 19; ++k) want += snaps[static_cast<std::size_t>(k)].num_edges();
  TemporalGraph fused = TemporalGraph::fuse(std::span(snaps.data() + 10, 9), 19.0, false);
  CHECK(fused.num_edges() == want);
  TemporalGraph fused_sym = TemporalGraph::fuse(std::span(snaps.data() + 10, 9), 19.0, true);
  CHECK(fused_sym.num_edges() == 2 * want);
}
