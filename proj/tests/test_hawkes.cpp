#include "doctest.h"
#include "helpers.hpp"
#include "tgfuse/hawkes.hpp"

#include <cmath>
#include <map>

using namespace tgfuse;
using testutil::random_graph;
using testutil::random_mat;

TEST_CASE("decay_weight basics") {
  CHECK(hawkes::decay_weight(0.0, 5.0, 1.0) == 1.0);
  CHECK(hawkes::decay_weight(3.7, 5.0, 5.0 - 1e-12) == doctest::Approx(1.0).epsilon(1e-9));
  // exp(-ln 2) checked against the hand value
  CHECK(hawkes::decay_weight(std::log(2.0), 3.0, 2.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(hawkes::decay_weight(1.0, 5.0, 5.0), std::invalid_argument);
  CHECK_THROWS_AS(hawkes::decay_weight(1.0, 5.0, 6.0), std::invalid_argument);
  CHECK_THROWS_AS(hawkes::decay_weight(-0.1, 5.0, 1.0), std::invalid_argument);
}

TEST_CASE("decay_weight flushes ancient events to zero without error") {
  CHECK(hawkes::decay_weight(10.0, 1e6, 0.0) == 0.0);
}

TEST_CASE("excitation matrix on single and parallel edges with delta zero") {
  std::vector<Snapshot> one{Snapshot::build({{0, 1, 0.5}}, 2, 0)};
  TemporalGraph g1 = TemporalGraph::fuse(one, 1.0, false);
  hawkes::ExcitationMatrix c1 = hawkes::excitation_matrix(g1, 0.0);
  REQUIRE(c1.value.size() == 1);
  CHECK(c1.value[0] == 1.0);

  std::vector<Snapshot> two{Snapshot::build({{0, 1, 0.2}, {0, 1, 0.8}}, 2, 0)};
  TemporalGraph g2 = TemporalGraph::fuse(two, 1.0, false);
  hawkes::ExcitationMatrix c2 = hawkes::excitation_matrix(g2, 0.0);
  REQUIRE(c2.value.size() == 1);
  CHECK(c2.value[0] == 2.0);
}

TEST_CASE("excitation matrix equals a dense double-loop oracle") {
  Rng rng(7);
  TemporalGraph g = random_graph(rng, 20, 150, 3);
  std::vector<double> delta(static_cast<std::size_t>(g.num_nodes()));
  for (double& d : delta) d = rng.uniform(0.0, 2.0);
  hawkes::ExcitationMatrix c = hawkes::excitation_matrix(g, delta);
  Mat dense = c.to_dense();

  std::vector<TemporalEdge> edges = g.edges();
  for (int i = 0; i < g.num_nodes(); ++i) {
    for (int j = 0; j < g.num_nodes(); ++j) {
      double want = 0.0;
      for (const TemporalEdge& e : edges) {
        if (e.src == i && e.dst == j)
          want += std::exp(-delta[static_cast<std::size_t>(i)] * (g.window_end() - e.tau));
      }
      CHECK(dense.at(i, j) == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("excitation delta-zero reduction, monotonicity and bound") {
  Rng rng(8);
  TemporalGraph g = random_graph(rng, 15, 120, 3);
  hawkes::ExcitationMatrix c0 = hawkes::excitation_matrix(g, 0.0);

  // multiplicity matrix
  std::map<std::pair<int, int>, int> mult;
  for (const TemporalEdge& e : g.edges()) mult[{e.src, e.dst}]++;
  for (std::size_t k = 0; k < c0.value.size(); ++k)
    CHECK(c0.value[k] == static_cast<double>(mult[{c0.src[k], c0.dst[k]}]));

  hawkes::ExcitationMatrix ca = hawkes::excitation_matrix(g, 0.3);
  hawkes::ExcitationMatrix cb = hawkes::excitation_matrix(g, 0.9);
  for (std::size_t k = 0; k < ca.value.size(); ++k) {
    CHECK(cb.value[k] <= ca.value[k]);          // monotone in delta
    CHECK(ca.value[k] <= c0.value[k]);          // bounded by multiplicity
    CHECK(ca.value[k] > 0.0);
  }
}

TEST_CASE("hawkes laplacian of a 2x2 excitation") {
  std::vector<Snapshot> snaps{Snapshot::build({{0, 1, 0.999999999}}, 2, 0)};
  TemporalGraph g = TemporalGraph::fuse(snaps, 1.0, true);
  hawkes::ExcitationMatrix c = hawkes::excitation_matrix(g, 0.0);
  Mat l = hawkes::hawkes_laplacian(c);
  CHECK(l.at(0, 0) == doctest::Approx(1.0));
  CHECK(l.at(0, 1) == doctest::Approx(-1.0));
  CHECK(l.at(1, 0) == doctest::Approx(-1.0));
  CHECK(l.at(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("laplacian row of an isolated node is zero and rows sum to zero") {
  std::vector<Snapshot> snaps{Snapshot::build({{0, 1, 0.5}}, 3, 0)};
  TemporalGraph g = TemporalGraph::fuse(snaps, 1.0, true);
  Mat l = hawkes::hawkes_laplacian(hawkes::excitation_matrix(g, 0.7));
  for (int j = 0; j < 3; ++j) {
    CHECK(l.at(2, j) == 0.0);
    CHECK(l.at(j, 2) == 0.0);
  }
  for (int i = 0; i < 3; ++i) {
    double row = 0.0;
    for (int j = 0; j < 3; ++j) row += l.at(i, j);
    CHECK(row == doctest::Approx(0.0).epsilon(1e-14));
  }
}

TEST_CASE("laplacian quadratic form is non-negative") {
  Rng rng(9);
  TemporalGraph g = random_graph(rng, 10, 60, 2);
  Mat l = hawkes::hawkes_laplacian(hawkes::excitation_matrix(g, 0.4));
  for (int trial = 0; trial < 100; ++trial) {
    Mat x = random_mat(rng, 10, 1);
    double q = 0.0;
    for (int i = 0; i < 10; ++i) {
      for (int j = 0; j < 10; ++j) q += x.at(i, 0) * l.at(i, j) * x.at(j, 0);
    }
    CHECK(q >= -1e-10);
  }
}

TEST_CASE("laplacian rejects asymmetric excitation") {
  // per-source deltas on a symmetrized graph break symmetry
  Rng rng(10);
  TemporalGraph g = random_graph(rng, 8, 40, 2);
  std::vector<double> delta(8);
  for (std::size_t i = 0; i < 8; ++i) delta[i] = 0.2 * static_cast<double>(i);
  hawkes::ExcitationMatrix c = hawkes::excitation_matrix(g, delta);
  CHECK_FALSE(c.is_symmetric());
  CHECK_THROWS_AS(hawkes::hawkes_laplacian(c), std::invalid_argument);
}

TEST_CASE("denoising objective") {
  Rng rng(11);
  TemporalGraph g = random_graph(rng, 6, 30, 2);
  Mat l = hawkes::hawkes_laplacian(hawkes::excitation_matrix(g, 0.5));

  SUBCASE("fidelity term vanishes when F equals S") {
    Mat s = random_mat(rng, 6, 3);
    double want = 0.0;
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        for (int c = 0; c < 3; ++c) want += s.at(i, c) * l.at(i, j) * s.at(j, c);
      }
    }
    const double got = hawkes::denoising_objective({s, s, l, 2.5});
    CHECK(got == doctest::Approx(2.5 * want).epsilon(1e-12));
  }

  SUBCASE("constant rows are annihilated by the regularizer") {
    Mat f = Mat::full(6, 3, 1.7);
    Mat s = Mat::zeros(6, 3);
    const double got = hawkes::denoising_objective({s, f, l, 100.0});
    CHECK(got == doctest::Approx(6 * 3 * 1.7 * 1.7).epsilon(1e-9));
  }

  SUBCASE("matches a naive summation oracle") {
    Mat s = random_mat(rng, 6, 3), f = random_mat(rng, 6, 3);
    double fid = 0.0;
    for (std::int64_t i = 0; i < s.size(); ++i) {
      const double d = f.data()[i] - s.data()[i];
      fid += d * d;
    }
    double smooth = 0.0;
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        for (int c = 0; c < 3; ++c) smooth += f.at(i, c) * l.at(i, j) * f.at(j, c);
      }
    }
    CHECK(hawkes::denoising_objective({s, f, l, 0.8}) ==
          doctest::Approx(fid + 0.8 * smooth).epsilon(1e-12));
  }

  SUBCASE("shape mismatch is rejected") {
    Mat s = random_mat(rng, 6, 3), f = random_mat(rng, 6, 4);
    CHECK_THROWS_AS(hawkes::denoising_objective({s, f, l, 1.0}), std::invalid_argument);
  }
}

TEST_CASE("pairwise decay sum trivia") {
  std::vector<Snapshot> snaps{Snapshot::build({{0, 1, 0.999999}}, 2, 0)};
  TemporalGraph g = TemporalGraph::fuse(snaps, 1.0, true);

  Mat same = Mat::full(2, 4, 0.3);
  CHECK(hawkes::pairwise_decay_sum(same, g, 1.3) == 0.0);

  Mat f = Mat::zeros(2, 1);
  f.at(0, 0) = 1.0;  // unit difference across the single edge
  CHECK(hawkes::pairwise_decay_sum(f, g, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("laplacian trace equals the decayed pairwise sum on random instances") {
  Rng rng(12);
  for (int inst = 0; inst < 30; ++inst) {
    TemporalGraph g = random_graph(rng, 2 + static_cast<int>(rng.below(28)),
                                   1 + static_cast<int>(rng.below(200)),
                                   1 + static_cast<int>(rng.below(4)));
    const double delta = rng.uniform(0.0, 2.0);
    Mat f = random_mat(rng, g.num_nodes(), 1 + static_cast<int>(rng.below(8)));
    Mat l = hawkes::hawkes_laplacian(hawkes::excitation_matrix(g, delta));
    double lhs = 0.0;
    for (int c = 0; c < f.cols(); ++c) {
      for (int i = 0; i < g.num_nodes(); ++i) {
        for (int j = 0; j < g.num_nodes(); ++j)
          lhs += f.at(i, c) * l.at(i, j) * f.at(j, c);
      }
    }
    const double rhs = hawkes::pairwise_decay_sum(f, g, delta);
    CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(lhs)));
  }
}
