#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "tgfuse/graph.hpp"
#include "tgfuse/mat.hpp"
#include "tgfuse/rng.hpp"
#include "tgfuse/tape.hpp"

namespace testutil {

using namespace tgfuse;

inline Mat random_mat(Rng& rng, int rows, int cols, double lo = -1.5, double hi = 1.5) {
  Mat m(rows, cols);
  for (std::int64_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

// Random symmetrized temporal multigraph spread over a few snapshots.
inline TemporalGraph random_graph(Rng& rng, std::int32_t num_nodes, int num_edges,
                                  int num_snaps = 3, bool symmetrize = true) {
  std::vector<std::vector<EdgeEvent>> per_snap(static_cast<std::size_t>(num_snaps));
  for (int e = 0; e < num_edges; ++e) {
    const int snap = static_cast<int>(rng.below(static_cast<std::uint64_t>(num_snaps)));
    const std::int32_t u = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(num_nodes)));
    std::int32_t v = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(num_nodes - 1)));
    if (v >= u) ++v;
    per_snap[static_cast<std::size_t>(snap)].push_back({u, v, snap + 0.999 * rng.uniform01()});
  }
  std::vector<Snapshot> snaps;
  for (int s = 0; s < num_snaps; ++s)
    snaps.push_back(Snapshot::build(std::move(per_snap[static_cast<std::size_t>(s)]), num_nodes, s));
  return TemporalGraph::fuse(snaps, static_cast<double>(num_snaps), symmetrize);
}

// Central finite differences of a scalar function against the analytic
// gradient, entry by entry. Returns the max relative error.
inline double fd_check(nn::Parameter& p, const Mat& analytic,
                       const std::function<double()>& loss, double eps = 1e-6) {
  double worst = 0.0;
  for (std::int64_t i = 0; i < p.value.size(); ++i) {
    const double keep = p.value.data()[i];
    p.value.data()[i] = keep + eps;
    const double up = loss();
    p.value.data()[i] = keep - eps;
    const double down = loss();
    p.value.data()[i] = keep;
    const double fd = (up - down) / (2.0 * eps);
    const double an = analytic.data()[i];
    worst = std::max(worst, std::abs(an - fd) / std::max({1.0, std::abs(an), std::abs(fd)}));
  }
  return worst;
}

inline double max_abs_diff(const Mat& a, const Mat& b) {
  double worst = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

}  // namespace testutil
