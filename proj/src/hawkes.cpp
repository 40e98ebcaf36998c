#include "tgfuse/hawkes.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

namespace tgfuse::hawkes {

double decay_weight(double delta, double t_prime, double tau) {
  if (delta < 0.0) throw std::invalid_argument("decay_weight: delta must be non-negative");
  if (tau >= t_prime)
    throw std::invalid_argument("decay_weight: tau must precede t_prime");
  // exp underflow for very old events flushes to 0, which is the correct limit
  return std::exp(-delta * (t_prime - tau));
}

namespace {

ExcitationMatrix build(const TemporalGraph& g, std::span<const double> delta,
                       bool per_source) {
  for (double d : delta) {
    if (d < 0.0) throw std::invalid_argument("excitation_matrix: delta must be non-negative");
  }
  const PairIndex& adj = g.pairs();
  ExcitationMatrix c;
  c.num_nodes = g.num_nodes();
  c.t_prime = g.window_end();
  c.mode = per_source ? DeltaMode::PerSource : DeltaMode::Scalar;
  c.src.reserve(static_cast<std::size_t>(adj.num_pairs()));
  c.dst.reserve(static_cast<std::size_t>(adj.num_pairs()));
  c.value.reserve(static_cast<std::size_t>(adj.num_pairs()));
  for (std::int64_t p = 0; p < adj.num_pairs(); ++p) {
    const double d = per_source ? delta[adj.pair_src[p]] : delta[0];
    double sum = 0.0;
    for (std::int64_t ev = adj.event_ptr[p]; ev < adj.event_ptr[p + 1]; ++ev)
      sum += std::exp(-d * (c.t_prime - adj.event_tau[ev]));
    c.src.push_back(adj.pair_src[p]);
    c.dst.push_back(adj.pair_dst[p]);
    c.value.push_back(sum);
  }
  return c;
}

}  // namespace

ExcitationMatrix excitation_matrix(const TemporalGraph& g, double delta) {
  const double d[1] = {delta};
  return build(g, d, false);
}

ExcitationMatrix excitation_matrix(const TemporalGraph& g,
                                   std::span<const double> delta_per_source) {
  if (static_cast<std::int32_t>(delta_per_source.size()) != g.num_nodes())
    throw std::invalid_argument("excitation_matrix: need one delta per node");
  return build(g, delta_per_source, true);
}

Mat ExcitationMatrix::to_dense() const {
  Mat m(num_nodes, num_nodes);
  for (std::size_t e = 0; e < value.size(); ++e) m.at(src[e], dst[e]) += value[e];
  return m;
}

bool ExcitationMatrix::is_symmetric(double rel_tol) const {
  std::map<std::pair<std::int32_t, std::int32_t>, double> entry;
  for (std::size_t e = 0; e < value.size(); ++e) entry[{src[e], dst[e]}] += value[e];
  for (const auto& [key, v] : entry) {
    if (key.first >= key.second) continue;
    auto mirror = entry.find({key.second, key.first});
    const double w = mirror == entry.end() ? 0.0 : mirror->second;
    if (std::abs(v - w) > rel_tol * std::max({1.0, std::abs(v), std::abs(w)})) return false;
  }
  return true;
}

Mat hawkes_laplacian(const ExcitationMatrix& c) {
  Mat dense = c.to_dense();
  const int n = dense.rows();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double a = dense.at(i, j), b = dense.at(j, i);
      if (std::abs(a - b) > 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}))
        throw std::invalid_argument("hawkes_laplacian: excitation matrix is not symmetric");
    }
  }
  Mat l(n, n);
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) row_sum += dense.at(i, j);
    for (int j = 0; j < n; ++j) l.at(i, j) = -dense.at(i, j);
    l.at(i, i) += row_sum;
  }
  return l;
}

double denoising_objective(const DenoisingProblem& p) {
  const Mat& s = p.noisy;
  const Mat& f = p.candidate;
  const Mat& l = p.laplacian;
  if (f.rows() != s.rows() || f.cols() != s.cols())
    throw std::invalid_argument("denoising_objective: F and S shapes differ");
  if (l.rows() != f.rows() || l.cols() != f.rows())
    throw std::invalid_argument("denoising_objective: Laplacian shape mismatch");

  double fidelity = 0.0;
  for (std::int64_t i = 0; i < f.size(); ++i) {
    const double d = f.data()[i] - s.data()[i];
    fidelity += d * d;
  }

  // tr(F^T L F) = sum_c (F_col_c)^T L F_col_c
  double smooth = 0.0;
  const int n = f.rows(), d = f.cols();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double lij = l.at(i, j);
      if (lij == 0.0) continue;
      for (int c = 0; c < d; ++c) smooth += f.at(i, c) * lij * f.at(j, c);
    }
  }
  return fidelity + p.lambda * smooth;
}

double pairwise_decay_sum(const Mat& f, const TemporalGraph& g, double delta) {
  if (f.rows() != g.num_nodes())
    throw std::invalid_argument("pairwise_decay_sum: F rows != num_nodes");
  if (delta < 0.0) throw std::invalid_argument("pairwise_decay_sum: delta must be non-negative");
  const PairIndex& adj = g.pairs();
  const double t_prime = g.window_end();
  const int d = f.cols();
  double total = 0.0;
  // src < dst visits each undirected pair of the symmetrized edge set once;
  // self-pairs contribute nothing since F_i - F_i = 0.
  for (std::int64_t p = 0; p < adj.num_pairs(); ++p) {
    if (adj.pair_src[p] >= adj.pair_dst[p]) continue;
    const double* fi = f.row(adj.pair_src[p]);
    const double* fj = f.row(adj.pair_dst[p]);
    double sq = 0.0;
    for (int c = 0; c < d; ++c) {
      const double diff = fi[c] - fj[c];
      sq += diff * diff;
    }
    for (std::int64_t ev = adj.event_ptr[p]; ev < adj.event_ptr[p + 1]; ++ev)
      total += std::exp(-delta * (t_prime - adj.event_tau[ev])) * sq;
  }
  return total;
}

}  // namespace tgfuse::hawkes
