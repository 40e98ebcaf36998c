#include <cmath>

#include "kernels_detail.hpp"
#include "tgfuse/kernels.hpp"

// OpenMP variants. Work is split across output rows (or pairs / segments);
// each row is accumulated sequentially in the same order as the serial
// reference, so results do not depend on the thread count.

namespace tgfuse::kernels {

using detail::check_adjacency;
using detail::ensure_shape;
using detail::require;

void matmul(const Mat& a, const Mat& b, Mat& out) {
  detail::check_matmul(a, b);
  const int m = a.rows(), k = a.cols(), n = b.cols();
  ensure_shape(out, m, n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    double* out_i = out.row(i);
    for (int j = 0; j < n; ++j) out_i[j] = 0.0;
    const double* a_i = a.row(i);
    for (int kk = 0; kk < k; ++kk) {
      const double aik = a_i[kk];
      const double* b_k = b.row(kk);
      for (int j = 0; j < n; ++j) out_i[j] += aik * b_k[j];
    }
  }
}

void matmul_nt(const Mat& a, const Mat& b, Mat& out) {
  detail::check_matmul_nt(a, b);
  const int m = a.rows(), k = a.cols(), n = b.rows();
  ensure_shape(out, m, n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    const double* a_i = a.row(i);
    double* out_i = out.row(i);
    for (int j = 0; j < n; ++j) {
      const double* b_j = b.row(j);
      double s = 0.0;
      for (int kk = 0; kk < k; ++kk) s += a_i[kk] * b_j[kk];
      out_i[j] = s;
    }
  }
}

void matmul_tn(const Mat& a, const Mat& b, Mat& out) {
  detail::check_matmul_tn(a, b);
  const int m = a.rows(), k = a.cols(), n = b.cols();
  ensure_shape(out, k, n);
#pragma omp parallel for schedule(static)
  for (int kk = 0; kk < k; ++kk) {
    double* out_k = out.row(kk);
    for (int j = 0; j < n; ++j) out_k[j] = 0.0;
    for (int i = 0; i < m; ++i) {
      const double aik = a.at(i, kk);
      const double* b_i = b.row(i);
      for (int j = 0; j < n; ++j) out_k[j] += aik * b_i[j];
    }
  }
}

void coeff_gather(const PairIndex& adj, std::span<const double> coeff, const Mat& x,
                  Mat& out) {
  check_adjacency(adj, coeff.size(), x);
  const int n = adj.num_nodes, d = x.cols();
  ensure_shape(out, n, d);
#pragma omp parallel for schedule(dynamic, 64)
  for (int i = 0; i < n; ++i) {
    double* out_i = out.row(i);
    for (int c = 0; c < d; ++c) out_i[c] = 0.0;
    for (std::int64_t e = adj.row_ptr[i]; e < adj.row_ptr[i + 1]; ++e) {
      const double w = coeff[e];
      const double* x_j = x.row(adj.pair_dst[e]);
      for (int c = 0; c < d; ++c) out_i[c] += w * x_j[c];
    }
  }
}

void coeff_gather_transpose(const PairIndex& adj, std::span<const double> coeff,
                            const Mat& g, Mat& acc) {
  check_adjacency(adj, coeff.size(), g);
  require(acc.rows() == adj.num_nodes && acc.cols() == g.cols(),
          "transpose accumulator shape mismatch");
  const int n = adj.num_nodes, d = g.cols();
#pragma omp parallel for schedule(dynamic, 64)
  for (int j = 0; j < n; ++j) {
    double* acc_j = acc.row(j);
    for (std::int64_t t = adj.t_row_ptr[j]; t < adj.t_row_ptr[j + 1]; ++t) {
      const std::int64_t e = adj.t_pair[t];
      const double w = coeff[e];
      const double* g_i = g.row(adj.pair_src[e]);
      for (int c = 0; c < d; ++c) acc_j[c] += w * g_i[c];
    }
  }
}

void coeff_grad(const PairIndex& adj, const Mat& g, const Mat& x,
                std::span<double> g_coeff) {
  check_adjacency(adj, g_coeff.size(), x);
  const std::int64_t pairs = adj.num_pairs();
  const int d = x.cols();
#pragma omp parallel for schedule(static)
  for (std::int64_t e = 0; e < pairs; ++e) {
    const double* g_i = g.row(adj.pair_src[e]);
    const double* x_j = x.row(adj.pair_dst[e]);
    double s = 0.0;
    for (int c = 0; c < d; ++c) s += g_i[c] * x_j[c];
    g_coeff[e] = s;
  }
}

void node_decay(const PairIndex& adj, std::span<const double> delta, double t_prime,
                std::span<const double> inv_norm, std::span<double> out) {
  require(static_cast<std::int32_t>(delta.size()) == adj.num_nodes, "delta size != num_nodes");
  require(static_cast<std::int64_t>(out.size()) == adj.num_pairs(), "output size != pair count");
  const int n = adj.num_nodes;
#pragma omp parallel for schedule(dynamic, 64)
  for (int i = 0; i < n; ++i) {
    const double di = delta[i];
    for (std::int64_t e = adj.row_ptr[i]; e < adj.row_ptr[i + 1]; ++e) {
      double s = 0.0;
      for (std::int64_t ev = adj.event_ptr[e]; ev < adj.event_ptr[e + 1]; ++ev)
        s += std::exp(-di * (t_prime - adj.event_tau[ev]));
      out[e] = inv_norm[e] * s;
    }
  }
}

void node_decay_grad(const PairIndex& adj, std::span<const double> delta, double t_prime,
                     std::span<const double> inv_norm, std::span<const double> g_c,
                     std::span<double> acc_delta) {
  const int n = adj.num_nodes;
#pragma omp parallel for schedule(dynamic, 64)
  for (int i = 0; i < n; ++i) {
    const double di = delta[i];
    double acc = 0.0;
    for (std::int64_t e = adj.row_ptr[i]; e < adj.row_ptr[i + 1]; ++e) {
      double s = 0.0;
      for (std::int64_t ev = adj.event_ptr[e]; ev < adj.event_ptr[e + 1]; ++ev) {
        const double age = t_prime - adj.event_tau[ev];
        s -= age * std::exp(-di * age);
      }
      acc += g_c[e] * inv_norm[e] * s;
    }
    acc_delta[i] += acc;
  }
}

void edge_decay(const PairIndex& adj, std::span<const double> delta_e, double t_prime,
                std::span<const double> inv_norm, std::span<double> out) {
  require(static_cast<std::int64_t>(delta_e.size()) == adj.num_pairs(), "delta size != pair count");
  const std::int64_t pairs = adj.num_pairs();
#pragma omp parallel for schedule(static)
  for (std::int64_t e = 0; e < pairs; ++e) {
    const double de = delta_e[e];
    double s = 0.0;
    for (std::int64_t ev = adj.event_ptr[e]; ev < adj.event_ptr[e + 1]; ++ev)
      s += std::exp(-de * (t_prime - adj.event_tau[ev]));
    out[e] = inv_norm[e] * s;
  }
}

void edge_decay_grad(const PairIndex& adj, std::span<const double> delta_e, double t_prime,
                     std::span<const double> inv_norm, std::span<const double> g_c,
                     std::span<double> acc_delta_e) {
  const std::int64_t pairs = adj.num_pairs();
#pragma omp parallel for schedule(static)
  for (std::int64_t e = 0; e < pairs; ++e) {
    const double de = delta_e[e];
    double s = 0.0;
    for (std::int64_t ev = adj.event_ptr[e]; ev < adj.event_ptr[e + 1]; ++ev) {
      const double age = t_prime - adj.event_tau[ev];
      s -= age * std::exp(-de * age);
    }
    acc_delta_e[e] += g_c[e] * inv_norm[e] * s;
  }
}

void segment_softmax(std::span<const double> scores, std::span<const std::int64_t> offsets,
                     std::span<double> out) {
  require(!offsets.empty() && offsets.front() == 0 &&
              offsets.back() == static_cast<std::int64_t>(scores.size()),
          "segment offsets must span the scores");
  const std::int64_t segs = static_cast<std::int64_t>(offsets.size()) - 1;
  for (std::int64_t s = 0; s < segs; ++s)
    require(offsets[s] < offsets[s + 1], "empty softmax segment");
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t s = 0; s < segs; ++s) {
    const std::int64_t lo = offsets[s], hi = offsets[s + 1];
    double mx = scores[lo];
    for (std::int64_t i = lo + 1; i < hi; ++i) mx = std::max(mx, scores[i]);
    double sum = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) {
      out[i] = std::exp(scores[i] - mx);
      sum += out[i];
    }
    for (std::int64_t i = lo; i < hi; ++i) out[i] /= sum;
  }
}

void segment_softmax_grad(std::span<const double> softmax_out, std::span<const double> g_out,
                          std::span<const std::int64_t> offsets, std::span<double> acc_scores) {
  const std::int64_t segs = static_cast<std::int64_t>(offsets.size()) - 1;
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t s = 0; s < segs; ++s) {
    const std::int64_t lo = offsets[s], hi = offsets[s + 1];
    double dot = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) dot += g_out[i] * softmax_out[i];
    for (std::int64_t i = lo; i < hi; ++i)
      acc_scores[i] += softmax_out[i] * (g_out[i] - dot);
  }
}

}  // namespace tgfuse::kernels
