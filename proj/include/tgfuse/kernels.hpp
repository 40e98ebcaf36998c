#pragma once

#include <cstdint>
#include <span>

#include "tgfuse/graph.hpp"
#include "tgfuse/mat.hpp"

namespace tgfuse::kernels {

// Hot inner loops, parallelized with OpenMP over output rows / pairs.
// Each output row is accumulated sequentially by one thread, so results are
// bit-identical to the serial reference regardless of thread count.
// kernels::serial holds the plain-loop reference used by tests and by the
// bench command's side-by-side comparison.

// out = a * b
void matmul(const Mat& a, const Mat& b, Mat& out);
// out = a * b^T
void matmul_nt(const Mat& a, const Mat& b, Mat& out);
// out = a^T * b
void matmul_tn(const Mat& a, const Mat& b, Mat& out);

// out[i] = sum over pairs e=(i,j) of coeff[e] * x[j]; rows without pairs
// become zero.
void coeff_gather(const PairIndex& adj, std::span<const double> coeff, const Mat& x,
                  Mat& out);
// acc[j] += sum over pairs e=(i,j) of coeff[e] * g[i]  (transpose product)
void coeff_gather_transpose(const PairIndex& adj, std::span<const double> coeff,
                            const Mat& g, Mat& acc);
// g_coeff[e] = dot(g[src(e)], x[dst(e)])
void coeff_grad(const PairIndex& adj, const Mat& g, const Mat& x,
                std::span<double> g_coeff);

// Per-pair Hawkes coefficient with a per-source decay rate:
//   c[e] = inv_norm[e] * sum over events tau of exp(-delta[src(e)] * (t_prime - tau))
void node_decay(const PairIndex& adj, std::span<const double> delta, double t_prime,
                std::span<const double> inv_norm, std::span<double> out);
// acc_delta[i] += sum over pairs e in row i of
//   g_c[e] * inv_norm[e] * sum_tau -(t_prime - tau) * exp(-delta[i] * (t_prime - tau))
void node_decay_grad(const PairIndex& adj, std::span<const double> delta, double t_prime,
                     std::span<const double> inv_norm, std::span<const double> g_c,
                     std::span<double> acc_delta);

// Same with an independent decay rate per pair.
void edge_decay(const PairIndex& adj, std::span<const double> delta_e, double t_prime,
                std::span<const double> inv_norm, std::span<double> out);
void edge_decay_grad(const PairIndex& adj, std::span<const double> delta_e, double t_prime,
                     std::span<const double> inv_norm, std::span<const double> g_c,
                     std::span<double> acc_delta_e);

// Softmax within [offsets[s], offsets[s+1]) spans of scores. Offsets must be
// strictly increasing (no empty segments).
void segment_softmax(std::span<const double> scores, std::span<const std::int64_t> offsets,
                     std::span<double> out);
// g_scores[i] = y_i * (g_i - sum_j g_j y_j) per segment, accumulated.
void segment_softmax_grad(std::span<const double> softmax_out, std::span<const double> g_out,
                          std::span<const std::int64_t> offsets, std::span<double> acc_scores);

namespace serial {
void matmul(const Mat& a, const Mat& b, Mat& out);
void matmul_nt(const Mat& a, const Mat& b, Mat& out);
void matmul_tn(const Mat& a, const Mat& b, Mat& out);
void coeff_gather(const PairIndex& adj, std::span<const double> coeff, const Mat& x,
                  Mat& out);
void coeff_gather_transpose(const PairIndex& adj, std::span<const double> coeff,
                            const Mat& g, Mat& acc);
void coeff_grad(const PairIndex& adj, const Mat& g, const Mat& x,
                std::span<double> g_coeff);
void node_decay(const PairIndex& adj, std::span<const double> delta, double t_prime,
                std::span<const double> inv_norm, std::span<double> out);
void node_decay_grad(const PairIndex& adj, std::span<const double> delta, double t_prime,
                     std::span<const double> inv_norm, std::span<const double> g_c,
                     std::span<double> acc_delta);
void edge_decay(const PairIndex& adj, std::span<const double> delta_e, double t_prime,
                std::span<const double> inv_norm, std::span<double> out);
void edge_decay_grad(const PairIndex& adj, std::span<const double> delta_e, double t_prime,
                     std::span<const double> inv_norm, std::span<const double> g_c,
                     std::span<double> acc_delta_e);
void segment_softmax(std::span<const double> scores, std::span<const std::int64_t> offsets,
                     std::span<double> out);
void segment_softmax_grad(std::span<const double> softmax_out, std::span<const double> g_out,
                          std::span<const std::int64_t> offsets, std::span<double> acc_scores);
}  // namespace serial

}  // namespace tgfuse::kernels
