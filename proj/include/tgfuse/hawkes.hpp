#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tgfuse/graph.hpp"
#include "tgfuse/mat.hpp"

namespace tgfuse::hawkes {

// exp(-delta * (t_prime - tau)). Rejects tau >= t_prime and delta < 0.
double decay_weight(double delta, double t_prime, double tau);

enum class DeltaMode { Scalar, PerSource };

// Sparse matrix of summed decay weights per ordered node pair. Zero pattern
// equals the binary adjacency; entries lie in (0, multiplicity].
struct ExcitationMatrix {
  std::int32_t num_nodes = 0;
  double t_prime = 0.0;
  DeltaMode mode = DeltaMode::Scalar;
  std::vector<std::int32_t> src;
  std::vector<std::int32_t> dst;
  std::vector<double> value;

  Mat to_dense() const;
  bool is_symmetric(double rel_tol = 1e-12) const;
};

ExcitationMatrix excitation_matrix(const TemporalGraph& g, double delta);
ExcitationMatrix excitation_matrix(const TemporalGraph& g,
                                   std::span<const double> delta_per_source);

// L = diag(row sums of C) - C, dense. Rejects asymmetric C.
Mat hawkes_laplacian(const ExcitationMatrix& c);

struct DenoisingProblem {
  const Mat& noisy;        // S
  const Mat& candidate;    // F
  const Mat& laplacian;    // L
  double lambda = 0.0;
};

// ||F - S||_F^2 + lambda * tr(F^T L F)
double denoising_objective(const DenoisingProblem& p);

// Sum over temporal edges of exp(-delta * (t' - tau)) * ||F_i - F_j||^2,
// counting each undirected pair once on a symmetrized edge set. Equals
// tr(F^T L F) for L built from the same graph and delta.
double pairwise_decay_sum(const Mat& f, const TemporalGraph& g, double delta);

}  // namespace tgfuse::hawkes
