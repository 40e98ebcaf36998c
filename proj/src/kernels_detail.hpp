#pragma once

#include <stdexcept>
#include <string>

#include "tgfuse/graph.hpp"
#include "tgfuse/mat.hpp"

namespace tgfuse::kernels::detail {

inline void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("kernels: ") + what);
}

inline void check_matmul(const Mat& a, const Mat& b) {
  require(a.cols() == b.rows(), "matmul shape mismatch");
}

inline void check_matmul_nt(const Mat& a, const Mat& b) {
  require(a.cols() == b.cols(), "matmul_nt shape mismatch");
}

inline void check_matmul_tn(const Mat& a, const Mat& b) {
  require(a.rows() == b.rows(), "matmul_tn shape mismatch");
}

inline void ensure_shape(Mat& m, int rows, int cols) {
  if (m.rows() != rows || m.cols() != cols) m = Mat::uninitialized(rows, cols);
}

inline void check_adjacency(const PairIndex& adj, std::size_t coeff_size, const Mat& x) {
  require(static_cast<std::int64_t>(coeff_size) == adj.num_pairs(), "coefficient count != pair count");
  require(x.rows() == adj.num_nodes, "node matrix rows != num_nodes");
}

}  // namespace tgfuse::kernels::detail
