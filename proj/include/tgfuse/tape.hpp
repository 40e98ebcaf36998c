#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tgfuse/graph.hpp"
#include "tgfuse/mat.hpp"
#include "tgfuse/rng.hpp"

namespace tgfuse::nn {

using NodeId = std::int32_t;

// Learnable dense matrix with an accumulated gradient.
struct Parameter {
  std::string name;
  Mat value;
  Mat grad;

  Parameter(std::string n, Mat v) : name(std::move(n)), value(std::move(v)) {
    grad = Mat::zeros(value.rows(), value.cols());
  }
  void zero_grad() { grad.fill(0.0); }
};

void glorot_uniform(Mat& m, Rng& rng);

// Recorded computation over dense matrices with reverse-mode gradients.
// A tape is single-threaded; the kernels it calls parallelize internally in
// a way that keeps results bit-identical across thread counts. Nodes created
// through segment/graph ops hold pointers into caller-owned PairIndex data,
// which must outlive the tape.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  NodeId constant(Mat v);
  // Registers a parameter leaf; repeated calls with the same parameter
  // return the same node. backward() accumulates into p.grad.
  NodeId param(Parameter& p);

  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId hadamard(NodeId a, NodeId b);
  NodeId scale(NodeId a, double s);
  // x (m x d) plus a 1 x d row broadcast over rows.
  NodeId add_bias(NodeId x, NodeId bias_row);
  NodeId concat_cols(NodeId a, NodeId b);
  NodeId gather_rows(NodeId x, std::vector<std::int64_t> idx);

  NodeId relu(NodeId x);
  NodeId leaky_relu(NodeId x, double slope = 0.2);
  NodeId sigmoid(NodeId x);
  NodeId exp_elem(NodeId x);
  NodeId log_elem(NodeId x);  // rejects non-positive entries
  NodeId softplus(NodeId x);

  // Inverted dropout: scales kept entries by 1/(1-p) during training.
  // Identity when training is false or p == 0.
  NodeId dropout(NodeId x, double p, Rng& rng, bool training);

  // Standardizes each column to zero mean / unit variance using the batch
  // statistics of x (population variance, epsilon 1e-5). The training flag is
  // accepted for interface symmetry; there is no running-statistics state, so
  // both modes normalize with the current batch.
  NodeId row_normalize_bn(NodeId x, bool training);

  // scores is (E x 1); offsets are strictly increasing segment boundaries
  // with offsets.front()==0 and offsets.back()==E. Empty segments rejected.
  NodeId segment_softmax(NodeId scores, std::vector<std::int64_t> offsets);

  // out[i] = sum over pairs e=(i,j) of coeff[e] * x[j]. coeff is (P x 1).
  NodeId coeff_spmm(NodeId coeff, NodeId x, const PairIndex& adj);

  // Per-pair decay coefficients; delta is per source node (n x 1) or per
  // pair (P x 1). inv_norm is a constant per-pair factor.
  NodeId node_decay(NodeId delta, const PairIndex& adj, double t_prime,
                    std::vector<double> inv_norm);
  NodeId edge_decay(NodeId delta_e, const PairIndex& adj, double t_prime,
                    std::vector<double> inv_norm);

  NodeId sum_all(NodeId x);  // 1 x 1

  // Mean binary cross entropy against {0,1} labels; predictions are clamped
  // to [1e-12, 1 - 1e-12]. Rejects empty input.
  NodeId bce_mean(NodeId preds, std::vector<double> labels);

  // Seeds d(loss)/d(loss)=1 and sweeps the tape in reverse, accumulating
  // gradients into every requires-grad node and parameter. loss must be 1x1.
  void backward(NodeId loss);

  const Mat& value(NodeId id) const { return nodes_[id].value; }
  // Gradient of the last backward() loss w.r.t. node id; zeros if the node
  // did not participate.
  const Mat& grad(NodeId id);

  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    Mat grad;  // lazily allocated during backward
    bool requires_grad = false;
    Parameter* sink = nullptr;
    std::function<void(Tape&, Node&)> back;
  };

  NodeId push(Mat value, bool requires_grad, std::function<void(Tape&, Node&)> back);
  Mat& grad_buf(NodeId id);
  NodeId unary(NodeId x, const char* what, double (*fwd)(double), double (*dfd)(double, double));

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, NodeId> param_ids_;
};

}  // namespace tgfuse::nn
