#include "tgfuse/tape.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>

#include "tgfuse/kernels.hpp"

namespace tgfuse::nn {

namespace {

void check(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("tape: ") + what);
}

void add_into(Mat& dst, const Mat& src) {
  const std::int64_t n = dst.size();
  double* d = dst.data();
  const double* s = src.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) d[i] += s[i];
}

void axpy_into(Mat& dst, const Mat& src, double alpha) {
  const std::int64_t n = dst.size();
  double* d = dst.data();
  const double* s = src.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) d[i] += alpha * s[i];
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

}  // namespace

void glorot_uniform(Mat& m, Rng& rng) {
  const double limit = std::sqrt(6.0 / (m.rows() + m.cols()));
  for (std::int64_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-limit, limit);
}

NodeId Tape::push(Mat value, bool requires_grad, std::function<void(Tape&, Node&)> back) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size()) - 1;
}

Mat& Tape::grad_buf(NodeId id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Mat::zeros(n.value.rows(), n.value.cols());
  return n.grad;
}

const Mat& Tape::grad(NodeId id) { return grad_buf(id); }

NodeId Tape::constant(Mat v) { return push(std::move(v), false, nullptr); }

NodeId Tape::param(Parameter& p) {
  auto it = param_ids_.find(&p);
  if (it != param_ids_.end()) return it->second;
  NodeId id = push(p.value, true, nullptr);
  nodes_[id].sink = &p;
  param_ids_.emplace(&p, id);
  return id;
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  const Mat& av = value(a);
  const Mat& bv = value(b);
  Mat out;
  kernels::matmul(av, bv, out);
  const bool rg = nodes_[a].requires_grad || nodes_[b].requires_grad;
  return push(std::move(out), rg, !rg ? std::function<void(Tape&, Node&)>() : [a, b](Tape& t, Node& self) {
    if (t.nodes_[a].requires_grad) {
      Mat tmp;
      kernels::matmul_nt(self.grad, t.value(b), tmp);
      add_into(t.grad_buf(a), tmp);
    }
    if (t.nodes_[b].requires_grad) {
      Mat tmp;
      kernels::matmul_tn(t.value(a), self.grad, tmp);
      add_into(t.grad_buf(b), tmp);
    }
  });
}

NodeId Tape::add(NodeId a, NodeId b) {
  const Mat& av = value(a);
  const Mat& bv = value(b);
  check(av.rows() == bv.rows() && av.cols() == bv.cols(), "add shape mismatch");
  Mat out = Mat::uninitialized(av.rows(), av.cols());
  const std::int64_t n = out.size();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out.data()[i] = av.data()[i] + bv.data()[i];
  const bool rg = nodes_[a].requires_grad || nodes_[b].requires_grad;
  return push(std::move(out), rg, !rg ? std::function<void(Tape&, Node&)>() : [a, b](Tape& t, Node& self) {
    if (t.nodes_[a].requires_grad) add_into(t.grad_buf(a), self.grad);
    if (t.nodes_[b].requires_grad) add_into(t.grad_buf(b), self.grad);
  });
}

NodeId Tape::sub(NodeId a, NodeId b) {
  const Mat& av = value(a);
  const Mat& bv = value(b);
  check(av.rows() == bv.rows() && av.cols() == bv.cols(), "sub shape mismatch");
  Mat out = Mat::uninitialized(av.rows(), av.cols());
  const std::int64_t n = out.size();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out.data()[i] = av.data()[i] - bv.data()[i];
  const bool rg = nodes_[a].requires_grad || nodes_[b].requires_grad;
  return push(std::move(out), rg, !rg ? std::function<void(Tape&, Node&)>() : [a, b](Tape& t, Node& self) {
    if (t.nodes_[a].requires_grad) add_into(t.grad_buf(a), self.grad);
    if (t.nodes_[b].requires_grad) axpy_into(t.grad_buf(b), self.grad, -1.0);
  });
}

NodeId Tape::hadamard(NodeId a, NodeId b) {
  const Mat& av = value(a);
  const Mat& bv = value(b);
  check(av.rows() == bv.rows() && av.cols() == bv.cols(), "hadamard shape mismatch");
  Mat out = Mat::uninitialized(av.rows(), av.cols());
  const std::int64_t n = out.size();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out.data()[i] = av.data()[i] * bv.data()[i];
  const bool rg = nodes_[a].requires_grad || nodes_[b].requires_grad;
  return push(std::move(out), rg, !rg ? std::function<void(Tape&, Node&)>() : [a, b](Tape& t, Node& self) {
    const std::int64_t m = self.grad.size();
    if (t.nodes_[a].requires_grad) {
      Mat& ga = t.grad_buf(a);
      const double* bd = t.value(b).data();
#pragma omp parallel for schedule(static)
      for (std::int64_t i = 0; i < m; ++i) ga.data()[i] += self.grad.data()[i] * bd[i];
    }
    if (t.nodes_[b].requires_grad) {
      Mat& gb = t.grad_buf(b);
      const double* ad = t.value(a).data();
#pragma omp parallel for schedule(static)
      for (std::int64_t i = 0; i < m; ++i) gb.data()[i] += self.grad.data()[i] * ad[i];
    }
  });
}

NodeId Tape::scale(NodeId a, double s) {
  const Mat& av = value(a);
  Mat out = Mat::uninitialized(av.rows(), av.cols());
  const std::int64_t n = out.size();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out.data()[i] = s * av.data()[i];
  const bool rg = nodes_[a].requires_grad;
  return push(std::move(out), rg, !rg ? std::function<void(Tape&, Node&)>() : [a, s](Tape& t, Node& self) {
    axpy_into(t.grad_buf(a), self.grad, s);
  });
}

NodeId Tape::add_bias(NodeId x, NodeId bias_row) {
  const Mat& xv = value(x);
  const Mat& bv = value(bias_row);
  check(bv.rows() == 1 && bv.cols() == xv.cols(), "add_bias: bias must be 1 x cols");
  Mat out = Mat::uninitialized(xv.rows(), xv.cols());
  const int m = xv.rows(), d = xv.cols();
#pragma omp parallel for schedule(static)
  for (int r = 0; r < m; ++r) {
    const double* xr = xv.row(r);
    double* o = out.row(r);
    for (int c = 0; c < d; ++c) o[c] = xr[c] + bv.data()[c];
  }
  const bool rg = nodes_[x].requires_grad || nodes_[bias_row].requires_grad;
  return push(std::move(out), rg,
              !rg ? std::function<void(Tape&, Node&)>() : [x, bias_row](Tape& t, Node& self) {
    if (t.nodes_[x].requires_grad) add_into(t.grad_buf(x), self.grad);
    if (t.nodes_[bias_row].requires_grad) {
      Mat& gb = t.grad_buf(bias_row);
      const int m = self.grad.rows(), d = self.grad.cols();
      for (int c = 0; c < d; ++c) {
        double s = 0.0;
        for (int r = 0; r < m; ++r) s += self.grad.at(r, c);
        gb.data()[c] += s;
      }
    }
  });
}

NodeId Tape::concat_cols(NodeId a, NodeId b) {
  const Mat& av = value(a);
  const Mat& bv = value(b);
  check(av.rows() == bv.rows(), "concat_cols: row counts differ");
  const int m = av.rows(), p = av.cols(), q = bv.cols();
  Mat out = Mat::uninitialized(m, p + q);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < m; ++r) {
    double* o = out.row(r);
    const double* ar = av.row(r);
    const double* br = bv.row(r);
    for (int c = 0; c < p; ++c) o[c] = ar[c];
    for (int c = 0; c < q; ++c) o[p + c] = br[c];
  }
  const bool rg = nodes_[a].requires_grad || nodes_[b].requires_grad;
  return push(std::move(out), rg,
              !rg ? std::function<void(Tape&, Node&)>() : [a, b, p, q](Tape& t, Node& self) {
    const int m = self.grad.rows();
    if (t.nodes_[a].requires_grad) {
      Mat& ga = t.grad_buf(a);
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < p; ++c) ga.at(r, c) += self.grad.at(r, c);
    }
    if (t.nodes_[b].requires_grad) {
      Mat& gb = t.grad_buf(b);
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < q; ++c) gb.at(r, c) += self.grad.at(r, p + c);
    }
  });
}

NodeId Tape::gather_rows(NodeId x, std::vector<std::int64_t> idx) {
  const Mat& xv = value(x);
  for (std::int64_t i : idx) check(i >= 0 && i < xv.rows(), "gather_rows: index out of range");
  const int d = xv.cols();
  Mat out = Mat::uninitialized(static_cast<int>(idx.size()), d);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const double* src = xv.row(static_cast<int>(idx[r]));
    double* dst = out.row(static_cast<int>(r));
    for (int c = 0; c < d; ++c) dst[c] = src[c];
  }
  const bool rg = nodes_[x].requires_grad;
  auto shared_idx = std::make_shared<std::vector<std::int64_t>>(std::move(idx));
  return push(std::move(out), rg,
              !rg ? std::function<void(Tape&, Node&)>() : [x, shared_idx](Tape& t, Node& self) {
    // scatter-add; serial keeps duplicate targets race-free and deterministic
    Mat& gx = t.grad_buf(x);
    const int d = self.grad.cols();
    for (std::size_t r = 0; r < shared_idx->size(); ++r) {
      double* dst = gx.row(static_cast<int>((*shared_idx)[r]));
      const double* src = self.grad.row(static_cast<int>(r));
      for (int c = 0; c < d; ++c) dst[c] += src[c];
    }
  });
}

NodeId Tape::leaky_relu(NodeId x, double slope) {
  const Mat& xv = value(x);
  Mat out = Mat::uninitialized(xv.rows(), xv.cols());
  const std::int64_t n = out.size();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const double v = xv.data()[i];
    out.data()[i] = v > 0.0 ? v : slope * v;
  }
  const bool rg = nodes_[x].requires_grad;
  return push(std::move(out), rg,
              !rg ? std::function<void(Tape&, Node&)>() : [x, slope](Tape& t, Node& self) {
    Mat& gx = t.grad_buf(x);
    const double* xd = t.value(x).data();
    const std::int64_t n = self.grad.size();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
      gx.data()[i] += self.grad.data()[i] * (xd[i] > 0.0 ? 1.0 : slope);
  });
}

NodeId Tape::relu(NodeId x) { return leaky_relu(x, 0.0); }

NodeId Tape::unary(NodeId x, const char* what, double (*fwd)(double),
                   double (*dfd)(double, double)) {
  (void)what;
  const Mat& xv = value(x);
  Mat out = Mat::uninitialized(xv.rows(), xv.cols());
  const std::int64_t n = out.size();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out.data()[i] = fwd(xv.data()[i]);
  const bool rg = nodes_[x].requires_grad;
  return push(std::move(out), rg,
              !rg ? std::function<void(Tape&, Node&)>() : [x, dfd](Tape& t, Node& self) {
    Mat& gx = t.grad_buf(x);
    const double* xd = t.value(x).data();
    const double* yd = self.value.data();
    const std::int64_t n = self.grad.size();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
      gx.data()[i] += self.grad.data()[i] * dfd(xd[i], yd[i]);
  });
}

NodeId Tape::sigmoid(NodeId x) {
  return unary(x, "sigmoid", [](double v) { return stable_sigmoid(v); },
               [](double, double y) { return y * (1.0 - y); });
}

NodeId Tape::exp_elem(NodeId x) {
  return unary(x, "exp", [](double v) { return std::exp(v); },
               [](double, double y) { return y; });
}

NodeId Tape::log_elem(NodeId x) {
  const Mat& xv = value(x);
  for (std::int64_t i = 0; i < xv.size(); ++i)
    check(xv.data()[i] > 0.0, "log of non-positive value");
  return unary(x, "log", [](double v) { return std::log(v); },
               [](double v, double) { return 1.0 / v; });
}

NodeId Tape::softplus(NodeId x) {
  return unary(x, "softplus", [](double v) { return stable_softplus(v); },
               [](double v, double) { return stable_sigmoid(v); });
}

NodeId Tape::dropout(NodeId x, double p, Rng& rng, bool training) {
  check(p >= 0.0 && p < 1.0, "dropout rate must be in [0, 1)");
  if (!training || p == 0.0) return x;
  const Mat& xv = value(x);
  Mat mask = Mat::uninitialized(xv.rows(), xv.cols());
  const double keep_scale = 1.0 / (1.0 - p);
  for (std::int64_t i = 0; i < mask.size(); ++i)
    mask.data()[i] = rng.uniform01() >= p ? keep_scale : 0.0;
  return hadamard(x, constant(std::move(mask)));
}

NodeId Tape::row_normalize_bn(NodeId x, bool training) {
  (void)training;  // stateless: both modes standardize with batch statistics
  const Mat& xv = value(x);
  const int m = xv.rows(), d = xv.cols();
  check(m >= 1, "row_normalize_bn needs at least one row");
  constexpr double kEps = 1e-5;
  auto inv_std = std::make_shared<std::vector<double>>(static_cast<std::size_t>(d));
  Mat out = Mat::uninitialized(m, d);
  for (int c = 0; c < d; ++c) {
    double mean = 0.0;
    for (int r = 0; r < m; ++r) mean += xv.at(r, c);
    mean /= m;
    double var = 0.0;
    for (int r = 0; r < m; ++r) {
      const double dv = xv.at(r, c) - mean;
      var += dv * dv;
    }
    var /= m;
    const double is = 1.0 / std::sqrt(var + kEps);
    (*inv_std)[c] = is;
    for (int r = 0; r < m; ++r) out.at(r, c) = (xv.at(r, c) - mean) * is;
  }
  const bool rg = nodes_[x].requires_grad;
  return push(std::move(out), rg,
              !rg ? std::function<void(Tape&, Node&)>() : [x, inv_std](Tape& t, Node& self) {
    Mat& gx = t.grad_buf(x);
    const Mat& y = self.value;
    const int m = y.rows(), d = y.cols();
#pragma omp parallel for schedule(static)
    for (int c = 0; c < d; ++c) {
      double mean_g = 0.0, mean_gy = 0.0;
      for (int r = 0; r < m; ++r) {
        mean_g += self.grad.at(r, c);
        mean_gy += self.grad.at(r, c) * y.at(r, c);
      }
      mean_g /= m;
      mean_gy /= m;
      const double is = (*inv_std)[c];
      for (int r = 0; r < m; ++r)
        gx.at(r, c) += is * (self.grad.at(r, c) - mean_g - y.at(r, c) * mean_gy);
    }
  });
}

NodeId Tape::segment_softmax(NodeId scores, std::vector<std::int64_t> offsets) {
  const Mat& sv = value(scores);
  check(sv.cols() == 1, "segment_softmax expects a column vector");
  Mat out = Mat::uninitialized(sv.rows(), 1);
  kernels::segment_softmax(sv.flat(), offsets, out.flat());
  const bool rg = nodes_[scores].requires_grad;
  auto offs = std::make_shared<std::vector<std::int64_t>>(std::move(offsets));
  return push(std::move(out), rg,
              !rg ? std::function<void(Tape&, Node&)>() : [scores, offs](Tape& t, Node& self) {
    Mat& gs = t.grad_buf(scores);
    kernels::segment_softmax_grad(self.value.flat(), self.grad.flat(), *offs, gs.flat());
  });
}

NodeId Tape::coeff_spmm(NodeId coeff, NodeId x, const PairIndex& adj) {
  const Mat& cv = value(coeff);
  check(cv.cols() == 1, "coeff_spmm expects a coefficient column vector");
  Mat out;
  kernels::coeff_gather(adj, cv.flat(), value(x), out);
  const bool rg = nodes_[coeff].requires_grad || nodes_[x].requires_grad;
  const PairIndex* adj_p = &adj;
  return push(std::move(out), rg,
              !rg ? std::function<void(Tape&, Node&)>() : [coeff, x, adj_p](Tape& t, Node& self) {
    if (t.nodes_[x].requires_grad)
      kernels::coeff_gather_transpose(*adj_p, t.value(coeff).flat(), self.grad, t.grad_buf(x));
    if (t.nodes_[coeff].requires_grad) {
      Mat tmp = Mat::uninitialized(t.value(coeff).rows(), 1);
      kernels::coeff_grad(*adj_p, self.grad, t.value(x), tmp.flat());
      add_into(t.grad_buf(coeff), tmp);
    }
  });
}

NodeId Tape::node_decay(NodeId delta, const PairIndex& adj, double t_prime,
                        std::vector<double> inv_norm) {
  const Mat& dv = value(delta);
  check(dv.cols() == 1 && dv.rows() == adj.num_nodes, "node_decay: delta must be num_nodes x 1");
  check(static_cast<std::int64_t>(inv_norm.size()) == adj.num_pairs(),
        "node_decay: inv_norm size mismatch");
  auto norm = std::make_shared<std::vector<double>>(std::move(inv_norm));
  Mat out = Mat::uninitialized(static_cast<int>(adj.num_pairs()), 1);
  kernels::node_decay(adj, dv.flat(), t_prime, *norm, out.flat());
  const bool rg = nodes_[delta].requires_grad;
  const PairIndex* adj_p = &adj;
  return push(std::move(out), rg,
              !rg ? std::function<void(Tape&, Node&)>()
                  : [delta, adj_p, t_prime, norm](Tape& t, Node& self) {
    kernels::node_decay_grad(*adj_p, t.value(delta).flat(), t_prime, *norm, self.grad.flat(),
                             t.grad_buf(delta).flat());
  });
}

NodeId Tape::edge_decay(NodeId delta_e, const PairIndex& adj, double t_prime,
                        std::vector<double> inv_norm) {
  const Mat& dv = value(delta_e);
  check(dv.cols() == 1 && dv.rows() == adj.num_pairs(), "edge_decay: delta must be pairs x 1");
  check(static_cast<std::int64_t>(inv_norm.size()) == adj.num_pairs(),
        "edge_decay: inv_norm size mismatch");
  auto norm = std::make_shared<std::vector<double>>(std::move(inv_norm));
  Mat out = Mat::uninitialized(static_cast<int>(adj.num_pairs()), 1);
  kernels::edge_decay(adj, dv.flat(), t_prime, *norm, out.flat());
  const bool rg = nodes_[delta_e].requires_grad;
  const PairIndex* adj_p = &adj;
  return push(std::move(out), rg,
              !rg ? std::function<void(Tape&, Node&)>()
                  : [delta_e, adj_p, t_prime, norm](Tape& t, Node& self) {
    kernels::edge_decay_grad(*adj_p, t.value(delta_e).flat(), t_prime, *norm, self.grad.flat(),
                             t.grad_buf(delta_e).flat());
  });
}

NodeId Tape::sum_all(NodeId x) {
  const Mat& xv = value(x);
  double s = 0.0;
  for (std::int64_t i = 0; i < xv.size(); ++i) s += xv.data()[i];
  Mat out(1, 1);
  out.at(0, 0) = s;
  const bool rg = nodes_[x].requires_grad;
  return push(std::move(out), rg, !rg ? std::function<void(Tape&, Node&)>() : [x](Tape& t, Node& self) {
    const double g = self.grad.at(0, 0);
    Mat& gx = t.grad_buf(x);
    const std::int64_t n = gx.size();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) gx.data()[i] += g;
  });
}

NodeId Tape::bce_mean(NodeId preds, std::vector<double> labels) {
  const Mat& pv = value(preds);
  check(pv.cols() == 1, "bce_mean expects a column vector");
  check(pv.rows() > 0, "bce_mean: empty input");
  check(static_cast<std::size_t>(pv.rows()) == labels.size(), "bce_mean: label count mismatch");
  for (double y : labels) check(y == 0.0 || y == 1.0, "bce_mean: labels must be 0 or 1");

  constexpr double kLo = 1e-12, kHi = 1.0 - 1e-12;
  const int n = pv.rows();
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double p = std::min(std::max(pv.at(i, 0), kLo), kHi);
    const double y = labels[i];
    loss += -y * std::log(p) - (1.0 - y) * std::log(1.0 - p);
  }
  loss /= n;
  Mat out(1, 1);
  out.at(0, 0) = loss;
  const bool rg = nodes_[preds].requires_grad;
  auto lab = std::make_shared<std::vector<double>>(std::move(labels));
  return push(std::move(out), rg,
              !rg ? std::function<void(Tape&, Node&)>() : [preds, lab](Tape& t, Node& self) {
    constexpr double lo = 1e-12, hi = 1.0 - 1e-12;
    const double g = self.grad.at(0, 0);
    const Mat& pv = t.value(preds);
    Mat& gp = t.grad_buf(preds);
    const int n = pv.rows();
    for (int i = 0; i < n; ++i) {
      const double p = pv.at(i, 0);
      if (p <= lo || p >= hi) continue;  // clamped region is flat
      const double y = (*lab)[i];
      gp.at(i, 0) += g * (p - y) / (p * (1.0 - p) * n);
    }
  });
}

void Tape::backward(NodeId loss) {
  check(loss >= 0 && static_cast<std::size_t>(loss) < nodes_.size(), "backward: bad node id");
  const Mat& lv = nodes_[loss].value;
  if (lv.rows() != 1 || lv.cols() != 1)
    throw std::invalid_argument("backward: loss must be a 1x1 scalar");
  for (Node& n : nodes_) {
    if (!n.grad.empty()) n.grad.fill(0.0);
  }
  grad_buf(loss).at(0, 0) = 1.0;
  for (NodeId id = loss; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.grad.empty()) continue;
    if (n.sink != nullptr) add_into(n.sink->grad, n.grad);
    if (n.back) n.back(*this, n);
  }
}

}  // namespace tgfuse::nn
