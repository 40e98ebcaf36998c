#include "tgfuse/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace tgfuse::nn {

Adam::Adam(std::vector<Parameter*> params, double beta1, double beta2, double eps)
    : params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Parameter* p : params_) {
    m_.push_back(Mat::zeros(p->value.rows(), p->value.cols()));
    v_.push_back(Mat::zeros(p->value.rows(), p->value.cols()));
  }
}

void Adam::step(double lr) {
  for (const Parameter* p : params_) {
    if (!p->grad.all_finite())
      throw std::runtime_error("adam_step: non-finite gradient in parameter '" + p->name + "'");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter& p = *params_[k];
    double* w = p.value.data();
    double* g = p.grad.data();
    double* m = m_[k].data();
    double* v = v_[k].data();
    const std::int64_t n = p.value.size();
    for (std::int64_t i = 0; i < n; ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      w[i] -= lr * m_hat / (std::sqrt(v_hat) + eps_);
    }
    if (!p.value.all_finite())
      throw std::runtime_error("adam_step: parameter '" + p.name + "' became non-finite");
    p.grad.fill(0.0);
  }
}

double cosine_anneal_lr(double base_lr, int epoch, int t_max) {
  if (t_max <= 0) throw std::invalid_argument("cosine_anneal_lr: t_max must be positive");
  if (epoch < 0 || epoch > t_max)
    throw std::invalid_argument("cosine_anneal_lr: epoch must lie in [0, t_max]");
  constexpr double kPi = 3.14159265358979323846;
  return base_lr * (1.0 + std::cos(kPi * static_cast<double>(epoch) / t_max)) / 2.0;
}

}  // namespace tgfuse::nn
