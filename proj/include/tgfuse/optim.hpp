#pragma once

#include <cstdint>
#include <vector>

#include "tgfuse/mat.hpp"
#include "tgfuse/tape.hpp"

namespace tgfuse::nn {

// Adam with bias correction. step() validates gradients (rejects NaN/Inf,
// naming the parameter), applies the update, and clears gradients.
class Adam {
 public:
  explicit Adam(std::vector<Parameter*> params, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8);

  void step(double lr);
  std::int64_t step_count() const { return t_; }

  // Moment accumulators, exposed for checkpoint/resume.
  std::vector<Mat>& first_moments() { return m_; }
  std::vector<Mat>& second_moments() { return v_; }
  void set_step_count(std::int64_t t) { t_ = t; }
  const std::vector<Parameter*>& params() const { return params_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<Mat> m_, v_;
  double beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
};

// base_lr * (1 + cos(pi * epoch / t_max)) / 2. Rejects t_max <= 0.
double cosine_anneal_lr(double base_lr, int epoch, int t_max);

}  // namespace tgfuse::nn
