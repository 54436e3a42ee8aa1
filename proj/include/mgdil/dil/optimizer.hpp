#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mgdil::dil {

struct AdamWConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

// Adam with decoupled weight decay: p <- p - lr*wd*p - lr*mhat/(sqrt(vhat)+eps).
template <typename Real>
class AdamW {
 public:
  AdamW(std::size_t size, const AdamWConfig& config) : config_(config), m_(size, 0.0), v_(size, 0.0) {}

  void step(std::span<Real> params, std::span<const Real> grad);

  std::size_t steps() const { return t_; }

 private:
  AdamWConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

extern template class AdamW<float>;
extern template class AdamW<double>;

}  // namespace mgdil::dil
