#include "mgdil/dil/optimizer.hpp"

#include <cmath>

#include "mgdil/util/error.hpp"

namespace mgdil::dil {

template <typename Real>
void AdamW<Real>::step(std::span<Real> params, std::span<const Real> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) throw Error("optimizer state size mismatch");
  ++t_;
  const double lr = config_.learning_rate;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double bias1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double decay = 1.0 - lr * config_.weight_decay;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = static_cast<double>(grad[k]);
    m_[k] = b1 * m_[k] + (1.0 - b1) * g;
    v_[k] = b2 * v_[k] + (1.0 - b2) * g * g;
    const double mhat = m_[k] / bias1;
    const double vhat = v_[k] / bias2;
    const double p = static_cast<double>(params[k]) * decay;
    params[k] = static_cast<Real>(p - lr * mhat / (std::sqrt(vhat) + config_.epsilon));
  }
}

template class AdamW<float>;
template class AdamW<double>;

}  // namespace mgdil::dil
