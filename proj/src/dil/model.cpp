#include "mgdil/dil/model.hpp"

#include <cmath>
#include <random>

namespace mgdil::dil {

std::string_view tensor_name(Tensor t) {
  switch (t) {
    case Tensor::kHiddenWeight: return "encoder.hidden.weight";
    case Tensor::kHiddenBias: return "encoder.hidden.bias";
    case Tensor::kLatentWeight: return "encoder.latent.weight";
    case Tensor::kLatentBias: return "encoder.latent.bias";
    case Tensor::kDomainWeight: return "domain_head.weight";
    case Tensor::kDomainBias: return "domain_head.bias";
    case Tensor::kProjectionWeight: return "projection_head.weight";
    case Tensor::kProjectionBias: return "projection_head.bias";
    case Tensor::kClassWeight: return "classifier.weight";
    case Tensor::kClassBias: return "classifier.bias";
  }
  return "?";
}

std::string_view group_name(ParamGroup g) {
  switch (g) {
    case ParamGroup::kEncoder: return "encoder";
    case ParamGroup::kDomainHead: return "domain_head";
    case ParamGroup::kProjectionHead: return "projection_head";
    case ParamGroup::kClassifier: return "classifier";
  }
  return "?";
}

ParamLayout::ParamLayout(const ModelDims& dims) : dims_(dims) {
  const std::array<std::pair<std::size_t, std::size_t>, kTensorCount> shapes = {{
      {dims.hidden, dims.input},
      {dims.hidden, 1},
      {dims.latent, dims.hidden},
      {dims.latent, 1},
      {dims.domains, dims.latent},
      {dims.domains, 1},
      {dims.projection, dims.latent},
      {dims.projection, 1},
      {dims.classes, dims.latent},
      {dims.classes, 1},
  }};
  std::size_t offset = 0;
  for (std::size_t i = 0; i < kTensorCount; ++i) {
    slots_[i] = {offset, shapes[i].first, shapes[i].second};
    offset += slots_[i].size();
  }
  total_ = offset;
}

std::pair<std::size_t, std::size_t> ParamLayout::group_range(ParamGroup g) const {
  auto span_of = [&](Tensor first, Tensor last) {
    return std::pair{slot(first).offset, slot(last).offset + slot(last).size()};
  };
  switch (g) {
    case ParamGroup::kEncoder: return span_of(Tensor::kHiddenWeight, Tensor::kLatentBias);
    case ParamGroup::kDomainHead: return span_of(Tensor::kDomainWeight, Tensor::kDomainBias);
    case ParamGroup::kProjectionHead: return span_of(Tensor::kProjectionWeight, Tensor::kProjectionBias);
    case ParamGroup::kClassifier: return span_of(Tensor::kClassWeight, Tensor::kClassBias);
  }
  return {0, 0};
}

template <typename Real>
Model<Real> Model<Real>::initialized(const ModelDims& dims, std::uint64_t seed) {
  Model model(dims);
  std::mt19937_64 rng(seed);
  auto fill_linear = [&](Tensor weight, Tensor bias) {
    auto w = model.matrix(weight);
    const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < w.rows * w.cols; ++i) w.data[i] = static_cast<Real>(dist(rng));
    for (Real& b : model.vector(bias)) b = static_cast<Real>(dist(rng));
  };
  fill_linear(Tensor::kHiddenWeight, Tensor::kHiddenBias);
  fill_linear(Tensor::kLatentWeight, Tensor::kLatentBias);
  fill_linear(Tensor::kDomainWeight, Tensor::kDomainBias);
  fill_linear(Tensor::kProjectionWeight, Tensor::kProjectionBias);
  fill_linear(Tensor::kClassWeight, Tensor::kClassBias);
  return model;
}

template <typename Real>
bool Model<Real>::all_finite() const {
  for (Real v : params_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

template class Model<float>;
template class Model<double>;

}  // namespace mgdil::dil
