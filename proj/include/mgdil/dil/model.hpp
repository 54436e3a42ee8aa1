#pragma once

// Parameters of the domain-invariant learner:
//   encoder      x (D) -> Linear(D,H) -> ReLU -> Linear(H,d) -> h
//   domain head  h -> Linear(d,M)           (behind the gradient reversal layer)
//   projection   h -> Linear(d,r)           (contrastive head, output normalized)
//   classifier   h -> Linear(d,2)
// All tensors live in one flat buffer so the optimizer, checkpoints and
// finite-difference checks treat the model as a single vector.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "mgdil/dil/linalg.hpp"

namespace mgdil::dil {

struct ModelDims {
  std::size_t input = 4096;
  std::size_t hidden = 512;
  std::size_t latent = 256;
  std::size_t projection = 128;
  std::size_t domains = 3;
  std::size_t classes = 2;

  bool operator==(const ModelDims&) const = default;
};

enum class Tensor : std::size_t {
  kHiddenWeight,
  kHiddenBias,
  kLatentWeight,
  kLatentBias,
  kDomainWeight,
  kDomainBias,
  kProjectionWeight,
  kProjectionBias,
  kClassWeight,
  kClassBias,
};
inline constexpr std::size_t kTensorCount = 10;

enum class ParamGroup { kEncoder, kDomainHead, kProjectionHead, kClassifier };
inline constexpr std::array<ParamGroup, 4> kParamGroups = {ParamGroup::kEncoder, ParamGroup::kDomainHead,
                                                           ParamGroup::kProjectionHead, ParamGroup::kClassifier};

std::string_view tensor_name(Tensor t);
std::string_view group_name(ParamGroup g);

struct TensorSlot {
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;  // 1 for bias vectors
  std::size_t size() const { return rows * cols; }
};

class ParamLayout {
 public:
  explicit ParamLayout(const ModelDims& dims);

  const ModelDims& dims() const { return dims_; }
  const TensorSlot& slot(Tensor t) const { return slots_[static_cast<std::size_t>(t)]; }
  std::size_t total() const { return total_; }

  // Half-open [begin, end) range of a parameter group in the flat buffer.
  std::pair<std::size_t, std::size_t> group_range(ParamGroup g) const;

  template <typename T>
  MatrixView<T> matrix(std::span<T> buffer, Tensor t) const {
    const auto& s = slot(t);
    return {buffer.data() + s.offset, s.rows, s.cols};
  }
  template <typename T>
  std::span<T> vector(std::span<T> buffer, Tensor t) const {
    const auto& s = slot(t);
    return buffer.subspan(s.offset, s.size());
  }

 private:
  ModelDims dims_;
  std::array<TensorSlot, kTensorCount> slots_{};
  std::size_t total_ = 0;
};

template <typename Real>
class Model {
 public:
  using value_type = Real;

  explicit Model(const ModelDims& dims) : layout_(dims), params_(layout_.total(), Real(0)) {}

  // Linear layers drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)), weights and biases alike.
  static Model initialized(const ModelDims& dims, std::uint64_t seed);

  const ModelDims& dims() const { return layout_.dims(); }
  const ParamLayout& layout() const { return layout_; }

  std::span<Real> params() { return params_; }
  std::span<const Real> params() const { return params_; }

  MatrixView<Real> matrix(Tensor t) { return layout_.matrix(std::span<Real>(params_), t); }
  MatrixView<const Real> matrix(Tensor t) const { return layout_.matrix(std::span<const Real>(params_), t); }
  std::span<Real> vector(Tensor t) { return layout_.vector(std::span<Real>(params_), t); }
  std::span<const Real> vector(Tensor t) const { return layout_.vector(std::span<const Real>(params_), t); }

  bool all_finite() const;

  bool operator==(const Model& other) const { return dims() == other.dims() && params_ == other.params_; }

 private:
  ParamLayout layout_;
  std::vector<Real> params_;
};

extern template class Model<float>;
extern template class Model<double>;

}  // namespace mgdil::dil
