#pragma once

#include <cstddef>
#include <span>

#include "mgdil/simd/kernels.hpp"

namespace mgdil::dil {

// Row-major view over a slice of a parameter or activation buffer.
template <typename T>
struct MatrixView {
  T* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::span<T> row(std::size_t r) const { return {data + r * cols, cols}; }
  T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  operator MatrixView<const T>() const { return {data, rows, cols}; }
};

// y = W x + b
template <typename Real>
void affine(MatrixView<const Real> w, std::span<const Real> b, std::span<const Real> x, std::span<Real> y) {
  for (std::size_t r = 0; r < w.rows; ++r) y[r] = b[r] + simd::dot(w.row(r), x);
}

// out += W^T g
template <typename Real>
void accumulate_transposed(MatrixView<const Real> w, std::span<const Real> g, std::span<Real> out) {
  for (std::size_t r = 0; r < w.rows; ++r) {
    if (g[r] != Real(0)) simd::axpy(g[r], w.row(r), out);
  }
}

// W += g x^T
template <typename Real>
void accumulate_outer(std::span<const Real> g, std::span<const Real> x, MatrixView<Real> w) {
  for (std::size_t r = 0; r < w.rows; ++r) {
    if (g[r] != Real(0)) simd::axpy(g[r], x, w.row(r));
  }
}

template <typename Real>
void accumulate(std::span<const Real> g, std::span<Real> out) {
  for (std::size_t i = 0; i < g.size(); ++i) out[i] += g[i];
}

}  // namespace mgdil::dil
