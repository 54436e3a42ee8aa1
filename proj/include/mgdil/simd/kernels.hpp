#pragma once

// Dense inner-loop kernels. Every kernel has a portable scalar reference
// implementation and, where the host supports it, an AVX2+FMA variant.
// The variant is picked once per process (see active_isa()); the two are
// tested for equivalence in tests/unit/simd_test.cpp.

#include <cstddef>
#include <span>
#include <string_view>

namespace mgdil::simd {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);

// Best ISA the running CPU supports and this binary was built with.
Isa detect_isa();

// ISA in use. Defaults to detect_isa(), overridable with MGDIL_SIMD=scalar.
Isa active_isa();

// Throws std::invalid_argument when `isa` is not available on this host.
void set_isa(Isa isa);

namespace scalar {
float dot(const float* a, const float* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
void axpy(float alpha, const float* x, float* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

#if defined(MGDIL_WITH_AVX2)
namespace avx2 {
float dot(const float* a, const float* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
void axpy(float alpha, const float* x, float* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2
#endif

// Dispatched entry points.
float dot(std::span<const float> a, std::span<const float> b);
double dot(std::span<const double> a, std::span<const double> b);

// y += alpha * x
void axpy(float alpha, std::span<const float> x, std::span<float> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace mgdil::simd
