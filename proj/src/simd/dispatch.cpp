#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "mgdil/simd/kernels.hpp"

namespace mgdil::simd {

namespace {

bool host_has_avx2() {
#if defined(MGDIL_WITH_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa initial_isa() {
  const Isa best = detect_isa();
  if (const char* env = std::getenv("MGDIL_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Isa::kScalar;
  }
  return best;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
  }
  return "unknown";
}

Isa detect_isa() {
  static const bool avx2 = host_has_avx2();
  return avx2 ? Isa::kAvx2 : Isa::kScalar;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (isa == Isa::kAvx2 && detect_isa() != Isa::kAvx2) {
    throw std::invalid_argument("AVX2 kernels are not available on this host");
  }
  current().store(isa, std::memory_order_relaxed);
}

float dot(std::span<const float> a, std::span<const float> b) {
#if defined(MGDIL_WITH_AVX2)
  if (active_isa() == Isa::kAvx2) return avx2::dot(a.data(), b.data(), a.size());
#endif
  return scalar::dot(a.data(), b.data(), a.size());
}

double dot(std::span<const double> a, std::span<const double> b) {
#if defined(MGDIL_WITH_AVX2)
  if (active_isa() == Isa::kAvx2) return avx2::dot(a.data(), b.data(), a.size());
#endif
  return scalar::dot(a.data(), b.data(), a.size());
}

void axpy(float alpha, std::span<const float> x, std::span<float> y) {
#if defined(MGDIL_WITH_AVX2)
  if (active_isa() == Isa::kAvx2) return avx2::axpy(alpha, x.data(), y.data(), x.size());
#endif
  scalar::axpy(alpha, x.data(), y.data(), x.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
#if defined(MGDIL_WITH_AVX2)
  if (active_isa() == Isa::kAvx2) return avx2::axpy(alpha, x.data(), y.data(), x.size());
#endif
  scalar::axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace mgdil::simd
