#pragma once

#include <cstdint>
#include <span>

namespace mgdil::bench {

struct ProbeConfig {
  double validation_split = 0.3;
  std::size_t iterations = 300;
  double learning_rate = 0.05;
  double l2 = 1e-4;
};

// Fits a fresh multinomial logistic regression from latents (n x dim) to
// domain labels on a seeded split and returns its validation accuracy.
// Features are standardized with the training split's statistics. Throws
// mgdil::Error when fewer than two domains are present.
double domain_probe(std::span<const double> latents, std::size_t dim, std::span<const int> domains,
                    std::uint64_t seed, const ProbeConfig& config = {});

}  // namespace mgdil::bench
