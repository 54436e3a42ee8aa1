#include "mgdil/bench/probe.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "mgdil/dil/trainer.hpp"
#include "mgdil/util/error.hpp"

namespace mgdil::bench {

double domain_probe(std::span<const double> latents, std::size_t dim, std::span<const int> domains,
                    std::uint64_t seed, const ProbeConfig& config) {
  const std::size_t n = domains.size();
  if (dim == 0 || latents.size() != n * dim) throw Error("probe latents do not match label count");
  std::map<int, std::size_t> index;
  for (int d : domains) {
    if (d < 0) throw Error("probe requires domain labels on every sample");
    index.emplace(d, 0);
  }
  if (index.size() < 2) throw Error("domain probe needs at least two domains");
  std::size_t next = 0;
  for (auto& [d, k] : index) k = next++;
  const std::size_t classes = index.size();

  auto [train_idx, val_idx] = dil::validation_split(n, config.validation_split, seed);
  if (val_idx.empty() || train_idx.empty()) throw Error("domain probe needs at least two samples");

  std::vector<double> mean(dim, 0.0), scale(dim, 0.0);
  for (std::size_t i : train_idx) {
    for (std::size_t k = 0; k < dim; ++k) mean[k] += latents[i * dim + k];
  }
  for (double& m : mean) m /= static_cast<double>(train_idx.size());
  for (std::size_t i : train_idx) {
    for (std::size_t k = 0; k < dim; ++k) {
      const double c = latents[i * dim + k] - mean[k];
      scale[k] += c * c;
    }
  }
  for (double& s : scale) {
    s = std::sqrt(s / static_cast<double>(train_idx.size()));
    s = s > 1e-12 ? 1.0 / s : 0.0;
  }
  auto feature = [&](std::size_t i, std::size_t k) { return (latents[i * dim + k] - mean[k]) * scale[k]; };

  // Full-batch Adam on the mean cross-entropy.
  const std::size_t width = dim + 1;
  std::vector<double> w(classes * width, 0.0), grad(w.size()), m(w.size(), 0.0), v(w.size(), 0.0);
  std::vector<double> logits(classes);
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  for (std::size_t it = 1; it <= config.iterations; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i : train_idx) {
      double mx = -1e300;
      for (std::size_t c = 0; c < classes; ++c) {
        double z = w[c * width + dim];
        for (std::size_t k = 0; k < dim; ++k) z += w[c * width + k] * feature(i, k);
        logits[c] = z;
        mx = std::max(mx, z);
      }
      double sum = 0.0;
      for (double& z : logits) sum += (z = std::exp(z - mx));
      const std::size_t target = index.at(domains[i]);
      for (std::size_t c = 0; c < classes; ++c) {
        const double g = logits[c] / sum - (c == target ? 1.0 : 0.0);
        for (std::size_t k = 0; k < dim; ++k) grad[c * width + k] += g * feature(i, k);
        grad[c * width + dim] += g;
      }
    }
    const double inv = 1.0 / static_cast<double>(train_idx.size());
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(it));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(it));
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double g = grad[k] * inv + config.l2 * w[k];
      m[k] = b1 * m[k] + (1.0 - b1) * g;
      v[k] = b2 * v[k] + (1.0 - b2) * g * g;
      w[k] -= config.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps);
    }
  }

  std::size_t correct = 0;
  for (std::size_t i : val_idx) {
    std::size_t best = 0;
    double best_z = -1e300;
    for (std::size_t c = 0; c < classes; ++c) {
      double z = w[c * width + dim];
      for (std::size_t k = 0; k < dim; ++k) z += w[c * width + k] * feature(i, k);
      if (z > best_z) {
        best_z = z;
        best = c;
      }
    }
    if (best == index.at(domains[i])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(val_idx.size());
}

}  // namespace mgdil::bench
