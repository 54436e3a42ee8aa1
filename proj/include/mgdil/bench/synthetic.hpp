#pragma once

// Controlled domain-shift testbed emitted directly as encoded vectors.
//
// Axis 0 carries the class signal (+mu for bots, -mu for humans). Axes
// 1..S carry one nuisance offset per source domain (nu * e_{1+k}). The
// held-out target is shifted along `target_direction`, given over the
// nuisance axes plus one extra axis no source domain uses, and scaled to
// `target_nu`. Every coordinate gets N(0, sigma^2) noise.

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "mgdil/dil/trainer.hpp"

namespace mgdil::bench {

struct SyntheticSpec {
  std::size_t dim = 32;
  std::size_t samples_per_cell = 600;  // per (class, source domain)
  // Optional per-domain override: cell_counts[d] = {humans, bots}. Unequal
  // bot prevalence across domains makes the nuisance offsets spuriously
  // predictive of the label in the pooled source data.
  std::vector<std::array<std::size_t, 2>> cell_counts;
  std::size_t target_samples_per_class = 600;
  std::size_t source_domains = 3;
  double mu = 2.0;
  double nu = 3.0;
  double sigma = 1.0;
  double target_nu = 3.0;
  std::vector<double> target_direction = {1.0, -1.0, 0.0, 0.0};  // over axes 1..S+1
  std::uint64_t seed = 2024;

  // Throws ConfigError when mu, nu, sigma are not positive, fewer than two
  // source domains are requested or the axes do not fit in `dim`.
  void validate() const;

  std::size_t count(std::size_t domain, int label) const {
    return cell_counts.empty() ? samples_per_cell : cell_counts[domain][static_cast<std::size_t>(label)];
  }
};

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SyntheticSpec& spec);

struct SyntheticCorpus {
  dil::EncodedCorpus source;  // domain-labelled
  dil::EncodedCorpus target;  // domain = kNoDomain
};

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

}  // namespace mgdil::bench
