#include "mgdil/bench/synthetic.hpp"

#include <cmath>
#include <random>

#include "mgdil/util/error.hpp"

namespace mgdil::bench {

void SyntheticSpec::validate() const {
  if (!(mu > 0.0) || !(nu > 0.0) || !(sigma > 0.0)) throw ConfigError("synthetic mu, nu and sigma must be positive");
  if (target_nu < 0.0) throw ConfigError("synthetic target_nu must be non-negative");
  if (source_domains < 2) throw ConfigError("synthetic benchmark needs at least two source domains");
  if (dim < source_domains + 2) throw ConfigError("synthetic dim too small for class, nuisance and novel axes");
  if (target_direction.size() != source_domains + 1) {
    throw ConfigError("target_direction must have source_domains + 1 entries");
  }
  if (samples_per_cell == 0) throw ConfigError("samples_per_cell must be positive");
  if (!cell_counts.empty() && cell_counts.size() != source_domains) {
    throw ConfigError("cell_counts must list one {humans, bots} pair per source domain");
  }
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
  SyntheticSpec s;
  s.dim = j.value("dim", s.dim);
  s.samples_per_cell = j.value("samples_per_cell", s.samples_per_cell);
  s.target_samples_per_class = j.value("target_samples_per_class", s.target_samples_per_class);
  s.source_domains = j.value("source_domains", s.source_domains);
  s.mu = j.value("mu", s.mu);
  s.nu = j.value("nu", s.nu);
  s.sigma = j.value("sigma", s.sigma);
  s.target_nu = j.value("target_nu", s.target_nu);
  if (j.contains("cell_counts")) s.cell_counts = j.at("cell_counts").get<std::vector<std::array<std::size_t, 2>>>();
  if (j.contains("target_direction")) s.target_direction = j.at("target_direction").get<std::vector<double>>();
  s.seed = j.value("seed", s.seed);
  s.validate();
  return s;
}

nlohmann::json to_json(const SyntheticSpec& s) {
  return {{"dim", s.dim},
          {"samples_per_cell", s.samples_per_cell},
          {"cell_counts", s.cell_counts},
          {"target_samples_per_class", s.target_samples_per_class},
          {"source_domains", s.source_domains},
          {"mu", s.mu},
          {"nu", s.nu},
          {"sigma", s.sigma},
          {"target_nu", s.target_nu},
          {"target_direction", s.target_direction},
          {"seed", s.seed}};
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.sigma);
  SyntheticCorpus out;
  out.source.dim = spec.dim;
  out.target.dim = spec.dim;
  std::vector<double> x(spec.dim);

  auto sample = [&](int label, const std::vector<double>& offset) {
    for (std::size_t k = 0; k < spec.dim; ++k) x[k] = noise(rng) + offset[k];
    x[0] += label == 1 ? spec.mu : -spec.mu;
  };

  for (std::size_t d = 0; d < spec.source_domains; ++d) {
    std::vector<double> offset(spec.dim, 0.0);
    offset[1 + d] = spec.nu;
    for (int label = 0; label < 2; ++label) {
      for (std::size_t i = 0; i < spec.count(d, label); ++i) {
        sample(label, offset);
        out.source.add("s" + std::to_string(d) + "_" + std::to_string(label) + "_" + std::to_string(i), x, label,
                       static_cast<int>(d));
      }
    }
  }

  double norm = 0.0;
  for (double c : spec.target_direction) norm += c * c;
  norm = std::sqrt(norm);
  std::vector<double> offset(spec.dim, 0.0);
  if (norm > 0.0) {
    for (std::size_t k = 0; k < spec.target_direction.size(); ++k) {
      offset[1 + k] = spec.target_nu * spec.target_direction[k] / norm;
    }
  }
  for (int label = 0; label < 2; ++label) {
    for (std::size_t i = 0; i < spec.target_samples_per_class; ++i) {
      sample(label, offset);
      out.target.add("t_" + std::to_string(label) + "_" + std::to_string(i), x, label, dil::kNoDomain);
    }
  }
  return out;
}

}  // namespace mgdil::bench
