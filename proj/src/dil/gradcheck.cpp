#include "mgdil/dil/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mgdil::dil {

std::string_view component_name(LossComponent c) {
  switch (c) {
    case LossComponent::kCls: return "L_cls";
    case LossComponent::kAdv: return "L_adv";
    case LossComponent::kCon: return "L_con";
    case LossComponent::kTotal: return "L";
  }
  return "?";
}

namespace {

double value_of(const LossTerms& t, LossComponent c) {
  switch (c) {
    case LossComponent::kCls: return t.cls;
    case LossComponent::kAdv: return t.adv;
    case LossComponent::kCon: return t.con;
    case LossComponent::kTotal: return t.total;
  }
  return 0.0;
}

}  // namespace

std::vector<GroupCheck> check_gradients(const Model<double>& model, const Batch<double>& batch,
                                        const LossWeights& weights, LossComponent component, double epsilon) {
  ComponentGradients<double> parts;
  compute_losses(model, batch, weights, std::nullopt, &parts);
  std::vector<double> analytic;
  switch (component) {
    case LossComponent::kCls: analytic = parts.cls; break;
    case LossComponent::kAdv: analytic = parts.adv; break;
    case LossComponent::kCon: analytic = parts.con; break;
    case LossComponent::kTotal:
      analytic.assign(model.params().size(), 0.0);
      combine_gradients<double>(parts, weights, analytic);
      break;
  }

  Model<double> probe = model;
  auto params = probe.params();
  std::vector<double> numeric(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double saved = params[k];
    params[k] = saved + epsilon;
    const double up = value_of(compute_losses<double>(probe, batch, weights, std::nullopt, nullptr), component);
    params[k] = saved - epsilon;
    const double down = value_of(compute_losses<double>(probe, batch, weights, std::nullopt, nullptr), component);
    params[k] = saved;
    numeric[k] = (up - down) / (2.0 * epsilon);
  }

  std::vector<GroupCheck> out;
  for (ParamGroup g : kParamGroups) {
    const auto [begin, end] = model.layout().group_range(g);
    GroupCheck c;
    c.component = component;
    c.group = g;
    double diff = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
      c.analytic_norm += analytic[k] * analytic[k];
      c.numeric_norm += numeric[k] * numeric[k];
      const double e = analytic[k] - numeric[k];
      diff += e * e;
      c.max_abs_error = std::max(c.max_abs_error, std::abs(e));
    }
    c.analytic_norm = std::sqrt(c.analytic_norm);
    c.numeric_norm = std::sqrt(c.numeric_norm);
    diff = std::sqrt(diff);
    const double scale = std::max(c.analytic_norm, c.numeric_norm);
    c.relative_error = scale < 1e-10 ? diff : diff / scale;
    out.push_back(c);
  }
  return out;
}

Batch<double> random_batch(const ModelDims& dims, std::size_t size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Batch<double> batch;
  batch.size = size;
  batch.x.resize(size * dims.input);
  for (double& v : batch.x) v = normal(rng);
  for (std::size_t i = 0; i < size; ++i) {
    batch.labels.push_back(static_cast<int>(i % dims.classes));
    batch.domains.push_back(static_cast<int>((i / dims.classes) % dims.domains));
  }
  return batch;
}

GradcheckOutcome run_gradcheck_suite(const GradcheckSuite& suite) {
  GradcheckOutcome outcome;
  const LossComponent components[] = {LossComponent::kCls, LossComponent::kAdv, LossComponent::kCon,
                                      LossComponent::kTotal};
  for (std::size_t b = 0; b < suite.batches; ++b) {
    const auto model = Model<double>::initialized(suite.dims, suite.seed + 1000 * b);
    const auto batch = random_batch(suite.dims, suite.batch_size, suite.seed + 1000 * b + 1);
    for (LossComponent c : components) {
      for (const auto& check : check_gradients(model, batch, suite.weights, c, suite.epsilon)) {
        outcome.worst_relative_error = std::max(outcome.worst_relative_error, check.relative_error);
        if (!(check.relative_error < suite.tolerance)) outcome.passed = false;
        outcome.checks.push_back(check);
      }
    }
  }
  return outcome;
}

}  // namespace mgdil::dil
