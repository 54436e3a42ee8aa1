#pragma once

// Central finite-difference check of the analytic loss gradients.

#include <cstdint>
#include <string>
#include <vector>

#include "mgdil/dil/losses.hpp"
#include "mgdil/dil/model.hpp"

namespace mgdil::dil {

enum class LossComponent { kCls, kAdv, kCon, kTotal };

std::string_view component_name(LossComponent c);

struct GroupCheck {
  LossComponent component = LossComponent::kTotal;
  ParamGroup group = ParamGroup::kEncoder;
  double analytic_norm = 0.0;
  double numeric_norm = 0.0;
  // ||analytic - numeric|| / max(||analytic||, ||numeric||); the absolute
  // difference when both norms are below 1e-10 (parameters the loss does
  // not touch).
  double relative_error = 0.0;
  double max_abs_error = 0.0;
};

// Checks every parameter of every group for one component. The GRL is
// removed (true derivative of L_adv).
std::vector<GroupCheck> check_gradients(const Model<double>& model, const Batch<double>& batch,
                                        const LossWeights& weights, LossComponent component, double epsilon = 1e-5);

struct GradcheckSuite {
  std::size_t batches = 20;
  std::size_t batch_size = 6;
  ModelDims dims{8, 6, 5, 4, 3, 2};
  LossWeights weights{1.0, 0.2, 0.2, 0.1};
  double epsilon = 1e-5;
  double tolerance = 1e-4;
  std::uint64_t seed = 7;
};

struct GradcheckOutcome {
  bool passed = true;
  double worst_relative_error = 0.0;
  std::vector<GroupCheck> checks;
};

// Random small batches with balanced labels and domains (so every batch has
// contrastive anchors), all four components.
GradcheckOutcome run_gradcheck_suite(const GradcheckSuite& suite);

// Batch of `size` random unit-ish inputs; labels and domains cycle so every
// class appears in at least two domains once size >= 4.
Batch<double> random_batch(const ModelDims& dims, std::size_t size, std::uint64_t seed);

}  // namespace mgdil::dil
