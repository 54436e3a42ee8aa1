#pragma once

// Forward pass, the three training objectives and their analytic gradients.
//
//   L = w_cls * L_cls + w_adv * L_adv + w_con * L_con
//
// L_cls : mean cross-entropy of the classifier.
// L_adv : mean cross-entropy of the domain head, evaluated on GRL(h). The
//         GRL is the identity forward and multiplies the gradient entering
//         h by -lambda backward, so the encoder ascends L_adv while the
//         domain head descends it.
// L_con : cross-domain supervised contrastive loss over the anchors that
//         have at least one same-class, other-domain positive in the batch.
//
// Gradients are produced per component and summed at parameter level in a
// fixed order (cls, adv, con), so rescaling one component is exact when the
// scale is a power of two.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mgdil/dil/model.hpp"

namespace mgdil::dil {

inline constexpr int kNoDomain = -1;

template <typename Real>
struct Batch {
  std::size_t size = 0;
  std::vector<Real> x;       // size x input, row-major
  std::vector<int> labels;   // 0 = human, 1 = bot
  std::vector<int> domains;  // kNoDomain when unlabeled
};

template <typename Real>
struct Activations {
  std::size_t size = 0;
  std::vector<Real> hidden_pre;     // size x hidden, before ReLU
  std::vector<Real> latent;         // size x latent (h)
  std::vector<Real> domain_logits;  // size x domains
  std::vector<Real> projection;     // size x projection, g(h) before normalization
  std::vector<Real> class_logits;   // size x classes
};

template <typename Real>
Activations<Real> forward(const Model<Real>& model, const Batch<Real>& batch);

// Latent h = f(x) for a single input.
template <typename Real>
std::vector<Real> encode_latent(const Model<Real>& model, std::span<const Real> x);

// Gradient reversal layer.
template <typename Real>
std::vector<Real> grl_forward(std::span<const Real> h);
template <typename Real>
std::vector<Real> grl_backward(std::span<const Real> upstream, double lambda);

// Reversal coefficient ramped linearly from 0 to `lambda_max` over training.
double grl_schedule(double progress, double lambda_max);

// Numerically stable softmax of one logit row.
template <typename Real>
std::vector<Real> softmax(std::span<const Real> logits);

// u = g / |g|. Throws mgdil::Error("degenerate projection") on a zero vector.
template <typename Real>
std::vector<Real> project_unit(std::span<const Real> projection);

struct ContrastiveSets {
  std::vector<std::vector<std::size_t>> positives;  // P(i): same class, other domain
  std::vector<std::vector<std::size_t>> negatives;  // N(i): other class
  std::vector<std::size_t> anchors;                 // i with non-empty P(i)
};

// Throws mgdil::Error when a sample has no domain label.
ContrastiveSets contrastive_sets(std::span<const int> labels, std::span<const int> domains);

// Mean cross-entropy over rows of `logits` (size x classes). When `dlogits`
// is non-null it receives dL/dlogits.
template <typename Real>
double cross_entropy(std::span<const Real> logits, std::size_t classes, std::span<const int> targets,
                     std::vector<Real>* dlogits);

// Contrastive loss on raw projections (size x dim). Returns 0 with a zero
// gradient when no anchor exists.
template <typename Real>
double contrastive_loss(std::span<const Real> projection, std::size_t dim, std::span<const int> labels,
                        std::span<const int> domains, double tau, std::vector<Real>* dprojection,
                        std::size_t* anchor_count = nullptr);

struct LossWeights {
  double cls = 1.0;
  double adv = 0.2;
  double con = 0.2;
  double tau = 0.1;
};

struct LossTerms {
  double cls = 0.0;
  double adv = 0.0;
  double con = 0.0;
  double total = 0.0;
  std::size_t anchors = 0;
};

template <typename Real>
struct ComponentGradients {
  std::vector<Real> cls;
  std::vector<Real> adv;
  std::vector<Real> con;
};

// Evaluates every component on a batch. With `grl_lambda` set, the domain
// gradient reaching the encoder passes through the reversal layer; with
// nullopt the GRL is absent and `grads->adv` is the plain derivative of
// L_adv (used for finite-difference checks).
template <typename Real>
LossTerms compute_losses(const Model<Real>& model, const Batch<Real>& batch, const LossWeights& weights,
                         std::optional<double> grl_lambda, ComponentGradients<Real>* grads);

// out = w_cls * cls + w_adv * adv + w_con * con, element-wise in that order.
template <typename Real>
void combine_gradients(const ComponentGradients<Real>& grads, const LossWeights& weights, std::span<Real> out);

// compute_losses followed by combine_gradients.
template <typename Real>
LossTerms total_loss(const Model<Real>& model, const Batch<Real>& batch, const LossWeights& weights,
                     std::optional<double> grl_lambda, std::vector<Real>* grad);

}  // namespace mgdil::dil
