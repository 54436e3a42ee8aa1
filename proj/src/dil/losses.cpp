#include "mgdil/dil/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mgdil/util/error.hpp"

namespace mgdil::dil {

namespace {

template <typename Real>
std::span<const Real> row_of(const std::vector<Real>& buf, std::size_t i, std::size_t cols) {
  return std::span<const Real>(buf).subspan(i * cols, cols);
}

template <typename Real>
std::span<Real> row_of(std::vector<Real>& buf, std::size_t i, std::size_t cols) {
  return std::span<Real>(buf).subspan(i * cols, cols);
}

// Backprop through a linear head: accumulates weight/bias gradients into
// `grad` and adds W^T dlogits to `dlatent`.
template <typename Real>
void head_backward(const Model<Real>& model, Tensor weight, Tensor bias, const Activations<Real>& acts,
                   const std::vector<Real>& dlogits, std::span<Real> grad, std::vector<Real>& dlatent) {
  const auto& layout = model.layout();
  const auto w = model.matrix(weight);
  auto gw = layout.matrix(grad, weight);
  auto gb = layout.vector(grad, bias);
  const std::size_t d = model.dims().latent;
  for (std::size_t i = 0; i < acts.size; ++i) {
    const auto g = row_of(dlogits, i, w.rows);
    accumulate_outer<Real>(g, row_of(acts.latent, i, d), gw);
    accumulate<Real>(g, gb);
    accumulate_transposed<Real>(w, g, row_of(dlatent, i, d));
  }
}

// Backprop dL/dh through the encoder MLP into `grad`.
template <typename Real>
void encoder_backward(const Model<Real>& model, const Batch<Real>& batch, const Activations<Real>& acts,
                      const std::vector<Real>& dlatent, std::span<Real> grad) {
  const auto& dims = model.dims();
  const auto& layout = model.layout();
  const auto w2 = model.matrix(Tensor::kLatentWeight);
  auto gw1 = layout.matrix(grad, Tensor::kHiddenWeight);
  auto gb1 = layout.vector(grad, Tensor::kHiddenBias);
  auto gw2 = layout.matrix(grad, Tensor::kLatentWeight);
  auto gb2 = layout.vector(grad, Tensor::kLatentBias);
  std::vector<Real> hidden(dims.hidden);
  std::vector<Real> dhidden(dims.hidden);
  for (std::size_t i = 0; i < acts.size; ++i) {
    const auto pre = row_of(acts.hidden_pre, i, dims.hidden);
    for (std::size_t k = 0; k < dims.hidden; ++k) hidden[k] = pre[k] > Real(0) ? pre[k] : Real(0);
    const auto dh = row_of(dlatent, i, dims.latent);
    accumulate_outer<Real>(dh, hidden, gw2);
    accumulate<Real>(dh, gb2);
    std::fill(dhidden.begin(), dhidden.end(), Real(0));
    accumulate_transposed<Real>(w2, dh, dhidden);
    for (std::size_t k = 0; k < dims.hidden; ++k) {
      if (!(pre[k] > Real(0))) dhidden[k] = Real(0);
    }
    accumulate_outer<Real>(dhidden, std::span<const Real>(batch.x).subspan(i * dims.input, dims.input), gw1);
    accumulate<Real>(dhidden, gb1);
  }
}

void require_domains(std::span<const int> domains) {
  for (std::size_t i = 0; i < domains.size(); ++i) {
    if (domains[i] == kNoDomain) {
      throw Error("sample " + std::to_string(i) + " has no domain label; adversarial batches require domain labels");
    }
  }
}

}  // namespace

template <typename Real>
Activations<Real> forward(const Model<Real>& model, const Batch<Real>& batch) {
  const auto& dims = model.dims();
  if (batch.x.size() != batch.size * dims.input) throw Error("batch input width does not match the model");
  Activations<Real> acts;
  acts.size = batch.size;
  acts.hidden_pre.resize(batch.size * dims.hidden);
  acts.latent.resize(batch.size * dims.latent);
  acts.domain_logits.resize(batch.size * dims.domains);
  acts.projection.resize(batch.size * dims.projection);
  acts.class_logits.resize(batch.size * dims.classes);
  std::vector<Real> hidden(dims.hidden);
  for (std::size_t i = 0; i < batch.size; ++i) {
    const auto x = std::span<const Real>(batch.x).subspan(i * dims.input, dims.input);
    auto pre = row_of(acts.hidden_pre, i, dims.hidden);
    affine<Real>(model.matrix(Tensor::kHiddenWeight), model.vector(Tensor::kHiddenBias), x, pre);
    for (std::size_t k = 0; k < dims.hidden; ++k) hidden[k] = pre[k] > Real(0) ? pre[k] : Real(0);
    auto h = row_of(acts.latent, i, dims.latent);
    affine<Real>(model.matrix(Tensor::kLatentWeight), model.vector(Tensor::kLatentBias), hidden, h);
    const std::span<const Real> hc = h;
    affine<Real>(model.matrix(Tensor::kDomainWeight), model.vector(Tensor::kDomainBias), hc,
                 row_of(acts.domain_logits, i, dims.domains));
    affine<Real>(model.matrix(Tensor::kProjectionWeight), model.vector(Tensor::kProjectionBias), hc,
                 row_of(acts.projection, i, dims.projection));
    affine<Real>(model.matrix(Tensor::kClassWeight), model.vector(Tensor::kClassBias), hc,
                 row_of(acts.class_logits, i, dims.classes));
  }
  return acts;
}

template <typename Real>
std::vector<Real> encode_latent(const Model<Real>& model, std::span<const Real> x) {
  const auto& dims = model.dims();
  if (x.size() != dims.input) throw Error("input width does not match the model");
  std::vector<Real> hidden(dims.hidden);
  affine<Real>(model.matrix(Tensor::kHiddenWeight), model.vector(Tensor::kHiddenBias), x, hidden);
  for (Real& v : hidden) v = v > Real(0) ? v : Real(0);
  std::vector<Real> h(dims.latent);
  affine<Real>(model.matrix(Tensor::kLatentWeight), model.vector(Tensor::kLatentBias), hidden, h);
  return h;
}

template <typename Real>
std::vector<Real> grl_forward(std::span<const Real> h) {
  return {h.begin(), h.end()};
}

template <typename Real>
std::vector<Real> grl_backward(std::span<const Real> upstream, double lambda) {
  const Real scale = static_cast<Real>(-lambda);
  std::vector<Real> out(upstream.size());
  for (std::size_t i = 0; i < upstream.size(); ++i) out[i] = scale * upstream[i];
  return out;
}

double grl_schedule(double progress, double lambda_max) {
  if (progress < 0.0 || progress > 1.0) throw Error("GRL progress must lie in [0, 1]");
  return lambda_max * progress;
}

template <typename Real>
std::vector<Real> softmax(std::span<const Real> logits) {
  std::vector<Real> out(logits.size());
  if (logits.empty()) return out;
  const double m = static_cast<double>(*std::max_element(logits.begin(), logits.end()));
  double z = 0.0;
  for (Real v : logits) z += std::exp(static_cast<double>(v) - m);
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = static_cast<Real>(std::exp(static_cast<double>(logits[k]) - m) / z);
  }
  return out;
}

template <typename Real>
std::vector<Real> project_unit(std::span<const Real> projection) {
  double sq = 0.0;
  for (Real v : projection) sq += static_cast<double>(v) * static_cast<double>(v);
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0)) throw Error("degenerate projection: zero-norm contrastive projection");
  std::vector<Real> u(projection.size());
  for (std::size_t k = 0; k < projection.size(); ++k) u[k] = static_cast<Real>(static_cast<double>(projection[k]) / norm);
  return u;
}

ContrastiveSets contrastive_sets(std::span<const int> labels, std::span<const int> domains) {
  if (labels.size() != domains.size()) throw Error("labels and domains differ in length");
  require_domains(domains);
  const std::size_t n = labels.size();
  ContrastiveSets sets;
  sets.positives.resize(n);
  sets.negatives.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (labels[j] == labels[i]) {
        if (domains[j] != domains[i]) sets.positives[i].push_back(j);
      } else {
        sets.negatives[i].push_back(j);
      }
    }
    if (!sets.positives[i].empty()) sets.anchors.push_back(i);
  }
  return sets;
}

template <typename Real>
double cross_entropy(std::span<const Real> logits, std::size_t classes, std::span<const int> targets,
                     std::vector<Real>* dlogits) {
  const std::size_t n = targets.size();
  if (logits.size() != n * classes) throw Error("logit matrix does not match target count");
  if (dlogits) dlogits->assign(logits.size(), Real(0));
  if (n == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int t = targets[i];
    if (t < 0 || static_cast<std::size_t>(t) >= classes) throw Error("target index out of range");
    const auto row = logits.subspan(i * classes, classes);
    const double m = static_cast<double>(*std::max_element(row.begin(), row.end()));
    double z = 0.0;
    for (Real v : row) z += std::exp(static_cast<double>(v) - m);
    const double log_z = m + std::log(z);
    total += log_z - static_cast<double>(row[t]);
    if (dlogits) {
      for (std::size_t k = 0; k < classes; ++k) {
        const double p = std::exp(static_cast<double>(row[k]) - log_z);
        (*dlogits)[i * classes + k] = static_cast<Real>((p - (static_cast<int>(k) == t ? 1.0 : 0.0)) / static_cast<double>(n));
      }
    }
  }
  return total / static_cast<double>(n);
}

template <typename Real>
double contrastive_loss(std::span<const Real> projection, std::size_t dim, std::span<const int> labels,
                        std::span<const int> domains, double tau, std::vector<Real>* dprojection,
                        std::size_t* anchor_count) {
  if (!(tau > 0.0)) throw Error("contrastive temperature must be positive");
  const std::size_t n = labels.size();
  if (projection.size() != n * dim) throw Error("projection matrix does not match label count");
  const ContrastiveSets sets = contrastive_sets(labels, domains);
  if (dprojection) dprojection->assign(projection.size(), Real(0));
  if (anchor_count) *anchor_count = sets.anchors.size();
  if (sets.anchors.empty()) return 0.0;

  std::vector<double> u(n * dim);
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (std::size_t k = 0; k < dim; ++k) sq += static_cast<double>(projection[i * dim + k]) * projection[i * dim + k];
    norms[i] = std::sqrt(sq);
    if (!(norms[i] > 0.0)) throw Error("degenerate projection: zero-norm contrastive projection");
    for (std::size_t k = 0; k < dim; ++k) u[i * dim + k] = projection[i * dim + k] / norms[i];
  }
  auto sim = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t k = 0; k < dim; ++k) s += u[a * dim + k] * u[b * dim + k];
    return s / tau;
  };

  const double inv_anchors = 1.0 / static_cast<double>(sets.anchors.size());
  std::vector<double> du(dprojection ? n * dim : 0, 0.0);
  std::vector<char> is_positive(n, 0);
  std::vector<std::size_t> candidates;
  std::vector<double> scores;
  double total = 0.0;
  for (std::size_t i : sets.anchors) {
    const auto& pos = sets.positives[i];
    std::fill(is_positive.begin(), is_positive.end(), 0);
    for (std::size_t p : pos) is_positive[p] = 1;
    candidates.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && (is_positive[j] || labels[j] != labels[i])) candidates.push_back(j);
    }
    scores.resize(candidates.size());
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      scores[c] = sim(i, candidates[c]);
      m = std::max(m, scores[c]);
    }
    double z = 0.0;
    for (double s : scores) z += std::exp(s - m);
    const double lse = m + std::log(z);
    double pos_sum = 0.0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (is_positive[candidates[c]]) pos_sum += scores[c];
    }
    const double inv_pos = 1.0 / static_cast<double>(pos.size());
    total += lse - pos_sum * inv_pos;
    if (!dprojection) continue;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const std::size_t a = candidates[c];
      const double q = std::exp(scores[c] - lse);
      const double coeff = (q - (is_positive[a] ? inv_pos : 0.0)) * inv_anchors / tau;
      for (std::size_t k = 0; k < dim; ++k) {
        du[i * dim + k] += coeff * u[a * dim + k];
        du[a * dim + k] += coeff * u[i * dim + k];
      }
    }
  }
  if (dprojection) {
    for (std::size_t i = 0; i < n; ++i) {
      double radial = 0.0;
      for (std::size_t k = 0; k < dim; ++k) radial += u[i * dim + k] * du[i * dim + k];
      for (std::size_t k = 0; k < dim; ++k) {
        (*dprojection)[i * dim + k] = static_cast<Real>((du[i * dim + k] - u[i * dim + k] * radial) / norms[i]);
      }
    }
  }
  return total * inv_anchors;
}

template <typename Real>
LossTerms compute_losses(const Model<Real>& model, const Batch<Real>& batch, const LossWeights& weights,
                         std::optional<double> grl_lambda, ComponentGradients<Real>* grads) {
  const auto& dims = model.dims();
  if (batch.labels.size() != batch.size || batch.domains.size() != batch.size) {
    throw Error("batch labels/domains do not match batch size");
  }
  require_domains(batch.domains);
  const Activations<Real> acts = forward(model, batch);

  std::vector<Real> dcls, dadv, dcon;
  LossTerms terms;
  terms.cls = cross_entropy<Real>(acts.class_logits, dims.classes, batch.labels, grads ? &dcls : nullptr);
  terms.adv = cross_entropy<Real>(acts.domain_logits, dims.domains, batch.domains, grads ? &dadv : nullptr);
  terms.con = contrastive_loss<Real>(acts.projection, dims.projection, batch.labels, batch.domains, weights.tau,
                                     grads ? &dcon : nullptr, &terms.anchors);
  terms.total = weights.cls * terms.cls + weights.adv * terms.adv + weights.con * terms.con;
  if (!grads) return terms;

  const std::size_t total = model.layout().total();
  grads->cls.assign(total, Real(0));
  grads->adv.assign(total, Real(0));
  grads->con.assign(total, Real(0));
  std::vector<Real> dlatent;

  dlatent.assign(batch.size * dims.latent, Real(0));
  head_backward(model, Tensor::kClassWeight, Tensor::kClassBias, acts, dcls, std::span<Real>(grads->cls), dlatent);
  encoder_backward(model, batch, acts, dlatent, std::span<Real>(grads->cls));

  dlatent.assign(batch.size * dims.latent, Real(0));
  head_backward(model, Tensor::kDomainWeight, Tensor::kDomainBias, acts, dadv, std::span<Real>(grads->adv), dlatent);
  if (grl_lambda) {
    for (std::size_t i = 0; i < batch.size; ++i) {
      auto row = row_of(dlatent, i, dims.latent);
      const auto reversed = grl_backward<Real>(row, *grl_lambda);
      std::copy(reversed.begin(), reversed.end(), row.begin());
    }
  }
  encoder_backward(model, batch, acts, dlatent, std::span<Real>(grads->adv));

  dlatent.assign(batch.size * dims.latent, Real(0));
  head_backward(model, Tensor::kProjectionWeight, Tensor::kProjectionBias, acts, dcon, std::span<Real>(grads->con),
                dlatent);
  encoder_backward(model, batch, acts, dlatent, std::span<Real>(grads->con));
  return terms;
}

template <typename Real>
void combine_gradients(const ComponentGradients<Real>& grads, const LossWeights& weights, std::span<Real> out) {
  const Real wc = static_cast<Real>(weights.cls);
  const Real wa = static_cast<Real>(weights.adv);
  const Real wn = static_cast<Real>(weights.con);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = wc * grads.cls[k] + wa * grads.adv[k] + wn * grads.con[k];
  }
}

template <typename Real>
LossTerms total_loss(const Model<Real>& model, const Batch<Real>& batch, const LossWeights& weights,
                     std::optional<double> grl_lambda, std::vector<Real>* grad) {
  if (!grad) return compute_losses<Real>(model, batch, weights, grl_lambda, nullptr);
  ComponentGradients<Real> parts;
  const LossTerms terms = compute_losses(model, batch, weights, grl_lambda, &parts);
  grad->assign(model.layout().total(), Real(0));
  combine_gradients<Real>(parts, weights, *grad);
  return terms;
}

#define MGDIL_INSTANTIATE_LOSSES(Real)                                                                           \
  template Activations<Real> forward(const Model<Real>&, const Batch<Real>&);                                    \
  template std::vector<Real> encode_latent(const Model<Real>&, std::span<const Real>);                           \
  template std::vector<Real> grl_forward(std::span<const Real>);                                                 \
  template std::vector<Real> grl_backward(std::span<const Real>, double);                                        \
  template std::vector<Real> softmax(std::span<const Real>);                                                     \
  template std::vector<Real> project_unit(std::span<const Real>);                                                \
  template double cross_entropy(std::span<const Real>, std::size_t, std::span<const int>, std::vector<Real>*);   \
  template double contrastive_loss(std::span<const Real>, std::size_t, std::span<const int>, std::span<const int>, \
                                   double, std::vector<Real>*, std::size_t*);                                    \
  template LossTerms compute_losses(const Model<Real>&, const Batch<Real>&, const LossWeights&,                 \
                                    std::optional<double>, ComponentGradients<Real>*);                           \
  template void combine_gradients(const ComponentGradients<Real>&, const LossWeights&, std::span<Real>);         \
  template LossTerms total_loss(const Model<Real>&, const Batch<Real>&, const LossWeights&, std::optional<double>, \
                                std::vector<Real>*);

MGDIL_INSTANTIATE_LOSSES(float)
MGDIL_INSTANTIATE_LOSSES(double)

#undef MGDIL_INSTANTIATE_LOSSES

}  // namespace mgdil::dil
