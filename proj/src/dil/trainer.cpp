#include "mgdil/dil/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mgdil/bench/metrics.hpp"

namespace mgdil::dil {

void TrainConfig::validate() const {
  if (!(weights.tau > 0.0)) throw ConfigError("tau must be positive");
  if (weights.cls < 0.0 || weights.adv < 0.0 || weights.con < 0.0 || grl_max < 0.0) {
    throw ConfigError("loss weights and the GRL bound must be non-negative");
  }
  if (!(validation_split > 0.0 && validation_split < 1.0)) throw ConfigError("validation_split must lie in (0, 1)");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (!(optimizer.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (dims.input == 0 || dims.hidden == 0 || dims.latent == 0 || dims.projection == 0 || dims.domains < 2) {
    throw ConfigError("model dimensions must be positive with at least two domains");
  }
}

nlohmann::json to_json(const TrainConfig& c) {
  return {
      {"dims",
       {{"input", c.dims.input},
        {"hidden", c.dims.hidden},
        {"latent", c.dims.latent},
        {"projection", c.dims.projection},
        {"domains", c.dims.domains},
        {"classes", c.dims.classes}}},
      {"lambda_grl_max", c.grl_max},
      {"lambda_cls", c.weights.cls},
      {"lambda_adv", c.weights.adv},
      {"lambda_con", c.weights.con},
      {"tau", c.weights.tau},
      {"batch_size", c.batch_size},
      {"epochs", c.epochs},
      {"learning_rate", c.optimizer.learning_rate},
      {"beta1", c.optimizer.beta1},
      {"beta2", c.optimizer.beta2},
      {"epsilon", c.optimizer.epsilon},
      {"weight_decay", c.optimizer.weight_decay},
      {"validation_split", c.validation_split},
      {"seeds", c.seeds},
      {"validation_mode", c.validation == ValidationMode::kSourceHeldOut ? "source" : "target"},
      {"precision", c.precision == Precision::kFloat32 ? "f32" : "f64"},
  };
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  if (j.contains("dims")) {
    const auto& d = j.at("dims");
    c.dims.input = d.value("input", c.dims.input);
    c.dims.hidden = d.value("hidden", c.dims.hidden);
    c.dims.latent = d.value("latent", c.dims.latent);
    c.dims.projection = d.value("projection", c.dims.projection);
    c.dims.domains = d.value("domains", c.dims.domains);
    c.dims.classes = d.value("classes", c.dims.classes);
  }
  c.grl_max = j.value("lambda_grl_max", c.grl_max);
  c.weights.cls = j.value("lambda_cls", c.weights.cls);
  c.weights.adv = j.value("lambda_adv", c.weights.adv);
  c.weights.con = j.value("lambda_con", c.weights.con);
  c.weights.tau = j.value("tau", c.weights.tau);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.optimizer.learning_rate = j.value("learning_rate", c.optimizer.learning_rate);
  c.optimizer.beta1 = j.value("beta1", c.optimizer.beta1);
  c.optimizer.beta2 = j.value("beta2", c.optimizer.beta2);
  c.optimizer.epsilon = j.value("epsilon", c.optimizer.epsilon);
  c.optimizer.weight_decay = j.value("weight_decay", c.optimizer.weight_decay);
  c.validation_split = j.value("validation_split", c.validation_split);
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  const std::string mode = j.value("validation_mode", std::string("source"));
  if (mode == "source") {
    c.validation = ValidationMode::kSourceHeldOut;
  } else if (mode == "target") {
    c.validation = ValidationMode::kTargetSplit;
  } else {
    throw ConfigError("validation_mode must be 'source' or 'target'");
  }
  const std::string precision = j.value("precision", std::string("f32"));
  if (precision == "f32") {
    c.precision = Precision::kFloat32;
  } else if (precision == "f64") {
    c.precision = Precision::kFloat64;
  } else {
    throw ConfigError("precision must be 'f32' or 'f64'");
  }
  return c;
}

void EncodedCorpus::add(std::string id, std::span<const double> values, int label, int domain) {
  if (dim == 0 && labels.empty()) dim = values.size();
  if (values.size() != dim) throw Error("corpus row has dimension " + std::to_string(values.size()) + ", expected " + std::to_string(dim));
  x.insert(x.end(), values.begin(), values.end());
  labels.push_back(label);
  domains.push_back(domain);
  ids.push_back(std::move(id));
}

EncodedCorpus EncodedCorpus::subset(std::span<const std::size_t> indices) const {
  EncodedCorpus out;
  out.dim = dim;
  for (std::size_t i : indices) out.add(ids[i], row(i), labels[i], domains[i]);
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> validation_split(std::size_t n, double fraction,
                                                                               std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (n >= 2) n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
  else n_val = 0;
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(val.begin(), val.end());
  std::sort(train.begin(), train.end());
  return {train, val};
}

template <typename Real>
Batch<Real> make_batch(const EncodedCorpus& corpus, std::span<const std::size_t> indices) {
  Batch<Real> batch;
  batch.size = indices.size();
  batch.x.reserve(indices.size() * corpus.dim);
  for (std::size_t i : indices) {
    for (double v : corpus.row(i)) batch.x.push_back(static_cast<Real>(v));
    batch.labels.push_back(corpus.labels[i]);
    batch.domains.push_back(corpus.domains[i]);
  }
  return batch;
}

template <typename Real>
Prediction infer(const Model<Real>& model, std::span<const double> x) {
  std::vector<Real> xr(x.begin(), x.end());
  const auto h = encode_latent<Real>(model, xr);
  std::vector<Real> logits(model.dims().classes);
  affine<Real>(model.matrix(Tensor::kClassWeight), model.vector(Tensor::kClassBias), h, logits);
  const auto probs = softmax<Real>(logits);
  Prediction p;
  double sum = 0.0;
  for (std::size_t k = 0; k < 2 && k < probs.size(); ++k) sum += static_cast<double>(probs[k]);
  for (std::size_t k = 0; k < 2 && k < probs.size(); ++k) p.probabilities[k] = static_cast<double>(probs[k]) / sum;
  p.label = p.probabilities[1] > p.probabilities[0] ? 1 : 0;
  return p;
}

template <typename Real>
std::vector<int> predict_labels(const Model<Real>& model, const EncodedCorpus& corpus) {
  std::vector<int> out(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) out[i] = infer(model, corpus.row(i)).label;
  return out;
}

template <typename Real>
std::vector<double> latents(const Model<Real>& model, const EncodedCorpus& corpus) {
  std::vector<double> out;
  out.reserve(corpus.size() * model.dims().latent);
  std::vector<Real> xr(corpus.dim);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto row = corpus.row(i);
    std::copy(row.begin(), row.end(), xr.begin());
    for (Real v : encode_latent<Real>(model, xr)) out.push_back(static_cast<double>(v));
  }
  return out;
}

template <typename Real>
TrainResult<Real> train(const EncodedCorpus& source, const TrainConfig& config, std::uint64_t seed,
                        const EncodedCorpus* target) {
  config.validate();
  if (source.dim != config.dims.input) {
    throw ConfigError("corpus dimension " + std::to_string(source.dim) + " does not match model input " +
                      std::to_string(config.dims.input));
  }
  if (source.size() == 0) throw Error("training corpus is empty");
  bool has[2] = {false, false};
  for (int y : source.labels) {
    if (y != 0 && y != 1) throw Error("training labels must be 0 or 1");
    has[y] = true;
  }
  if (!has[0] || !has[1]) throw Error("training corpus must contain both classes");
  for (int d : source.domains) {
    if (d == kNoDomain) throw Error("training records must carry domain labels");
    if (d < 0 || static_cast<std::size_t>(d) >= config.dims.domains) throw Error("domain label out of range");
  }

  std::vector<std::size_t> train_idx;
  EncodedCorpus validation;
  validation.dim = source.dim;
  if (config.validation == ValidationMode::kSourceHeldOut) {
    auto [tr, va] = validation_split(source.size(), config.validation_split, seed);
    train_idx = std::move(tr);
    validation = source.subset(va);
  } else {
    if (target == nullptr || target->size() == 0) throw ConfigError("target-split validation needs a target corpus");
    train_idx.resize(source.size());
    std::iota(train_idx.begin(), train_idx.end(), 0);
    auto [rest, va] = validation_split(target->size(), config.validation_split, seed);
    (void)rest;
    validation = target->subset(va);
  }

  TrainResult<Real> result{Model<Real>::initialized(config.dims, seed), {}, 0, -1.0};
  Model<Real>& model = result.model;
  Model<Real> best = model;
  AdamW<Real> optimizer(model.layout().total(), config.optimizer);
  std::mt19937_64 shuffle_rng(seed * 0x2545F4914F6CDD1DULL + 1);

  const std::size_t batches_per_epoch = (train_idx.size() + config.batch_size - 1) / config.batch_size;
  const std::size_t total_steps = batches_per_epoch * config.epochs;
  std::size_t step = 0;
  ComponentGradients<Real> parts;
  std::vector<Real> grad(model.layout().total());

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), shuffle_rng);
    EpochRecord record;
    record.epoch = epoch;
    for (std::size_t b = 0; b < batches_per_epoch; ++b) {
      const std::size_t begin = b * config.batch_size;
      const std::size_t end = std::min(begin + config.batch_size, train_idx.size());
      const auto batch = make_batch<Real>(source, std::span<const std::size_t>(train_idx).subspan(begin, end - begin));
      const double progress = static_cast<double>(step) / static_cast<double>(total_steps);
      const double lambda = grl_schedule(progress, config.grl_max);
      const LossTerms terms = compute_losses(model, batch, config.weights, lambda, &parts);
      if (!std::isfinite(terms.total)) {
        throw TrainError("non-finite loss at epoch " + std::to_string(epoch) + " batch " + std::to_string(b) +
                         " (cls=" + std::to_string(terms.cls) + ", adv=" + std::to_string(terms.adv) +
                         ", con=" + std::to_string(terms.con) + ")");
      }
      combine_gradients<Real>(parts, config.weights, grad);
      optimizer.step(model.params(), grad);
      if (!model.all_finite()) {
        throw TrainError("non-finite parameters after epoch " + std::to_string(epoch) + " batch " + std::to_string(b));
      }
      record.cls += terms.cls;
      record.adv += terms.adv;
      record.con += terms.con;
      record.total += terms.total;
      if (terms.anchors == 0) ++record.empty_anchor_batches;
      record.grl_lambda = lambda;
      ++step;
    }
    const double nb = static_cast<double>(batches_per_epoch);
    record.cls /= nb;
    record.adv /= nb;
    record.con /= nb;
    record.total /= nb;
    if (validation.size() > 0) {
      const auto pred = predict_labels(model, validation);
      const auto report = bench::metrics(validation.labels, pred);
      record.val_accuracy = report.accuracy;
      record.val_macro_f1 = report.macro_f1;
    }
    if (record.val_accuracy > result.best_val_accuracy) {
      result.best_val_accuracy = record.val_accuracy;
      result.best_epoch = epoch;
      best = model;
    }
    result.history.push_back(record);
  }
  result.model = std::move(best);
  return result;
}

#define MGDIL_INSTANTIATE_TRAINER(Real)                                                                        \
  template Batch<Real> make_batch(const EncodedCorpus&, std::span<const std::size_t>);                         \
  template Prediction infer(const Model<Real>&, std::span<const double>);                                      \
  template std::vector<int> predict_labels(const Model<Real>&, const EncodedCorpus&);                          \
  template std::vector<double> latents(const Model<Real>&, const EncodedCorpus&);                              \
  template TrainResult<Real> train(const EncodedCorpus&, const TrainConfig&, std::uint64_t, const EncodedCorpus*);

MGDIL_INSTANTIATE_TRAINER(float)
MGDIL_INSTANTIATE_TRAINER(double)

#undef MGDIL_INSTANTIATE_TRAINER

}  // namespace mgdil::dil
