#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mgdil/dil/losses.hpp"
#include "mgdil/dil/model.hpp"
#include "mgdil/dil/optimizer.hpp"
#include "mgdil/util/error.hpp"

namespace mgdil::dil {

enum class Precision { kFloat32, kFloat64 };

// Where per-epoch model selection draws its validation samples from.
enum class ValidationMode {
  kSourceHeldOut,  // a seeded fraction of the training corpus
  kTargetSplit,    // a seeded fraction of the target corpus
};

struct TrainConfig {
  ModelDims dims;
  double grl_max = 1.0;
  LossWeights weights;
  std::size_t batch_size = 8;
  std::size_t epochs = 5;
  AdamWConfig optimizer;
  double validation_split = 0.2;
  std::vector<std::uint64_t> seeds = {42, 43, 44, 45, 46};
  ValidationMode validation = ValidationMode::kSourceHeldOut;
  Precision precision = Precision::kFloat32;

  // Throws ConfigError on tau <= 0, negative weights, split outside (0,1),
  // zero batch size or epochs.
  void validate() const;
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

// Dense inputs with labels, optionally domain-labelled.
struct EncodedCorpus {
  std::size_t dim = 0;
  std::vector<double> x;  // size() x dim
  std::vector<int> labels;
  std::vector<int> domains;  // kNoDomain when unlabeled
  std::vector<std::string> ids;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const { return std::span<const double>(x).subspan(i * dim, dim); }
  void add(std::string id, std::span<const double> values, int label, int domain);
  EncodedCorpus subset(std::span<const std::size_t> indices) const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double cls = 0.0;       // means over the epoch's batches
  double adv = 0.0;
  double con = 0.0;
  double total = 0.0;
  double val_accuracy = 0.0;
  double val_macro_f1 = 0.0;
  double grl_lambda = 0.0;  // reversal coefficient at the epoch's last step
  std::size_t empty_anchor_batches = 0;
};

template <typename Real>
struct TrainResult {
  Model<Real> model;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_accuracy = 0.0;
};

class TrainError : public Error {
 public:
  using Error::Error;
};

// Splits `n` indices into (train, validation) with a seeded shuffle.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> validation_split(std::size_t n, double fraction,
                                                                               std::uint64_t seed);

// Mini-batch joint optimization. Progress p = completed_steps / total_steps
// drives the GRL schedule; the state with the best validation accuracy
// (earliest on ties) is returned. Deterministic for a fixed seed.
template <typename Real>
TrainResult<Real> train(const EncodedCorpus& source, const TrainConfig& config, std::uint64_t seed,
                        const EncodedCorpus* target = nullptr);

struct Prediction {
  int label = 0;
  std::array<double, 2> probabilities{};
};

template <typename Real>
Prediction infer(const Model<Real>& model, std::span<const double> x);

template <typename Real>
std::vector<int> predict_labels(const Model<Real>& model, const EncodedCorpus& corpus);

// Latent representations h, size() x latent.
template <typename Real>
std::vector<double> latents(const Model<Real>& model, const EncodedCorpus& corpus);

template <typename Real>
Batch<Real> make_batch(const EncodedCorpus& corpus, std::span<const std::size_t> indices);

}  // namespace mgdil::dil
