#pragma once

// Relation-aware message passing over a user graph whose node features are
// frozen latents from the domain-invariant learner.
//
//   m_v      = sum_r agg_{u in N_r(v)} W_r h_u        (agg = mean or sum)
//   h_v'     = relu(W_self h_v + m_v)                 (+ h_v with residual)
//   p(y | v) = softmax(W_c z_v + b_c),  z_v = h_v after L layers
//
// N_r(v) holds the sources of edges (u, r, v): messages follow the stored
// edge direction. Duplicate edges count once per occurrence.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mgdil/dil/linalg.hpp"
#include "mgdil/dil/optimizer.hpp"
#include "mgdil/ingest/record.hpp"

namespace mgdil::graph {

struct Edge {
  std::size_t src = 0;
  std::size_t relation = 0;
  std::size_t dst = 0;
  bool operator==(const Edge&) const = default;
};

struct RelationGraph {
  std::vector<std::string> nodes;
  std::size_t dim = 0;
  std::vector<double> features;  // nodes.size() x dim
  std::vector<std::string> relation_types;  // sorted
  std::vector<Edge> edges;

  std::size_t size() const { return nodes.size(); }
  std::span<const double> feature(std::size_t v) const {
    return std::span<const double>(features).subspan(v * dim, dim);
  }
  // Throws Error when an endpoint, relation index or feature shape is off.
  void validate() const;
};

// An edge as read from a file: endpoints and relation by name.
struct EdgeSpec {
  std::string src;
  std::string relation;
  std::string dst;
  bool operator==(const EdgeSpec&) const = default;
};

struct BuildOptions {
  bool add_reverse = false;  // mirror every edge under "rev_<relation>"
};

struct BuildStats {
  std::size_t edges = 0;
  std::size_t dropped = 0;  // endpoint not among the nodes
};

// `features` is ids.size() x dim. Duplicate ids throw Error.
RelationGraph build_graph(const std::vector<std::string>& ids, std::span<const double> features, std::size_t dim,
                          const std::vector<EdgeSpec>& edges, const BuildOptions& options = {},
                          BuildStats* stats = nullptr);

// Edges taken from each record's relation list, src = the record's user.
RelationGraph graph_from_records(const std::vector<ingest::UserRecord>& records, std::span<const double> features,
                                 std::size_t dim, const BuildOptions& options = {}, BuildStats* stats = nullptr);

std::vector<EdgeSpec> edges_from_records(const std::vector<ingest::UserRecord>& records);

// Header "src,relation,dst". Malformed rows throw ParseError.
std::vector<EdgeSpec> read_edge_list(const std::filesystem::path& path);
void write_edge_list(const std::filesystem::path& path, const std::vector<EdgeSpec>& edges);

enum class Aggregation { kMean, kSum };

struct GnnConfig {
  std::size_t layers = 2;
  Aggregation aggregation = Aggregation::kMean;
  bool residual = false;
};

nlohmann::json to_json(const GnnConfig& c);
GnnConfig gnn_config_from_json(const nlohmann::json& j);

class GnnParams {
 public:
  GnnParams() = default;
  GnnParams(std::size_t dim, std::size_t relations, std::size_t layers);

  // Weights from U(-1/sqrt(d), 1/sqrt(d)); classifier bias zero.
  static GnnParams initialized(std::size_t dim, std::size_t relations, std::size_t layers, std::uint64_t seed);

  std::size_t dim() const { return dim_; }
  std::size_t relations() const { return relations_; }
  std::size_t layers() const { return layers_; }

  dil::MatrixView<double> relation_weight(std::size_t layer, std::size_t r);
  dil::MatrixView<const double> relation_weight(std::size_t layer, std::size_t r) const;
  dil::MatrixView<double> self_weight(std::size_t layer);
  dil::MatrixView<const double> self_weight(std::size_t layer) const;
  dil::MatrixView<double> classifier_weight();  // 2 x dim
  dil::MatrixView<const double> classifier_weight() const;
  std::span<double> classifier_bias();
  std::span<const double> classifier_bias() const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::size_t size() const { return data_.size(); }

  bool operator==(const GnnParams&) const = default;

 private:
  std::size_t offset_relation(std::size_t layer, std::size_t r) const;
  std::size_t offset_self(std::size_t layer) const;
  std::size_t offset_classifier() const;

  std::size_t dim_ = 0;
  std::size_t relations_ = 0;
  std::size_t layers_ = 0;
  std::vector<double> data_;
};

// Node states z (size() x dim) after params.layers() rounds. With zero
// layers z equals the input features.
std::vector<double> message_pass(const RelationGraph& graph, const GnnParams& params,
                                 Aggregation aggregation = Aggregation::kMean, bool residual = false);

// Row-wise softmax of W_c z + b_c, size() x 2.
std::vector<double> graph_classify(std::span<const double> z, const GnnParams& params);

// Mean cross-entropy over nodes with labels[v] >= 0. When `grad` is non-null
// it receives dL/dparams in the layout of params.data(). No labeled node
// gives 0.
double graph_loss(const RelationGraph& graph, std::span<const int> labels, const GnnParams& params,
                  const GnnConfig& config, std::vector<double>* grad = nullptr);

struct GnnTrainConfig {
  GnnConfig model;
  std::size_t epochs = 200;
  dil::AdamWConfig optimizer{.learning_rate = 1e-2, .weight_decay = 5e-4};
};

struct GnnEpoch {
  std::size_t epoch = 0;
  double loss = 0.0;
  double val_accuracy = 0.0;
};

struct GnnTrainResult {
  GnnParams params;
  std::vector<GnnEpoch> history;
  std::size_t best_epoch = 0;
  double best_val_accuracy = 0.0;
};

// Full-batch training on the nodes in `train`; keeps the state with the best
// accuracy on `validation` (earliest on ties, final state when empty).
GnnTrainResult train_gnn(const RelationGraph& graph, std::span<const int> labels,
                         std::span<const std::size_t> train, std::span<const std::size_t> validation,
                         const GnnTrainConfig& config, std::uint64_t seed);

std::vector<int> predict(const RelationGraph& graph, const GnnParams& params, const GnnConfig& config);

void save_gnn(const std::filesystem::path& path, const GnnParams& params, const GnnConfig& config,
              const std::vector<std::string>& relation_types);
struct LoadedGnn {
  GnnParams params;
  GnnConfig config;
  std::vector<std::string> relation_types;
};
LoadedGnn load_gnn(const std::filesystem::path& path);

}  // namespace mgdil::graph
