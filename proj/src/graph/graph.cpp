#include "mgdil/graph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <unordered_map>

#include "mgdil/bench/metrics.hpp"
#include "mgdil/dil/losses.hpp"
#include "mgdil/util/csv.hpp"
#include "mgdil/util/error.hpp"
#include "mgdil/util/jsonl.hpp"
#include "mgdil/util/log.hpp"

namespace mgdil::graph {

void RelationGraph::validate() const {
  if (features.size() != nodes.size() * dim) throw Error("graph features do not match nodes x dim");
  if (!std::is_sorted(relation_types.begin(), relation_types.end())) throw Error("relation types not sorted");
  for (const auto& e : edges) {
    if (e.src >= nodes.size() || e.dst >= nodes.size()) throw Error("graph edge endpoint out of range");
    if (e.relation >= relation_types.size()) throw Error("graph edge relation out of range");
  }
}

RelationGraph build_graph(const std::vector<std::string>& ids, std::span<const double> features, std::size_t dim,
                          const std::vector<EdgeSpec>& edges, const BuildOptions& options, BuildStats* stats) {
  if (features.size() != ids.size() * dim) throw Error("node features must be ids x dim");
  RelationGraph g;
  g.nodes = ids;
  g.dim = dim;
  g.features.assign(features.begin(), features.end());

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!index.emplace(ids[i], i).second) throw Error("duplicate graph node '" + ids[i] + "'");
  }

  std::vector<EdgeSpec> kept;
  std::size_t dropped = 0;
  for (const auto& e : edges) {
    if (index.count(e.src) == 0 || index.count(e.dst) == 0) {
      ++dropped;
      continue;
    }
    kept.push_back(e);
    if (options.add_reverse) kept.push_back({e.dst, "rev_" + e.relation, e.src});
  }
  if (dropped > 0) log::warn("graph.dropped_edges", {{"count", dropped}});

  std::set<std::string> types;
  for (const auto& e : kept) types.insert(e.relation);
  g.relation_types.assign(types.begin(), types.end());
  std::map<std::string, std::size_t> rel_index;
  for (std::size_t r = 0; r < g.relation_types.size(); ++r) rel_index[g.relation_types[r]] = r;

  g.edges.reserve(kept.size());
  for (const auto& e : kept) g.edges.push_back({index.at(e.src), rel_index.at(e.relation), index.at(e.dst)});
  if (stats != nullptr) *stats = {g.edges.size(), dropped};
  return g;
}

std::vector<EdgeSpec> edges_from_records(const std::vector<ingest::UserRecord>& records) {
  std::vector<EdgeSpec> out;
  for (const auto& r : records) {
    for (const auto& rel : r.relations) out.push_back({r.user_id, rel.type, rel.target});
  }
  return out;
}

RelationGraph graph_from_records(const std::vector<ingest::UserRecord>& records, std::span<const double> features,
                                 std::size_t dim, const BuildOptions& options, BuildStats* stats) {
  std::vector<std::string> ids;
  ids.reserve(records.size());
  for (const auto& r : records) ids.push_back(r.user_id);
  return build_graph(ids, features, dim, edges_from_records(records), options, stats);
}

std::vector<EdgeSpec> read_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open edge list " + path.string());
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header || header->fields != std::vector<std::string>{"src", "relation", "dst"}) {
    throw ParseError(path.filename().string() + ": edge list header must be src,relation,dst", 1);
  }
  std::vector<EdgeSpec> out;
  while (auto row = reader.next()) {
    if (row->fields.size() == 1 && row->fields[0].empty()) continue;
    if (!row->well_formed || row->fields.size() != 3) {
      throw ParseError(path.filename().string() + ": expected 3 fields", row->line);
    }
    for (const auto& f : row->fields) {
      if (f.empty()) throw ParseError(path.filename().string() + ": empty field", row->line);
    }
    out.push_back({row->fields[0], row->fields[1], row->fields[2]});
  }
  return out;
}

void write_edge_list(const std::filesystem::path& path, const std::vector<EdgeSpec>& edges) {
  std::string out = "src,relation,dst\n";
  for (const auto& e : edges) out += csv::join({e.src, e.relation, e.dst}) + "\n";
  jsonl::write_text(path, out);
}

nlohmann::json to_json(const GnnConfig& c) {
  return {{"layers", c.layers},
          {"aggregation", c.aggregation == Aggregation::kMean ? "mean" : "sum"},
          {"residual", c.residual}};
}

GnnConfig gnn_config_from_json(const nlohmann::json& j) {
  GnnConfig c;
  c.layers = j.value("layers", c.layers);
  const std::string agg = j.value("aggregation", std::string("mean"));
  if (agg == "mean") {
    c.aggregation = Aggregation::kMean;
  } else if (agg == "sum") {
    c.aggregation = Aggregation::kSum;
  } else {
    throw ConfigError("graph aggregation must be 'mean' or 'sum', not '" + agg + "'");
  }
  c.residual = j.value("residual", c.residual);
  return c;
}

// --- parameters ---
// Layout: for each layer, R relation matrices then the self matrix; then the
// classifier weight (2 x d) and bias (2).

GnnParams::GnnParams(std::size_t dim, std::size_t relations, std::size_t layers)
    : dim_(dim), relations_(relations), layers_(layers),
      data_(layers * (relations + 1) * dim * dim + 2 * dim + 2, 0.0) {}

std::size_t GnnParams::offset_relation(std::size_t layer, std::size_t r) const {
  return (layer * (relations_ + 1) + r) * dim_ * dim_;
}
std::size_t GnnParams::offset_self(std::size_t layer) const { return offset_relation(layer, relations_); }
std::size_t GnnParams::offset_classifier() const { return layers_ * (relations_ + 1) * dim_ * dim_; }

dil::MatrixView<double> GnnParams::relation_weight(std::size_t layer, std::size_t r) {
  return {data_.data() + offset_relation(layer, r), dim_, dim_};
}
dil::MatrixView<const double> GnnParams::relation_weight(std::size_t layer, std::size_t r) const {
  return {data_.data() + offset_relation(layer, r), dim_, dim_};
}
dil::MatrixView<double> GnnParams::self_weight(std::size_t layer) {
  return {data_.data() + offset_self(layer), dim_, dim_};
}
dil::MatrixView<const double> GnnParams::self_weight(std::size_t layer) const {
  return {data_.data() + offset_self(layer), dim_, dim_};
}
dil::MatrixView<double> GnnParams::classifier_weight() { return {data_.data() + offset_classifier(), 2, dim_}; }
dil::MatrixView<const double> GnnParams::classifier_weight() const {
  return {data_.data() + offset_classifier(), 2, dim_};
}
std::span<double> GnnParams::classifier_bias() {
  return std::span<double>(data_).subspan(offset_classifier() + 2 * dim_, 2);
}
std::span<const double> GnnParams::classifier_bias() const {
  return std::span<const double>(data_).subspan(offset_classifier() + 2 * dim_, 2);
}

GnnParams GnnParams::initialized(std::size_t dim, std::size_t relations, std::size_t layers, std::uint64_t seed) {
  GnnParams p(dim, relations, layers);
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(dim, 1)));
  std::uniform_real_distribution<double> u(-bound, bound);
  const std::size_t weights = p.offset_classifier() + 2 * dim;
  for (std::size_t i = 0; i < weights; ++i) p.data_[i] = u(rng);
  return p;
}

// --- propagation ---

namespace {

struct LayerCache {
  std::vector<double> input;      // n x d, h^(l)
  std::vector<double> neighbors;  // n x R x d, aggregated neighbor states
  std::vector<double> pre;        // n x d, before the rectifier
};

struct Forward {
  std::vector<LayerCache> layers;
  std::vector<double> z;
};

// Per (v, r) scale: 1/|N_r(v)| for mean, 1 for sum.
std::vector<double> neighbor_scales(const RelationGraph& g, Aggregation agg) {
  const std::size_t R = g.relation_types.size();
  std::vector<double> scale(g.size() * R, 0.0);
  for (const auto& e : g.edges) scale[e.dst * R + e.relation] += 1.0;
  for (auto& s : scale) {
    if (s > 0.0) s = agg == Aggregation::kMean ? 1.0 / s : 1.0;
  }
  return scale;
}

void check_shapes(const RelationGraph& g, const GnnParams& p) {
  if (p.dim() != g.dim) throw Error("graph params dimension does not match node features");
  if (p.relations() != g.relation_types.size()) throw Error("graph params relation count does not match graph");
}

Forward forward(const RelationGraph& g, const GnnParams& p, Aggregation agg, bool residual) {
  check_shapes(g, p);
  const std::size_t n = g.size(), d = g.dim, R = g.relation_types.size();
  const auto scale = neighbor_scales(g, agg);
  Forward f;
  std::vector<double> h = g.features;
  for (std::size_t l = 0; l < p.layers(); ++l) {
    LayerCache c;
    c.input = h;
    c.neighbors.assign(n * R * d, 0.0);
    // Summation follows edge-list order, so relabeling nodes reproduces z bit for bit.
    for (const auto& e : g.edges) {
      std::span<double> dst(c.neighbors.data() + (e.dst * R + e.relation) * d, d);
      simd::axpy(1.0, std::span<const double>(c.input.data() + e.src * d, d), dst);
    }
    for (std::size_t i = 0; i < n * R; ++i) {
      for (std::size_t k = 0; k < d; ++k) c.neighbors[i * d + k] *= scale[i];
    }
    c.pre.assign(n * d, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      std::span<double> pre(c.pre.data() + v * d, d);
      const auto ws = p.self_weight(l);
      std::span<const double> hv(c.input.data() + v * d, d);
      for (std::size_t k = 0; k < d; ++k) pre[k] = simd::dot(ws.row(k), hv);
      for (std::size_t r = 0; r < R; ++r) {
        if (scale[v * R + r] == 0.0) continue;
        const auto wr = p.relation_weight(l, r);
        std::span<const double> nb(c.neighbors.data() + (v * R + r) * d, d);
        for (std::size_t k = 0; k < d; ++k) pre[k] += simd::dot(wr.row(k), nb);
      }
    }
    for (std::size_t i = 0; i < n * d; ++i) {
      const double act = c.pre[i] > 0.0 ? c.pre[i] : 0.0;
      h[i] = residual ? c.input[i] + act : act;
    }
    f.layers.push_back(std::move(c));
  }
  f.z = std::move(h);
  return f;
}

std::vector<double> logits_of(std::span<const double> z, const GnnParams& p) {
  const std::size_t d = p.dim(), n = d == 0 ? 0 : z.size() / d;
  std::vector<double> logits(n * 2);
  for (std::size_t v = 0; v < n; ++v) {
    dil::affine<double>(p.classifier_weight(), p.classifier_bias(), z.subspan(v * d, d),
                        std::span<double>(logits.data() + v * 2, 2));
  }
  return logits;
}

}  // namespace

std::vector<double> message_pass(const RelationGraph& graph, const GnnParams& params, Aggregation aggregation,
                                 bool residual) {
  return forward(graph, params, aggregation, residual).z;
}

std::vector<double> graph_classify(std::span<const double> z, const GnnParams& params) {
  auto logits = logits_of(z, params);
  std::vector<double> probs(logits.size());
  for (std::size_t v = 0; v * 2 < logits.size(); ++v) {
    const auto s = dil::softmax<double>(std::span<const double>(logits.data() + v * 2, 2));
    probs[v * 2] = s[0];
    probs[v * 2 + 1] = s[1];
  }
  return probs;
}

double graph_loss(const RelationGraph& graph, std::span<const int> labels, const GnnParams& params,
                  const GnnConfig& config, std::vector<double>* grad) {
  if (labels.size() != graph.size()) throw Error("graph labels must cover every node");
  if (params.layers() != config.layers) throw Error("graph params layer count does not match config");
  const std::size_t n = graph.size(), d = graph.dim, R = graph.relation_types.size();
  const Forward f = forward(graph, params, config.aggregation, config.residual);

  std::vector<std::size_t> labeled;
  std::vector<int> targets;
  for (std::size_t v = 0; v < n; ++v) {
    if (labels[v] >= 0) {
      labeled.push_back(v);
      targets.push_back(labels[v]);
    }
  }
  if (grad != nullptr) grad->assign(params.size(), 0.0);
  if (labeled.empty()) return 0.0;

  std::vector<double> z_labeled(labeled.size() * d);
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    std::copy_n(f.z.begin() + labeled[i] * d, d, z_labeled.begin() + i * d);
  }
  const auto logits = logits_of(z_labeled, params);
  std::vector<double> dlogits;
  const double loss = dil::cross_entropy<double>(logits, 2, targets, grad != nullptr ? &dlogits : nullptr);
  if (grad == nullptr) return loss;

  GnnParams g(d, R, params.layers());
  std::vector<double> dh(n * d, 0.0);
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    std::span<const double> dl(dlogits.data() + i * 2, 2);
    std::span<const double> zi(z_labeled.data() + i * d, d);
    dil::accumulate_outer<double>(dl, zi, g.classifier_weight());
    dil::accumulate<double>(dl, g.classifier_bias());
    dil::accumulate_transposed<double>(params.classifier_weight(), dl, std::span<double>(dh.data() + labeled[i] * d, d));
  }

  const auto scale = neighbor_scales(graph, config.aggregation);
  for (std::size_t l = params.layers(); l-- > 0;) {
    const auto& c = f.layers[l];
    std::vector<double> dpre(n * d);
    for (std::size_t i = 0; i < n * d; ++i) dpre[i] = c.pre[i] > 0.0 ? dh[i] : 0.0;
    std::vector<double> dprev = config.residual ? dh : std::vector<double>(n * d, 0.0);
    std::vector<double> dnb(n * R * d, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      std::span<const double> gv(dpre.data() + v * d, d);
      dil::accumulate_outer<double>(gv, std::span<const double>(c.input.data() + v * d, d), g.self_weight(l));
      dil::accumulate_transposed<double>(params.self_weight(l), gv, std::span<double>(dprev.data() + v * d, d));
      for (std::size_t r = 0; r < R; ++r) {
        if (scale[v * R + r] == 0.0) continue;
        dil::accumulate_outer<double>(gv, std::span<const double>(c.neighbors.data() + (v * R + r) * d, d),
                                      g.relation_weight(l, r));
        dil::accumulate_transposed<double>(params.relation_weight(l, r), gv,
                                           std::span<double>(dnb.data() + (v * R + r) * d, d));
      }
    }
    for (const auto& e : graph.edges) {
      const std::size_t slot = e.dst * R + e.relation;
      simd::axpy(scale[slot], std::span<const double>(dnb.data() + slot * d, d),
                 std::span<double>(dprev.data() + e.src * d, d));
    }
    dh = std::move(dprev);
  }
  *grad = std::vector<double>(g.data().begin(), g.data().end());
  return loss;
}

std::vector<int> predict(const RelationGraph& graph, const GnnParams& params, const GnnConfig& config) {
  const auto z = message_pass(graph, params, config.aggregation, config.residual);
  const auto probs = graph_classify(z, params);
  std::vector<int> out(graph.size());
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = probs[v * 2 + 1] > probs[v * 2] ? 1 : 0;
  return out;
}

GnnTrainResult train_gnn(const RelationGraph& graph, std::span<const int> labels, std::span<const std::size_t> train,
                         std::span<const std::size_t> validation, const GnnTrainConfig& config, std::uint64_t seed) {
  if (labels.size() != graph.size()) throw Error("graph labels must cover every node");
  std::vector<int> train_labels(graph.size(), -1);
  for (auto v : train) {
    if (v >= graph.size() || labels[v] < 0) throw Error("training node without a label");
    train_labels[v] = labels[v];
  }

  GnnTrainResult result;
  result.params = GnnParams::initialized(graph.dim, graph.relation_types.size(), config.model.layers, seed);
  dil::AdamW<double> opt(result.params.size(), config.optimizer);
  GnnParams current = result.params;
  bool have_best = false;
  std::vector<double> grad;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    GnnEpoch rec;
    rec.epoch = epoch;
    rec.loss = graph_loss(graph, train_labels, current, config.model, &grad);
    opt.step(current.data(), grad);
    if (!validation.empty()) {
      const auto pred = predict(graph, current, config.model);
      std::vector<int> y, yhat;
      for (auto v : validation) {
        y.push_back(labels[v]);
        yhat.push_back(pred[v]);
      }
      rec.val_accuracy = bench::metrics(y, yhat).accuracy;
    }
    result.history.push_back(rec);
    if (validation.empty() || !have_best || rec.val_accuracy > result.best_val_accuracy) {
      result.params = current;
      result.best_epoch = epoch;
      result.best_val_accuracy = rec.val_accuracy;
      have_best = true;
    }
  }
  return result;
}

void save_gnn(const std::filesystem::path& path, const GnnParams& params, const GnnConfig& config,
              const std::vector<std::string>& relation_types) {
  const nlohmann::json j{{"format", "mgdil-gnn"},
                         {"version", 1},
                         {"dim", params.dim()},
                         {"relation_types", relation_types},
                         {"config", to_json(config)},
                         {"params", std::vector<double>(params.data().begin(), params.data().end())}};
  jsonl::write_text(path, j.dump() + "\n");
}

LoadedGnn load_gnn(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || j.value("format", "") != "mgdil-gnn") throw ParseError(path.string() + ": not a GNN file");
  LoadedGnn out;
  try {
    out.config = gnn_config_from_json(j.at("config"));
    out.relation_types = j.at("relation_types").get<std::vector<std::string>>();
    out.params = GnnParams(j.at("dim").get<std::size_t>(), out.relation_types.size(), out.config.layers);
    const auto values = j.at("params").get<std::vector<double>>();
    if (values.size() != out.params.size()) throw ParseError(path.string() + ": parameter count mismatch");
    std::copy(values.begin(), values.end(), out.params.data().begin());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace mgdil::graph
