#include "commands.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "mgdil/bench/experiments.hpp"
#include "mgdil/bench/metrics.hpp"
#include "mgdil/bench/report.hpp"
#include "mgdil/bench/synthetic.hpp"
#include "mgdil/dil/checkpoint.hpp"
#include "mgdil/dil/encoder.hpp"
#include "mgdil/dil/gradcheck.hpp"
#include "mgdil/dil/trainer.hpp"
#include "mgdil/graph/graph.hpp"
#include "mgdil/ingest/ingest.hpp"
#include "mgdil/instruction/instruction.hpp"
#include "mgdil/profile/profile.hpp"
#include "mgdil/summary/client.hpp"
#include "mgdil/summary/summary.hpp"
#include "mgdil/util/config.hpp"
#include "mgdil/util/csv.hpp"
#include "mgdil/util/digest.hpp"
#include "mgdil/util/jsonl.hpp"
#include "mgdil/util/log.hpp"

namespace mgdil::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---- configuration --------------------------------------------------------

// The config file when given, otherwise the shipped synthetic benchmark.
json load_config(const Options& o) {
  const fs::path path = o.config ? *o.config : config::default_data_dir() / "bench" / "synthetic_shift.toml";
  if (!fs::exists(path)) throw UsageError("config file not found: " + path.string());
  return config::load_toml(path);
}

std::string pick(const std::optional<std::string>& flag, const json& root, std::string_view key, std::string fallback) {
  if (flag) return *flag;
  return config::get_or<std::string>(root, key, std::move(fallback));
}

dil::TrainConfig train_config(const Options& o, const json& root) {
  auto cfg = dil::train_config_from_json(root.contains("train") ? root.at("train") : json::object());
  if (o.seed) cfg.seeds = {*o.seed};
  return cfg;
}

void require_file(const fs::path& p, std::string_view flag) {
  if (p.empty()) throw UsageError(std::string(flag) + " is required");
  if (!fs::exists(p)) throw UsageError(std::string(flag) + " does not exist: " + p.string());
}

fs::path out_dir(const Options& o) {
  if (o.out.empty()) throw UsageError("--out is required");
  fs::create_directories(o.out);
  return o.out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!(out << text)) throw Error("cannot write " + path.string());
}

// Output paths are recorded relative to the output directory so reruns into
// another directory give the same manifest.
void write_manifest(const fs::path& dir, const std::string& command, const json& config,
                    const std::vector<std::uint64_t>& seeds, const std::vector<fs::path>& inputs,
                    const std::vector<std::string>& outputs) {
  std::vector<fs::path> out_paths;
  for (const auto& name : outputs) out_paths.push_back(dir / name);
  auto m = bench::run_manifest(command, config, seeds, inputs, out_paths);
  for (std::size_t i = 0; i < outputs.size(); ++i) m["outputs"][i]["path"] = outputs[i];
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

// ---- encoders and data ----------------------------------------------------

std::string api_key() {
  const char* k = std::getenv("MGDIL_LLM_API_KEY");
  return k == nullptr ? std::string() : std::string(k);
}

std::unique_ptr<dil::TextEncoder> make_encoder(const std::string& kind, const json& root, std::size_t dimension) {
  if (kind == "hashing") return std::make_unique<dil::HashingEncoder>(dimension);
  if (kind == "external") {
    dil::EmbeddingEndpoint e;
    e.url = config::get_or<std::string>(root, "encoder.url", "");
    e.model = config::get_or<std::string>(root, "encoder.model", "");
    e.dimension = dimension;
    e.api_key = api_key();
    if (e.url.empty()) throw UsageError("--encoder external needs encoder.url in the config");
    return std::make_unique<dil::ExternalEmbeddingEncoder>(e);
  }
  throw UsageError("--encoder must be 'hashing' or 'external', not '" + kind + "'");
}

struct Data {
  dil::EncodedCorpus source;  // domain-labelled
  dil::EncodedCorpus eval;    // held out
  json descriptor;
  std::vector<fs::path> inputs;
};

void encode_docs(const std::vector<instruction::InstructionDoc>& docs, const dil::TextEncoder& encoder, Data& d) {
  d.source.dim = d.eval.dim = encoder.dimension();
  for (const auto& doc : docs) {
    const auto v = encoder.encode(doc.text());
    const int y = static_cast<int>(doc.label);
    if (doc.domain_id) {
      d.source.add(doc.user_id, v, y, *doc.domain_id);
    } else {
      d.eval.add(doc.user_id, v, y, dil::kNoDomain);
    }
  }
}

// An instruction corpus when --corpus is given, otherwise the synthetic
// benchmark from the config. Sets cfg.dims.input to match.
Data load_data(const Options& o, const json& root, dil::TrainConfig& cfg) {
  Data d;
  if (!o.corpus.empty()) {
    require_file(o.corpus, "--corpus");
    const auto docs = instruction::read_corpus(o.corpus);
    const auto kind = pick(o.encoder, root, "encoder.kind", "hashing");
    const auto dim = config::get_or<std::size_t>(root, "encoder.dimension", 4096);
    const auto encoder = make_encoder(kind, root, dim);
    encode_docs(docs, *encoder, d);
    d.descriptor = encoder->describe();
    d.inputs.push_back(o.corpus);
    if (d.source.size() == 0) throw UsageError("corpus has no domain-labelled documents to train on");
    if (d.eval.size() == 0) {
      log::warn("data.no_heldout", {{"corpus", o.corpus.string()}, {"note", "evaluating on the training documents"}});
      d.eval = d.source;
    }
  } else {
    const auto spec = bench::synthetic_spec_from_json(root.contains("synthetic") ? root.at("synthetic") : json::object());
    auto corpus = bench::generate_synthetic(spec);
    d.source = std::move(corpus.source);
    d.eval = std::move(corpus.target);
    d.descriptor = {{"kind", "synthetic"}, {"spec", bench::to_json(spec)}};
  }
  cfg.dims.input = d.source.dim;
  log::info("data.loaded", {{"source", d.source.size()}, {"eval", d.eval.size()}, {"dim", d.source.dim}});
  return d;
}

const dil::EncodedCorpus& split_of(const Data& d, const std::string& split) {
  if (split == "target") return d.eval;
  if (split == "source") return d.source;
  throw UsageError("--split must be 'target' or 'source'");
}

// Rebuilds the data a checkpoint was trained on from its header: the encoder
// kind and dimension, or the synthetic spec.
Data load_data_for(const Options& o, const json& root, const dil::CheckpointInfo& info) {
  const auto& enc = info.header.at("config").at("encoder");
  if (enc.at("kind") == "synthetic") {
    if (!o.corpus.empty()) throw UsageError("checkpoint was trained on synthetic data; drop --corpus");
    auto cfg = dil::TrainConfig{};
    auto root2 = root;
    root2["synthetic"] = enc.at("spec");
    return load_data(o, root2, cfg);
  }
  if (o.corpus.empty()) throw UsageError("checkpoint was trained on text; --corpus is required");
  Options o2 = o;
  o2.encoder = enc.at("kind").get<std::string>();
  auto root2 = root;
  root2["encoder"]["dimension"] = enc.at("dimension");
  auto cfg = dil::TrainConfig{};
  return load_data(o2, root2, cfg);
}

template <typename F>
auto with_checkpoint(const fs::path& path, F&& f) {
  const auto info = dil::read_checkpoint_info(path);
  if (info.precision == dil::Precision::kFloat64) return f(dil::load_checkpoint<double>(path), info);
  return f(dil::load_checkpoint<float>(path), info);
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << std::fixed << v;
  return s.str();
}

std::string eval_csv(const bench::EvalReport& r) {
  std::string out =
      "accuracy,macro_f1,precision_human,recall_human,f1_human,precision_bot,recall_bot,f1_bot,tn,fp,fn,tp,samples,"
      "seed,config_digest\n";
  out += csv::join({fmt(r.accuracy), fmt(r.macro_f1), fmt(r.per_class[0].precision), fmt(r.per_class[0].recall),
                    fmt(r.per_class[0].f1), fmt(r.per_class[1].precision), fmt(r.per_class[1].recall),
                    fmt(r.per_class[1].f1), std::to_string(r.confusion[0][0]), std::to_string(r.confusion[0][1]),
                    std::to_string(r.confusion[1][0]), std::to_string(r.confusion[1][1]), std::to_string(r.samples),
                    std::to_string(r.seed), r.config_digest}) +
         "\n";
  return out;
}

std::string history_csv(const std::vector<dil::EpochRecord>& h) {
  std::string out = "epoch,cls,adv,con,total,val_accuracy,val_macro_f1,grl_lambda,empty_anchor_batches\n";
  for (const auto& e : h) {
    out += csv::join({std::to_string(e.epoch), fmt(e.cls), fmt(e.adv), fmt(e.con), fmt(e.total), fmt(e.val_accuracy),
                      fmt(e.val_macro_f1), fmt(e.grl_lambda), std::to_string(e.empty_anchor_batches)}) +
           "\n";
  }
  return out;
}

std::vector<ingest::UserRecord> load_records(const Options& o) {
  require_file(o.records, "--records");
  return ingest::read_records(o.records);
}

std::unique_ptr<summary::SummaryClient> make_llm_client(const json& root) {
  summary::HttpClientConfig c;
  c.endpoint = config::get_or<std::string>(root, "llm.endpoint", "");
  c.model = config::get_or<std::string>(root, "llm.model", "");
  c.timeout = std::chrono::seconds(config::get_or<int>(root, "llm.timeout_seconds", 60));
  if (const auto* a = config::find(root, "llm.audit_log")) c.audit_log = fs::path(a->get<std::string>());
  if (c.endpoint.empty()) throw UsageError("--summarizer llm needs llm.endpoint in the config");
  return std::make_unique<summary::HttpChatClient>(c);
}

// Summaries for records with posts, in record order. Returns false when any
// LLM request failed; the successes are still returned.
bool summarize_records(const Options& o, const json& root, const std::vector<ingest::UserRecord>& records,
                       std::vector<std::pair<std::string, summary::PostSummary>>& out) {
  const auto kind = pick(o.summarizer, root, "pipeline.summarizer", "fallback");
  std::vector<const ingest::UserRecord*> todo;
  for (const auto& r : records) {
    if (!r.posts.empty()) todo.push_back(&r);
  }
  if (kind == "fallback") {
    for (const auto* r : todo) out.emplace_back(r->user_id, summary::fallback_summarize(r->posts));
    return true;
  }
  if (kind != "llm") throw UsageError("--summarizer must be 'llm' or 'fallback', not '" + kind + "'");
  const auto client = make_llm_client(root);
  std::vector<std::vector<std::string>> histories;
  for (const auto* r : todo) histories.push_back(r->posts);
  const auto items = summary::llm_summarize_all(histories, *client, o.in_flight);
  bool ok = true;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].summary) {
      out.emplace_back(todo[i]->user_id, *items[i].summary);
    } else {
      ok = false;
      log::error("summarize.failed", {{"user_id", todo[i]->user_id}, {"error", items[i].error}});
    }
  }
  return ok;
}

// ---- graph helpers --------------------------------------------------------

struct GraphData {
  graph::RelationGraph graph;
  std::vector<int> labels;
  std::vector<std::size_t> source_nodes;  // domain-labelled
  std::vector<std::size_t> eval_nodes;
  std::vector<fs::path> inputs;
};

std::vector<graph::EdgeSpec> load_edges(const Options& o) {
  if (!o.edges.empty()) {
    require_file(o.edges, "--edges");
    return graph::read_edge_list(o.edges);
  }
  if (!o.records.empty()) return graph::edges_from_records(load_records(o));
  throw UsageError("--edges or --records is required");
}

// Nodes are the corpus documents; features are the frozen latents of the
// checkpoint's encoder.
GraphData load_graph(const Options& o, const json& root) {
  require_file(o.checkpoint, "--checkpoint");
  require_file(o.corpus, "--corpus");
  GraphData g;
  const auto docs = instruction::read_corpus(o.corpus);
  auto [x, info] = with_checkpoint(o.checkpoint, [&](const auto& model, const dil::CheckpointInfo& i) {
    const auto& enc = i.header.at("config").at("encoder");
    if (enc.at("kind") == "synthetic") throw UsageError("graph stage needs a checkpoint trained on a text corpus");
    const auto encoder = make_encoder(enc.at("kind").get<std::string>(), root, enc.at("dimension").get<std::size_t>());
    dil::EncodedCorpus all;
    all.dim = encoder->dimension();
    for (const auto& d : docs) {
      all.add(d.user_id, encoder->encode(d.text()), static_cast<int>(d.label), d.domain_id.value_or(dil::kNoDomain));
    }
    return std::make_pair(dil::latents(model, all), i);
  });
  std::vector<std::string> ids;
  for (std::size_t v = 0; v < docs.size(); ++v) {
    ids.push_back(docs[v].user_id);
    g.labels.push_back(static_cast<int>(docs[v].label));
    (docs[v].domain_id ? g.source_nodes : g.eval_nodes).push_back(v);
  }
  graph::BuildOptions bo;
  bo.add_reverse = config::get_or<bool>(root, "graph.add_reverse", false);
  graph::BuildStats stats;
  g.graph = graph::build_graph(ids, x, info.dims.latent, load_edges(o), bo, &stats);
  log::info("graph.built", {{"nodes", g.graph.size()}, {"edges", stats.edges}, {"dropped", stats.dropped},
                            {"relations", g.graph.relation_types}});
  g.inputs = {o.checkpoint, o.corpus};
  g.inputs.push_back(o.edges.empty() ? o.records : o.edges);
  return g;
}

// Re-indexes edge relations onto a saved model's relation list; edges of
// unseen relation types are dropped.
void align_relations(graph::RelationGraph& g, const std::vector<std::string>& saved) {
  std::map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < saved.size(); ++r) index[saved[r]] = r;
  std::vector<graph::Edge> kept;
  std::size_t dropped = 0;
  for (auto e : g.edges) {
    const auto it = index.find(g.relation_types[e.relation]);
    if (it == index.end()) {
      ++dropped;
      continue;
    }
    e.relation = it->second;
    kept.push_back(e);
  }
  if (dropped > 0) log::warn("graph.unknown_relations", {{"dropped", dropped}});
  g.edges = std::move(kept);
  g.relation_types = saved;
}

graph::GnnTrainConfig gnn_config(const json& root) {
  graph::GnnTrainConfig c;
  c.model = graph::gnn_config_from_json(root.contains("graph") ? root.at("graph") : json::object());
  c.epochs = config::get_or<std::size_t>(root, "graph.epochs", c.epochs);
  c.optimizer.learning_rate = config::get_or<double>(root, "graph.learning_rate", c.optimizer.learning_rate);
  c.optimizer.weight_decay = config::get_or<double>(root, "graph.weight_decay", c.optimizer.weight_decay);
  return c;
}

}  // namespace

// ---- subcommands ----------------------------------------------------------

int run_ingest(const Options& o) {
  const auto root = o.config ? config::load_toml(*o.config) : json::object();
  fs::path registry = o.registry;
  if (registry.empty()) {
    const auto r = config::get_or<std::string>(root, "pipeline.registry", "");
    if (r.empty()) throw UsageError("--registry is required");
    registry = o.config->parent_path() / r;
  }
  require_file(registry, "--registry");
  const auto seed = o.seed.value_or(config::get_or<std::uint64_t>(root, "ingest.seed", 42));
  ingest::BalanceOptions bo;
  bo.slack = config::get_or<std::size_t>(root, "ingest.slack", bo.slack);
  ingest::IngestSummary summary;
  const auto reg = ingest::load_registry(registry);
  const auto records = ingest::ingest_all(reg, seed, &summary, bo);
  const auto dir = out_dir(o);
  ingest::write_records(dir / "corpus.jsonl", records);

  std::string diag = "dataset_id,line,message\n";
  for (const auto& d : summary.skipped) diag += csv::join({d.dataset_id, std::to_string(d.line), d.message}) + "\n";
  write_text(dir / "skipped.csv", diag);

  std::vector<fs::path> inputs{registry};
  for (const auto& s : reg.sources) inputs.push_back(s.path);
  std::size_t bots = 0;
  for (const auto& r : records) bots += r.label == ingest::Label::kBot;
  const json stats{{"parsed", summary.parsed}, {"skipped", summary.skipped.size()},
                   {"after_dedupe", summary.after_dedupe}, {"kept", records.size()}, {"bots", bots},
                   {"humans", records.size() - bots}};
  log::info("ingest.done", stats);
  write_manifest(dir, "ingest", {{"slack", bo.slack}, {"stats", stats}}, {seed}, inputs, {"corpus.jsonl", "skipped.csv"});
  return 0;
}

int run_featurize(const Options& o) {
  const auto records = load_records(o);
  const auto dir = out_dir(o);
  std::string table = csv::join(profile::feature_csv_header()) + "\n";
  std::string renders;
  for (const auto& r : records) {
    const auto p = profile::render_profile(r);
    table += csv::join(profile::feature_csv_row(r.user_id, p.features)) + "\n";
    renders += json{{"user_id", r.user_id}, {"text", p.text}, {"placeholders", p.placeholder_count()}}.dump() + "\n";
  }
  write_text(dir / "features.csv", table);
  write_text(dir / "profiles.jsonl", renders);
  log::info("featurize.done", {{"users", records.size()}});
  write_manifest(dir, "featurize", json::object(), {}, {o.records}, {"features.csv", "profiles.jsonl"});
  return 0;
}

int run_summarize(const Options& o) {
  const auto root = o.config ? config::load_toml(*o.config) : json::object();
  const auto records = load_records(o);
  const auto dir = out_dir(o);
  std::vector<std::pair<std::string, summary::PostSummary>> out;
  const bool ok = summarize_records(o, root, records, out);
  summary::write_summaries(dir / "summaries.jsonl", out);
  const auto kind = pick(o.summarizer, root, "pipeline.summarizer", "fallback");
  log::info("summarize.done", {{"summarizer", kind}, {"summaries", out.size()}, {"complete", ok}});
  write_manifest(dir, "summarize", {{"summarizer", kind}}, {}, {o.records}, {"summaries.jsonl"});
  return ok ? 0 : 1;
}

int run_build(const Options& o) {
  const auto root = o.config ? config::load_toml(*o.config) : json::object();
  const auto variant = instruction::parse_variant(pick(o.variant, root, "pipeline.variant", "meta-summary"));
  const auto records = load_records(o);
  std::map<std::string, summary::PostSummary> summaries;
  std::vector<fs::path> inputs{o.records};
  bool ok = true;
  if (variant == instruction::Variant::kMetaSummary) {
    if (!o.summaries.empty()) {
      require_file(o.summaries, "--summaries");
      summaries = summary::read_summaries(o.summaries);
      inputs.push_back(o.summaries);
    } else if (o.summarizer || config::find(root, "pipeline.summarizer") != nullptr) {
      std::vector<std::pair<std::string, summary::PostSummary>> fresh;
      ok = summarize_records(o, root, records, fresh);
      summaries.insert(fresh.begin(), fresh.end());
    } else {
      throw UsageError("variant meta-summary needs --summaries or --summarizer");
    }
  }
  std::vector<instruction::InstructionDoc> docs;
  for (const auto& r : records) {
    std::optional<summary::PostSummary> s;
    if (const auto it = summaries.find(r.user_id); it != summaries.end()) s = it->second;
    docs.push_back(instruction::build_instruction(r, profile::render_profile(r), s, variant));
  }
  const auto dir = out_dir(o);
  instruction::write_corpus(dir / "instructions.jsonl", docs);
  const auto manifest = instruction::corpus_manifest(docs, variant);
  write_text(dir / "corpus_manifest.json", manifest.dump(2) + "\n");
  log::info("build.done", manifest);
  write_manifest(dir, "build", {{"variant", instruction::variant_name(variant)}}, {}, inputs,
                 {"instructions.jsonl", "corpus_manifest.json"});
  return ok ? 0 : 1;
}

namespace {

template <typename Real>
void train_and_save(const Data& d, const dil::TrainConfig& cfg, std::uint64_t seed, const fs::path& dir) {
  const auto* target = cfg.validation == dil::ValidationMode::kTargetSplit ? &d.eval : nullptr;
  const auto result = dil::train<Real>(d.source, cfg, seed, target);
  dil::save_checkpoint(dir / "checkpoint.bin", result.model, seed, {{"train", dil::to_json(cfg)}, {"encoder", d.descriptor}});
  write_text(dir / "history.csv", history_csv(result.history));
  log::info("train.done", {{"seed", seed}, {"best_epoch", result.best_epoch}, {"best_val_accuracy", result.best_val_accuracy}});
}

}  // namespace

int run_train(const Options& o) {
  const auto root = load_config(o);
  auto cfg = train_config(o, root);
  const auto data = load_data(o, root, cfg);
  cfg.validate();
  const auto dir = out_dir(o);
  const json config{{"train", dil::to_json(cfg)}, {"data", data.descriptor}};
  if (o.all_seeds) {
    std::vector<bench::RunResult> runs;
    for (const auto seed : cfg.seeds) {
      runs.push_back(bench::run_once("seed-suite", data.source, data.eval, cfg, seed, false));
      log::info("train.seed", {{"seed", seed}, {"accuracy", runs.back().report.accuracy},
                               {"macro_f1", runs.back().report.macro_f1}});
    }
    const auto summaries = bench::summarize(runs);
    write_text(dir / "seeds.csv", bench::runs_csv(runs));
    write_text(dir / "seeds_summary.csv", bench::summary_csv(summaries));
    const auto& s = summaries.front();
    std::string report = "metric,mean,std,runs\n";
    report += csv::join({"accuracy", fmt(s.accuracy_mean), fmt(s.accuracy_std), std::to_string(s.runs)}) + "\n";
    report += csv::join({"macro_f1", fmt(s.macro_f1_mean), fmt(s.macro_f1_std), std::to_string(s.runs)}) + "\n";
    write_text(dir / "seed_report.csv", report);
    write_manifest(dir, "train", config, cfg.seeds, data.inputs, {"seeds.csv", "seeds_summary.csv", "seed_report.csv"});
    return 0;
  }
  const auto seed = o.seed.value_or(cfg.seeds.front());
  if (cfg.precision == dil::Precision::kFloat64) {
    train_and_save<double>(data, cfg, seed, dir);
  } else {
    train_and_save<float>(data, cfg, seed, dir);
  }
  write_manifest(dir, "train", config, {seed}, data.inputs, {"checkpoint.bin", "history.csv"});
  return 0;
}

int run_eval(const Options& o) {
  require_file(o.checkpoint, "--checkpoint");
  const auto root = load_config(o);
  const auto report = with_checkpoint(o.checkpoint, [&](const auto& model, const dil::CheckpointInfo& info) {
    const auto data = load_data_for(o, root, info);
    const auto& split = split_of(data, o.split);
    auto r = bench::metrics(split.labels, dil::predict_labels(model, split));
    r.seed = info.seed;
    r.config_digest = digest::git_blob_id(info.header.at("config").dump());
    return r;
  });
  const auto dir = out_dir(o);
  write_text(dir / "eval.csv", eval_csv(report));
  log::info("eval.done", {{"split", o.split}, {"accuracy", report.accuracy}, {"macro_f1", report.macro_f1}});
  std::vector<fs::path> inputs{o.checkpoint};
  if (!o.corpus.empty()) inputs.push_back(o.corpus);
  write_manifest(dir, "eval", {{"split", o.split}}, {report.seed}, inputs, {"eval.csv"});
  return 0;
}

int run_ablate(const Options& o) {
  const auto root = load_config(o);
  auto cfg = train_config(o, root);
  const auto data = load_data(o, root, cfg);
  cfg.validate();
  const auto runs = bench::ablation_run(data.source, data.eval, cfg, false, o.threads);
  const auto dir = out_dir(o);
  write_text(dir / "ablation_runs.csv", bench::runs_csv(runs));
  write_text(dir / "ablation_summary.csv", bench::summary_csv(bench::summarize(runs)));
  log::info("ablate.done", {{"runs", runs.size()}});
  write_manifest(dir, "ablate", {{"train", dil::to_json(cfg)}, {"data", data.descriptor}}, cfg.seeds, data.inputs,
                 {"ablation_runs.csv", "ablation_summary.csv"});
  return 0;
}

int run_sweep(const Options& o) {
  if (o.which != "adv" && o.which != "con") throw UsageError("--which must be 'adv' or 'con'");
  const auto values = o.values.empty() ? std::vector<double>{0.0, 0.05, 0.1, 0.2, 0.5, 1.0} : o.values;
  const auto root = load_config(o);
  auto cfg = train_config(o, root);
  const auto data = load_data(o, root, cfg);
  cfg.validate();
  const auto target = o.which == "adv" ? bench::SweepTarget::kAdv : bench::SweepTarget::kCon;
  const auto runs = bench::sweep(data.source, data.eval, cfg, target, values, o.threads);
  const auto dir = out_dir(o);
  write_text(dir / "sweep_runs.csv", bench::runs_csv(runs));
  write_text(dir / "sweep_summary.csv", bench::summary_csv(bench::summarize(runs)));
  log::info("sweep.done", {{"which", o.which}, {"points", values.size()}, {"runs", runs.size()}});
  write_manifest(dir, "sweep", {{"train", dil::to_json(cfg)}, {"data", data.descriptor}, {"which", o.which}, {"values", values}},
                 cfg.seeds, data.inputs, {"sweep_runs.csv", "sweep_summary.csv"});
  return 0;
}

int run_probe(const Options& o) {
  const auto root = load_config(o);
  auto cfg = train_config(o, root);
  const auto data = load_data(o, root, cfg);
  cfg.validate();
  // The first two ablation cells: full and adversarial term removed.
  const auto cells = bench::ablation_cells(cfg);
  std::vector<bench::RunResult> runs;
  for (std::size_t c = 0; c < 2; ++c) {
    auto cell = cfg;
    cell.weights.adv = cells[c].lambda_adv;
    cell.weights.con = cells[c].lambda_con;
    for (const auto seed : cfg.seeds) runs.push_back(bench::run_once(cells[c].name, data.source, data.eval, cell, seed, true));
  }
  const auto summaries = bench::summarize(runs);
  const auto dir = out_dir(o);
  write_text(dir / "probe_runs.csv", bench::runs_csv(runs));
  write_text(dir / "probe_summary.csv", bench::summary_csv(summaries));
  log::info("probe.done", {{"full", summaries[0].probe_mean}, {"without_adv", summaries[1].probe_mean}});
  write_manifest(dir, "probe", {{"train", dil::to_json(cfg)}, {"data", data.descriptor}}, cfg.seeds, data.inputs,
                 {"probe_runs.csv", "probe_summary.csv"});
  return 0;
}

int run_report(const Options& o) {
  const auto records = load_records(o);
  require_file(o.summaries, "--summaries");
  const auto summaries = summary::read_summaries(o.summaries);
  std::vector<bench::LabeledSummary> entries;
  for (const auto& r : records) {
    if (const auto it = summaries.find(r.user_id); it != summaries.end()) {
      entries.push_back({it->second, r.label, r.dataset_id});
    }
  }
  const auto dir = out_dir(o);
  write_text(dir / "distribution.csv", bench::distribution_csv(bench::distribution_report(entries)));
  log::info("report.done", {{"users", entries.size()}});
  write_manifest(dir, "report", json::object(), {}, {o.records, o.summaries}, {"distribution.csv"});
  return 0;
}

int run_gradcheck(const Options& o) {
  dil::GradcheckSuite suite;
  if (o.seed) suite.seed = *o.seed;
  const auto outcome = dil::run_gradcheck_suite(suite);
  std::string table = "component,group,analytic_norm,numeric_norm,relative_error,max_abs_error\n";
  for (const auto& c : outcome.checks) {
    std::ostringstream re, ma;
    re << c.relative_error;
    ma << c.max_abs_error;
    table += csv::join({std::string(dil::component_name(c.component)), std::to_string(static_cast<int>(c.group)),
                        fmt(c.analytic_norm), fmt(c.numeric_norm), re.str(), ma.str()}) +
             "\n";
  }
  if (!o.out.empty()) {
    const auto dir = out_dir(o);
    write_text(dir / "gradcheck.csv", table);
    write_manifest(dir, "gradcheck", {{"tolerance", suite.tolerance}, {"epsilon", suite.epsilon}}, {suite.seed}, {},
                   {"gradcheck.csv"});
  }
  log::emit(outcome.passed ? log::Level::kInfo : log::Level::kError, "gradcheck.done",
            {{"passed", outcome.passed}, {"worst_relative_error", outcome.worst_relative_error},
             {"checks", outcome.checks.size()}});
  return outcome.passed ? 0 : 1;
}

int run_graph_train(const Options& o) {
  const auto root = o.config ? config::load_toml(*o.config) : json::object();
  auto g = load_graph(o, root);
  const auto cfg = gnn_config(root);
  const auto seed = o.seed.value_or(config::get_or<std::uint64_t>(root, "graph.seed", 42));
  const double fraction = config::get_or<double>(root, "graph.validation_split", 0.2);
  auto [tr, va] = dil::validation_split(g.source_nodes.size(), fraction, seed);
  std::vector<std::size_t> train_nodes, val_nodes;
  for (auto i : tr) train_nodes.push_back(g.source_nodes[i]);
  for (auto i : va) val_nodes.push_back(g.source_nodes[i]);
  // Evaluation-period labels stay hidden from training.
  auto labels = g.labels;
  for (auto v : g.eval_nodes) labels[v] = -1;
  const auto result = graph::train_gnn(g.graph, labels, train_nodes, val_nodes, cfg, seed);
  const auto dir = out_dir(o);
  graph::save_gnn(dir / "gnn.json", result.params, cfg.model, g.graph.relation_types);
  std::string hist = "epoch,loss,val_accuracy\n";
  for (const auto& e : result.history) hist += csv::join({std::to_string(e.epoch), fmt(e.loss), fmt(e.val_accuracy)}) + "\n";
  write_text(dir / "history.csv", hist);
  log::info("graph_train.done", {{"best_epoch", result.best_epoch}, {"best_val_accuracy", result.best_val_accuracy}});
  write_manifest(dir, "graph-train",
                 {{"model", graph::to_json(cfg.model)}, {"epochs", cfg.epochs}, {"validation_split", fraction}}, {seed},
                 g.inputs, {"gnn.json", "history.csv"});
  return 0;
}

int run_graph_eval(const Options& o) {
  require_file(o.gnn, "--gnn");
  const auto root = o.config ? config::load_toml(*o.config) : json::object();
  auto g = load_graph(o, root);
  const auto saved = graph::load_gnn(o.gnn);
  align_relations(g.graph, saved.relation_types);
  const auto& nodes = o.split == "source" ? g.source_nodes : g.eval_nodes;
  if (o.split != "source" && o.split != "target") throw UsageError("--split must be 'target' or 'source'");
  if (nodes.empty()) throw UsageError("no nodes in split '" + o.split + "'");
  const auto pred = graph::predict(g.graph, saved.params, saved.config);
  std::vector<int> yt, yp;
  for (auto v : nodes) {
    yt.push_back(g.labels[v]);
    yp.push_back(pred[v]);
  }
  auto report = bench::metrics(yt, yp);
  report.config_digest = bench::manifest_file(o.gnn).digest;
  const auto dir = out_dir(o);
  write_text(dir / "eval.csv", eval_csv(report));
  log::info("graph_eval.done", {{"split", o.split}, {"accuracy", report.accuracy}, {"macro_f1", report.macro_f1}});
  auto inputs = g.inputs;
  inputs.push_back(o.gnn);
  write_manifest(dir, "graph-eval", {{"split", o.split}}, {}, inputs, {"eval.csv"});
  return 0;
}

}  // namespace mgdil::cli
