#include <exception>
#include <functional>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "mgdil/util/log.hpp"

using mgdil::cli::Options;

int main(int argc, char** argv) {
  CLI::App app{"Multi-granularity, domain-invariant social bot detection pipeline"};
  app.require_subcommand(1);
  Options o;
  std::string config;
  std::uint64_t seed = 0;
  std::string variant, summarizer, encoder;
  std::string level = "info";

  auto* cfg_opt = app.add_option("--config", config, "TOML config file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Seed override");
  auto* variant_opt = app.add_option("--variant", variant, "metadata | meta-summary")
                          ->check(CLI::IsMember({"metadata", "meta-summary"}));
  auto* summ_opt = app.add_option("--summarizer", summarizer, "llm | fallback")->check(CLI::IsMember({"llm", "fallback"}));
  auto* enc_opt = app.add_option("--encoder", encoder, "hashing | external")->check(CLI::IsMember({"hashing", "external"}));
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--log-level", level, "debug | info | warn | error")
      ->check(CLI::IsMember({"debug", "info", "warn", "error"}));
  app.fallthrough();

  std::function<int(const Options&)> handler;
  auto sub = [&](const char* name, const char* help, int (*fn)(const Options&)) {
    auto* s = app.add_subcommand(name, help);
    s->callback([&handler, fn] { handler = fn; });
    return s;
  };

  auto* ingest = sub("ingest", "Parse, dedupe and balance the registry sources", mgdil::cli::run_ingest);
  ingest->add_option("--registry", o.registry, "Source registry TOML");

  auto* featurize = sub("featurize", "Profile features and renderings", mgdil::cli::run_featurize);
  featurize->add_option("--records", o.records, "Unified records (JSON lines)")->required();

  auto* summarize = sub("summarize", "Post-history summaries", mgdil::cli::run_summarize);
  summarize->add_option("--records", o.records, "Unified records (JSON lines)")->required();
  summarize->add_option("--in-flight", o.in_flight, "Concurrent LLM requests");

  auto* build = sub("build", "Instruction corpus", mgdil::cli::run_build);
  build->add_option("--records", o.records, "Unified records (JSON lines)")->required();
  build->add_option("--summaries", o.summaries, "Summary sidecar from `summarize`");
  build->add_option("--in-flight", o.in_flight, "Concurrent LLM requests");

  auto* train = sub("train", "Train the domain-invariant learner", mgdil::cli::run_train);
  train->add_option("--corpus", o.corpus, "Instruction corpus; synthetic benchmark when omitted");
  train->add_flag("--all-seeds", o.all_seeds, "Run every configured seed and report mean +- std");

  auto* eval = sub("eval", "Evaluate a checkpoint", mgdil::cli::run_eval);
  eval->add_option("--checkpoint", o.checkpoint, "Checkpoint from `train`")->required();
  eval->add_option("--corpus", o.corpus, "Instruction corpus; synthetic benchmark when omitted");
  eval->add_option("--split", o.split, "target | source")->check(CLI::IsMember({"target", "source"}));

  auto* ablate = sub("ablate", "Loss-term ablation across seeds", mgdil::cli::run_ablate);
  ablate->add_option("--corpus", o.corpus, "Instruction corpus; synthetic benchmark when omitted");
  ablate->add_option("--threads", o.threads, "Parallel runs (0 = hardware)");

  auto* sweep = sub("sweep", "One-weight sensitivity sweep", mgdil::cli::run_sweep);
  sweep->add_option("--corpus", o.corpus, "Instruction corpus; synthetic benchmark when omitted");
  sweep->add_option("--which", o.which, "adv | con")->check(CLI::IsMember({"adv", "con"}));
  sweep->add_option("--values", o.values, "Weights to try")->delimiter(',');
  sweep->add_option("--threads", o.threads, "Parallel runs (0 = hardware)");

  auto* probe = sub("probe", "Domain probe on learned latents", mgdil::cli::run_probe);
  probe->add_option("--corpus", o.corpus, "Instruction corpus; synthetic benchmark when omitted");

  auto* report = sub("report", "Summary label distribution per dataset and label", mgdil::cli::run_report);
  report->add_option("--records", o.records, "Unified records (JSON lines)")->required();
  report->add_option("--summaries", o.summaries, "Summary sidecar")->required();

  sub("gradcheck", "Finite-difference gradient suite", mgdil::cli::run_gradcheck);

  for (auto* g : {sub("graph-train", "Train the relation-aware graph stage", mgdil::cli::run_graph_train),
                  sub("graph-eval", "Evaluate the graph stage", mgdil::cli::run_graph_eval)}) {
    g->add_option("--checkpoint", o.checkpoint, "Checkpoint from `train` on a text corpus")->required();
    g->add_option("--corpus", o.corpus, "Instruction corpus (graph nodes)")->required();
    g->add_option("--edges", o.edges, "Edge list CSV (src,relation,dst)");
    g->add_option("--records", o.records, "Unified records; relations become edges");
    if (g->get_name() == "graph-eval") {
      g->add_option("--gnn", o.gnn, "Model from `graph-train`")->required();
      g->add_option("--split", o.split, "target | source")->check(CLI::IsMember({"target", "source"}));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (*cfg_opt) o.config = config;
  if (*seed_opt) o.seed = seed;
  if (*variant_opt) o.variant = variant;
  if (*summ_opt) o.summarizer = summarizer;
  if (*enc_opt) o.encoder = encoder;
  using mgdil::log::Level;
  mgdil::log::set_min_level(level == "debug" ? Level::kDebug
                            : level == "warn" ? Level::kWarn
                            : level == "error" ? Level::kError
                                               : Level::kInfo);

  try {
    return handler(o);
  } catch (const mgdil::cli::UsageError& e) {
    mgdil::log::error("usage", {{"message", e.what()}});
    return 2;
  } catch (const mgdil::ConfigError& e) {
    mgdil::log::error("config", {{"message", e.what()}});
    return 2;
  } catch (const std::exception& e) {
    mgdil::log::error("failed", {{"message", e.what()}});
    return 1;
  }
}
