#pragma once

// Multi-seed training runs: the ablation grid, one-weight sweeps and
// mean +- std summaries.

#include <cstdint>
#include <string>
#include <vector>

#include "mgdil/bench/metrics.hpp"
#include "mgdil/dil/trainer.hpp"

namespace mgdil::bench {

struct RunResult {
  std::string name;
  std::uint64_t seed = 0;
  double lambda_adv = 0.0;
  double lambda_con = 0.0;
  EvalReport report;  // on the evaluation corpus
  double probe_accuracy = -1.0;  // -1 when no probe was requested
  std::size_t best_epoch = 0;
};

// Trains on `source` with `seed`, evaluates on `eval`. When `probe` is set,
// a domain probe is fitted on the source latents of the returned model.
RunResult run_once(const std::string& name, const dil::EncodedCorpus& source, const dil::EncodedCorpus& eval,
                   const dil::TrainConfig& config, std::uint64_t seed, bool probe);

struct AblationCell {
  std::string name;
  double lambda_adv = 0.0;
  double lambda_con = 0.0;
};

// full, W/O adversarial, W/O Contrast, W/O Adv. & Con.
std::vector<AblationCell> ablation_cells(const dil::TrainConfig& base);

// Every cell crossed with every seed of `config.seeds`, cell-major order.
// Independent runs execute on up to `threads` workers; each run is
// single-threaded, so results do not depend on `threads`.
std::vector<RunResult> ablation_run(const dil::EncodedCorpus& source, const dil::EncodedCorpus& eval,
                                    const dil::TrainConfig& config, bool probe, std::size_t threads = 0);

enum class SweepTarget { kAdv, kCon };

// Varies one weight over `values`, the other pinned at 0.2. One result per
// (value, seed), value-major.
std::vector<RunResult> sweep(const dil::EncodedCorpus& source, const dil::EncodedCorpus& eval,
                             const dil::TrainConfig& config, SweepTarget which, const std::vector<double>& values,
                             std::size_t threads = 0);

struct Summary {
  std::string name;
  double lambda_adv = 0.0;
  double lambda_con = 0.0;
  std::size_t runs = 0;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  double macro_f1_mean = 0.0;
  double macro_f1_std = 0.0;
  double probe_mean = -1.0;
  double probe_std = 0.0;
};

// Sample standard deviation (n - 1 denominator), 0 for a single run.
double mean_of(const std::vector<double>& v);
double std_of(const std::vector<double>& v);

// Groups consecutive results by name, preserving first-appearance order.
std::vector<Summary> summarize(const std::vector<RunResult>& runs);

std::string runs_csv(const std::vector<RunResult>& runs);
std::string summary_csv(const std::vector<Summary>& summaries);

}  // namespace mgdil::bench
