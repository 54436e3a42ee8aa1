#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mgdil/util/error.hpp"

namespace mgdil::cli {

// Bad flag combinations and missing inputs; main maps these to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct Options {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant;
  std::optional<std::string> summarizer;
  std::optional<std::string> encoder;
  std::filesystem::path out;

  std::filesystem::path registry;
  std::filesystem::path records;    // unified records (ingest output)
  std::filesystem::path summaries;  // summary sidecar
  std::filesystem::path corpus;     // instruction corpus
  std::filesystem::path checkpoint;
  std::filesystem::path gnn;
  std::filesystem::path edges;

  std::string split = "target";
  std::string which = "adv";
  std::vector<double> values;
  bool all_seeds = false;
  std::size_t threads = 0;
  std::size_t in_flight = 4;
};

int run_ingest(const Options& o);
int run_featurize(const Options& o);
int run_summarize(const Options& o);
int run_build(const Options& o);
int run_train(const Options& o);
int run_eval(const Options& o);
int run_ablate(const Options& o);
int run_sweep(const Options& o);
int run_probe(const Options& o);
int run_report(const Options& o);
int run_gradcheck(const Options& o);
int run_graph_train(const Options& o);
int run_graph_eval(const Options& o);

}  // namespace mgdil::cli
