#pragma once

// Dataset-level tallies of post-summary labels and per-experiment run
// manifests.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "mgdil/ingest/record.hpp"
#include "mgdil/summary/summary.hpp"

namespace mgdil::bench {

struct LabeledSummary {
  summary::PostSummary summary;
  ingest::Label label = ingest::Label::kHuman;
  std::string dataset_id;
};

struct DistributionRow {
  std::string dataset_id;
  ingest::Label label = ingest::Label::kHuman;
  summary::Dimension dimension = summary::Dimension::kTheme;
  std::string category;
  std::size_t count = 0;  // users carrying the category
  std::size_t users = 0;  // users in the (dataset, label) cell
  double frequency = 0.0;  // count / users
};

// One row per vocabulary category for every (dataset, label) cell that has
// users, ordered by dataset, label (human first), dimension, vocabulary.
// A user's labels count once each, so a (dataset, label, dimension) block
// sums to label assignments / users.
std::vector<DistributionRow> distribution_report(const std::vector<LabeledSummary>& entries);
std::string distribution_csv(const std::vector<DistributionRow>& rows);

struct ManifestFile {
  std::filesystem::path path;
  std::string digest;  // git blob id of the contents
};
ManifestFile manifest_file(const std::filesystem::path& path);

// No timestamps, so reruns on identical inputs give identical manifests.
nlohmann::json run_manifest(const std::string& command, const nlohmann::json& config,
                            const std::vector<std::uint64_t>& seeds, const std::vector<std::filesystem::path>& inputs,
                            const std::vector<std::filesystem::path>& outputs);

}  // namespace mgdil::bench
