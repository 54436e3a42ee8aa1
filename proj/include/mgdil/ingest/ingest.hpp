#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mgdil/ingest/record.hpp"

namespace mgdil::ingest {

enum class SourceFormat { kCsv, kJsonLines };

// How a source file maps onto UserRecord. Column names are CSV header names
// or top-level JSON keys.
struct SourceSchema {
  std::string dataset_id;
  int release_year = 0;
  std::filesystem::path path;
  SourceFormat format = SourceFormat::kCsv;
  std::string id_column = "id";
  std::map<std::string, std::string> field_mappings;  // source column -> raw field id
  std::optional<std::string> posts_column;      // JSON array of strings
  std::optional<std::string> relations_column;  // JSON array of [type, user_id]
  // Labels: either every row has `constant_label`, or `label_column` is read
  // and compared against the two value lists.
  std::optional<Label> constant_label;
  std::string label_column = "label";
  std::vector<std::string> human_values = {"human", "0"};
  std::vector<std::string> bot_values = {"bot", "1"};
  // Cells equal to one of these are treated as missing.
  std::vector<std::string> null_tokens;

  // Throws ConfigError when a mapping targets an unknown field.
  void validate() const;
};

struct Registry {
  std::vector<SourceSchema> sources;

  const SourceSchema& find(const std::string& dataset_id) const;  // ConfigError when unknown
};

// Reads `[[source]]` tables. Relative paths resolve against the registry
// file's directory.
Registry load_registry(const std::filesystem::path& path);
Registry registry_from_json(const nlohmann::json& root, const std::filesystem::path& base_dir);

struct Diagnostic {
  std::string dataset_id;
  std::size_t line = 0;
  std::string message;
};

struct ParseResult {
  std::vector<UserRecord> records;
  std::vector<Diagnostic> skipped;
};

// One record per well-formed row; malformed rows are skipped with a
// diagnostic. Domain ids are assigned for training-period years.
ParseResult parse_source(const std::filesystem::path& path, const SourceSchema& schema);
ParseResult parse_source(const SourceSchema& schema);

// Keeps the copy from the earliest release year per user_id (ties broken by
// dataset_id). Output is sorted by (dataset_id, user_id). Throws Error when
// duplicates disagree on the label.
std::vector<UserRecord> dedupe(std::vector<UserRecord> records);

struct BalanceOptions {
  std::size_t slack = 2;
};

// Keeps every human and removes bots until |bots| <= |humans| + slack. The
// removal quota is split across datasets in proportion to each dataset's bot
// surplus (largest remainder), then drawn uniformly within the dataset.
std::vector<UserRecord> balance(std::vector<UserRecord> records, std::uint64_t seed, const BalanceOptions& options = {});

// 2015-2017 -> 0, 2018 -> 1, 2019 -> 2; throws Error otherwise.
int assign_domain(int release_year);
bool is_training_year(int release_year);

struct IngestSummary {
  std::vector<Diagnostic> skipped;
  std::size_t parsed = 0;
  std::size_t after_dedupe = 0;
};

// Parses every registry source in parallel, dedupes the union, and balances
// the training-period records. Evaluation-period records pass through.
std::vector<UserRecord> ingest_all(const Registry& registry, std::uint64_t seed, IngestSummary* summary = nullptr,
                                   const BalanceOptions& options = {});

}  // namespace mgdil::ingest
