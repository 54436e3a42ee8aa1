#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace mgdil::ingest {

enum class Label { kHuman = 0, kBot = 1 };

inline constexpr int kDomainCount = 3;

struct Relation {
  std::string type;
  std::string target;  // neighbor user_id
  bool operator==(const Relation&) const = default;
};

// One account in the unified format. `profile` holds only present raw
// fields (see profile/fields.hpp); a key that is missing means the source
// had no value. Integers are int64, flags bool, text fields string.
struct UserRecord {
  std::string user_id;
  std::string dataset_id;
  int release_year = 0;
  Label label = Label::kHuman;
  std::optional<int> domain_id;  // unset for evaluation-period sources
  std::map<std::string, nlohmann::json> profile;
  std::vector<std::string> posts;
  std::vector<Relation> relations;

  bool operator==(const UserRecord&) const = default;
};

std::string_view label_name(Label label);
Label parse_label_name(std::string_view name);

nlohmann::json to_json(const UserRecord& record);
// Throws ParseError on missing or mistyped keys.
UserRecord record_from_json(const nlohmann::json& j);

void write_records(const std::filesystem::path& path, const std::vector<UserRecord>& records);
std::vector<UserRecord> read_records(const std::filesystem::path& path);

}  // namespace mgdil::ingest
