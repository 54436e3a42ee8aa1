#include "mgdil/ingest/record.hpp"

#include <sstream>

#include "mgdil/profile/fields.hpp"
#include "mgdil/util/error.hpp"
#include "mgdil/util/jsonl.hpp"

namespace mgdil::ingest {

std::string_view label_name(Label label) { return label == Label::kHuman ? "human" : "bot"; }

Label parse_label_name(std::string_view name) {
  if (name == "human") return Label::kHuman;
  if (name == "bot") return Label::kBot;
  throw ParseError("unknown label '" + std::string(name) + "'");
}

nlohmann::json to_json(const UserRecord& r) {
  nlohmann::json profile = nlohmann::json::object();
  for (const auto& [k, v] : r.profile) profile[k] = v;
  nlohmann::json relations = nlohmann::json::array();
  for (const auto& rel : r.relations) relations.push_back({rel.type, rel.target});
  return {{"user_id", r.user_id},
          {"dataset_id", r.dataset_id},
          {"release_year", r.release_year},
          {"label", label_name(r.label)},
          {"domain_id", r.domain_id ? nlohmann::json(*r.domain_id) : nlohmann::json(nullptr)},
          {"profile", profile},
          {"posts", r.posts},
          {"relations", relations}};
}

namespace {

const nlohmann::json& require(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("record is missing '") + key + "'");
  return *it;
}

}  // namespace

UserRecord record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("record is not an object");
  UserRecord r;
  try {
    r.user_id = require(j, "user_id").get<std::string>();
    r.dataset_id = require(j, "dataset_id").get<std::string>();
    r.release_year = require(j, "release_year").get<int>();
    r.label = parse_label_name(require(j, "label").get<std::string>());
    const auto& dom = require(j, "domain_id");
    if (!dom.is_null()) r.domain_id = dom.get<int>();
    for (const auto& [k, v] : require(j, "profile").items()) {
      const auto idx = profile::raw_field_index(k);
      if (!idx) throw ParseError("unknown profile field '" + k + "'");
      if (v.is_null()) continue;
      switch (profile::kRawFields[*idx].kind) {
        case profile::RawKind::kInteger:
          if (!v.is_number_integer()) throw ParseError("profile field '" + k + "' must be an integer");
          break;
        case profile::RawKind::kFlag:
          if (!v.is_boolean()) throw ParseError("profile field '" + k + "' must be a boolean");
          break;
        case profile::RawKind::kText:
          if (!v.is_string()) throw ParseError("profile field '" + k + "' must be a string");
          break;
      }
      r.profile.emplace(k, v);
    }
    r.posts = require(j, "posts").get<std::vector<std::string>>();
    for (const auto& rel : require(j, "relations")) {
      if (!rel.is_array() || rel.size() != 2) throw ParseError("relation must be a [type, user_id] pair");
      r.relations.push_back({rel[0].get<std::string>(), rel[1].get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad record: ") + e.what());
  }
  if (r.user_id.empty()) throw ParseError("record has an empty user_id");
  if (r.domain_id && (*r.domain_id < 0 || *r.domain_id >= kDomainCount)) throw ParseError("domain_id out of range");
  return r;
}

void write_records(const std::filesystem::path& path, const std::vector<UserRecord>& records) {
  std::string out;
  for (const auto& r : records) out += jsonl::dump_line(to_json(r));
  jsonl::write_text(path, out);
}

std::vector<UserRecord> read_records(const std::filesystem::path& path) {
  std::vector<UserRecord> out;
  jsonl::for_each(path, [&](std::size_t line, const nlohmann::json& j) {
    try {
      out.push_back(record_from_json(j));
    } catch (const ParseError& e) {
      throw ParseError(path.filename().string() + ": " + e.what(), line);
    }
  });
  return out;
}

}  // namespace mgdil::ingest
