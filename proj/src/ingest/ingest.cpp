#include "mgdil/ingest/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <future>
#include <random>
#include <set>
#include <unordered_map>

#include "mgdil/profile/fields.hpp"
#include "mgdil/util/config.hpp"
#include "mgdil/util/csv.hpp"
#include "mgdil/util/digest.hpp"
#include "mgdil/util/error.hpp"
#include "mgdil/util/log.hpp"
#include "mgdil/util/utf8.hpp"

namespace mgdil::ingest {

using nlohmann::json;

void SourceSchema::validate() const {
  if (dataset_id.empty()) throw ConfigError("source without dataset_id");
  if (id_column.empty()) throw ConfigError(dataset_id + ": id_column is empty");
  for (const auto& [column, field] : field_mappings) {
    if (!profile::raw_field_index(field)) {
      throw ConfigError(dataset_id + ": column '" + column + "' maps to unknown profile field '" + field + "'");
    }
  }
}

const SourceSchema& Registry::find(const std::string& dataset_id) const {
  for (const auto& s : sources) {
    if (s.dataset_id == dataset_id) return s;
  }
  throw ConfigError("unknown dataset_id '" + dataset_id + "'");
}

Registry registry_from_json(const json& root, const std::filesystem::path& base_dir) {
  Registry reg;
  const json* list = config::find(root, "source");
  if (list == nullptr || !list->is_array() || list->empty()) throw ConfigError("registry has no [[source]] entries");
  std::set<std::string> seen;
  for (const auto& s : *list) {
    SourceSchema schema;
    try {
      schema.dataset_id = s.at("dataset_id").get<std::string>();
      schema.release_year = s.at("release_year").get<int>();
      schema.path = s.at("path").get<std::string>();
      if (schema.path.is_relative()) schema.path = base_dir / schema.path;
      const std::string fmt =
          s.value("format", schema.path.extension() == ".jsonl" || schema.path.extension() == ".json" ? "jsonl" : "csv");
      if (fmt == "csv") {
        schema.format = SourceFormat::kCsv;
      } else if (fmt == "jsonl") {
        schema.format = SourceFormat::kJsonLines;
      } else {
        throw ConfigError(schema.dataset_id + ": format must be 'csv' or 'jsonl'");
      }
      schema.id_column = s.value("id_column", schema.id_column);
      if (s.contains("posts_column")) schema.posts_column = s.at("posts_column").get<std::string>();
      if (s.contains("relations_column")) schema.relations_column = s.at("relations_column").get<std::string>();
      if (s.contains("constant_label")) schema.constant_label = parse_label_name(s.at("constant_label").get<std::string>());
      schema.label_column = s.value("label_column", schema.label_column);
      if (s.contains("human_values")) schema.human_values = s.at("human_values").get<std::vector<std::string>>();
      if (s.contains("bot_values")) schema.bot_values = s.at("bot_values").get<std::vector<std::string>>();
      if (s.contains("null_tokens")) schema.null_tokens = s.at("null_tokens").get<std::vector<std::string>>();
      if (s.contains("columns")) {
        for (const auto& [column, field] : s.at("columns").items()) schema.field_mappings[column] = field.get<std::string>();
      }
    } catch (const json::exception& e) {
      throw ConfigError(std::string("registry entry: ") + e.what());
    } catch (const ParseError& e) {
      throw ConfigError(std::string("registry entry: ") + e.what());
    }
    schema.validate();
    if (!seen.insert(schema.dataset_id).second) throw ConfigError("duplicate dataset_id '" + schema.dataset_id + "'");
    reg.sources.push_back(std::move(schema));
  }
  return reg;
}

Registry load_registry(const std::filesystem::path& path) {
  return registry_from_json(config::load_toml(path), path.parent_path());
}

bool is_training_year(int release_year) { return release_year >= 2015 && release_year <= 2019; }

int assign_domain(int release_year) {
  if (release_year >= 2015 && release_year <= 2017) return 0;
  if (release_year == 2018) return 1;
  if (release_year == 2019) return 2;
  throw Error("target-period dataset; domain label undefined (release year " + std::to_string(release_year) + ")");
}

namespace {

// Row-level failure; turned into a Diagnostic by the caller.
struct RowError {
  std::string message;
};

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec == std::errc() && p == end) return v;
  // Some exports write counts as "705.0".
  double d = 0.0;
  auto [q, ec2] = std::from_chars(s.data(), end, d);
  if (ec2 == std::errc() && q == end && d == static_cast<double>(static_cast<std::int64_t>(d))) {
    return static_cast<std::int64_t>(d);
  }
  return std::nullopt;
}

std::optional<bool> parse_flag(std::string_view s) {
  const std::string lower = utf8::to_lower_ascii(s);
  if (lower == "true" || lower == "1") return true;
  if (lower == "false" || lower == "0") return false;
  return std::nullopt;
}

// Converts one source value into the typed representation of `kind`.
// Returns null for "no value".
json coerce(const json& v, profile::RawKind kind, const std::string& field) {
  if (v.is_null()) return nullptr;
  switch (kind) {
    case profile::RawKind::kInteger:
      if (v.is_number_integer()) return v.get<std::int64_t>();
      if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d == static_cast<double>(static_cast<std::int64_t>(d))) return static_cast<std::int64_t>(d);
      }
      if (v.is_string()) {
        const auto& s = v.get_ref<const std::string&>();
        if (s.empty()) return nullptr;
        if (auto i = parse_int(s)) return *i;
      }
      throw RowError{"field '" + field + "' is not an integer"};
    case profile::RawKind::kFlag:
      if (v.is_boolean()) return v.get<bool>();
      if (v.is_number_integer() && (v.get<std::int64_t>() == 0 || v.get<std::int64_t>() == 1)) {
        return v.get<std::int64_t>() == 1;
      }
      if (v.is_string()) {
        const auto& s = v.get_ref<const std::string&>();
        if (s.empty()) return nullptr;
        if (auto b = parse_flag(s)) return *b;
      }
      throw RowError{"field '" + field + "' is not a boolean"};
    case profile::RawKind::kText:
      if (v.is_string()) return v;
      throw RowError{"field '" + field + "' is not a string"};
  }
  return nullptr;
}

std::string label_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  return v.dump();
}

std::vector<std::string> parse_posts(const json& v) {
  if (v.is_null()) return {};
  json arr = v;
  if (v.is_string()) {
    if (v.get_ref<const std::string&>().empty()) return {};
    arr = json::parse(v.get<std::string>(), nullptr, false);
    if (arr.is_discarded()) throw RowError{"posts column is not a JSON array"};
  }
  if (!arr.is_array()) throw RowError{"posts column is not a JSON array"};
  std::vector<std::string> out;
  for (const auto& p : arr) {
    if (!p.is_string()) throw RowError{"post entries must be strings"};
    out.push_back(p.get<std::string>());
  }
  return out;
}

std::vector<Relation> parse_relations(const json& v) {
  if (v.is_null()) return {};
  json arr = v;
  if (v.is_string()) {
    if (v.get_ref<const std::string&>().empty()) return {};
    arr = json::parse(v.get<std::string>(), nullptr, false);
    if (arr.is_discarded()) throw RowError{"relations column is not a JSON array"};
  }
  if (!arr.is_array()) throw RowError{"relations column is not a JSON array"};
  std::vector<Relation> out;
  for (const auto& e : arr) {
    if (e.is_array() && e.size() == 2 && e[0].is_string() && e[1].is_string()) {
      out.push_back({e[0].get<std::string>(), e[1].get<std::string>()});
    } else if (e.is_object() && e.contains("type") && e.contains("target")) {
      out.push_back({e["type"].get<std::string>(), e["target"].get<std::string>()});
    } else {
      throw RowError{"relation entries must be [type, user_id] pairs"};
    }
  }
  return out;
}

// `get(column)` returns the raw cell, or null when the column is absent or
// holds a null token.
template <typename Getter>
UserRecord build_record(const SourceSchema& schema, Getter&& get) {
  UserRecord r;
  r.dataset_id = schema.dataset_id;
  r.release_year = schema.release_year;
  if (is_training_year(schema.release_year)) r.domain_id = assign_domain(schema.release_year);

  const json id = get(schema.id_column);
  if (id.is_string()) {
    r.user_id = id.get<std::string>();
  } else if (id.is_number_integer()) {
    r.user_id = std::to_string(id.get<std::int64_t>());
  } else if (!id.is_null()) {
    throw RowError{"user id is neither a string nor an integer"};
  }
  if (r.user_id.empty()) throw RowError{"missing user id"};

  if (schema.constant_label) {
    r.label = *schema.constant_label;
  } else {
    const json lv = get(schema.label_column);
    if (lv.is_null()) throw RowError{"missing label"};
    const std::string text = label_text(lv);
    if (std::find(schema.human_values.begin(), schema.human_values.end(), text) != schema.human_values.end()) {
      r.label = Label::kHuman;
    } else if (std::find(schema.bot_values.begin(), schema.bot_values.end(), text) != schema.bot_values.end()) {
      r.label = Label::kBot;
    } else {
      throw RowError{"unrecognized label '" + text + "'"};
    }
  }

  for (const auto& [column, field] : schema.field_mappings) {
    const auto kind = profile::kRawFields[*profile::raw_field_index(field)].kind;
    json v = coerce(get(column), kind, field);
    if (!v.is_null()) r.profile[field] = std::move(v);
  }
  if (schema.posts_column) r.posts = parse_posts(get(*schema.posts_column));
  if (schema.relations_column) r.relations = parse_relations(get(*schema.relations_column));
  return r;
}

bool is_null_token(const SourceSchema& schema, std::string_view cell) {
  return std::find(schema.null_tokens.begin(), schema.null_tokens.end(), cell) != schema.null_tokens.end();
}

ParseResult parse_csv(const std::filesystem::path& path, const SourceSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header || !header->well_formed) throw ParseError(path.filename().string() + ": missing CSV header", 1);
  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header->fields.size(); ++i) column.emplace(header->fields[i], i);
  if (!column.count(schema.id_column)) throw ConfigError(schema.dataset_id + ": id column '" + schema.id_column + "' not in header");
  if (!schema.constant_label && !column.count(schema.label_column)) {
    throw ConfigError(schema.dataset_id + ": label column '" + schema.label_column + "' not in header");
  }

  ParseResult out;
  while (auto row = reader.next()) {
    if (row->fields.size() == 1 && row->fields[0].empty()) continue;  // blank line
    try {
      if (!row->well_formed) throw RowError{"unterminated quoted field"};
      if (row->fields.size() != header->fields.size()) {
        throw RowError{"expected " + std::to_string(header->fields.size()) + " fields, found " +
                       std::to_string(row->fields.size())};
      }
      auto get = [&](const std::string& name) -> json {
        auto it = column.find(name);
        if (it == column.end()) return nullptr;
        const std::string& cell = row->fields[it->second];
        if (is_null_token(schema, cell)) return nullptr;
        return cell;
      };
      out.records.push_back(build_record(schema, get));
    } catch (const RowError& e) {
      out.skipped.push_back({schema.dataset_id, row->line, e.message});
    }
  }
  return out;
}

ParseResult parse_jsonl(const std::filesystem::path& path, const SourceSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  ParseResult out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      const json obj = json::parse(line, nullptr, false);
      if (obj.is_discarded()) throw RowError{"invalid JSON"};
      if (!obj.is_object()) throw RowError{"row is not a JSON object"};
      auto get = [&](const std::string& name) -> json {
        auto it = obj.find(name);
        if (it == obj.end()) return nullptr;
        if (it->is_string() && is_null_token(schema, it->get_ref<const std::string&>())) return nullptr;
        return *it;
      };
      out.records.push_back(build_record(schema, get));
    } catch (const RowError& e) {
      out.skipped.push_back({schema.dataset_id, line_no, e.message});
    } catch (const json::exception& e) {
      out.skipped.push_back({schema.dataset_id, line_no, e.what()});
    }
  }
  return out;
}

}  // namespace

ParseResult parse_source(const std::filesystem::path& path, const SourceSchema& schema) {
  schema.validate();
  ParseResult out = schema.format == SourceFormat::kCsv ? parse_csv(path, schema) : parse_jsonl(path, schema);
  for (const auto& d : out.skipped) {
    log::warn("ingest.row_skipped", {{"dataset_id", d.dataset_id}, {"line", d.line}, {"reason", d.message}});
  }
  return out;
}

ParseResult parse_source(const SourceSchema& schema) { return parse_source(schema.path, schema); }

std::vector<UserRecord> dedupe(std::vector<UserRecord> records) {
  auto earlier = [](const UserRecord& a, const UserRecord& b) {
    if (a.release_year != b.release_year) return a.release_year < b.release_year;
    return a.dataset_id < b.dataset_id;
  };
  std::unordered_map<std::string, std::size_t> keep;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto [it, fresh] = keep.emplace(records[i].user_id, i);
    if (fresh) continue;
    const UserRecord& held = records[it->second];
    if (held.label != records[i].label) {
      throw Error("user '" + records[i].user_id + "' is labeled " + std::string(label_name(held.label)) + " in " +
                  held.dataset_id + " but " + std::string(label_name(records[i].label)) + " in " +
                  records[i].dataset_id);
    }
    if (earlier(records[i], held)) it->second = i;
  }
  std::vector<UserRecord> out;
  out.reserve(keep.size());
  for (const auto& [id, i] : keep) out.push_back(std::move(records[i]));
  std::sort(out.begin(), out.end(), [](const UserRecord& a, const UserRecord& b) {
    return a.dataset_id != b.dataset_id ? a.dataset_id < b.dataset_id : a.user_id < b.user_id;
  });
  return out;
}

std::vector<UserRecord> balance(std::vector<UserRecord> records, std::uint64_t seed, const BalanceOptions& options) {
  std::map<std::string, std::vector<std::size_t>> bots_by_dataset;
  std::map<std::string, std::size_t> humans_by_dataset;
  std::size_t humans = 0, bots = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].label == Label::kHuman) {
      ++humans;
      ++humans_by_dataset[records[i].dataset_id];
    } else {
      ++bots;
      bots_by_dataset[records[i].dataset_id].push_back(i);
    }
  }
  if (humans == 0) throw Error("cannot balance: no majority target");
  const std::size_t target = std::min(bots, humans + options.slack);
  const std::size_t remove = bots - target;
  if (remove == 0) return records;

  // Surplus per dataset; total surplus >= remove because it bounds bots - humans.
  std::vector<std::pair<std::string, std::size_t>> surplus;
  std::size_t total_surplus = 0;
  for (const auto& [ds, idx] : bots_by_dataset) {
    const std::size_t h = humans_by_dataset.count(ds) ? humans_by_dataset.at(ds) : 0;
    const std::size_t s = idx.size() > h ? idx.size() - h : 0;
    surplus.emplace_back(ds, s);
    total_surplus += s;
  }

  // Largest-remainder apportionment of `remove` over the surpluses.
  std::vector<std::size_t> quota(surplus.size(), 0);
  std::vector<std::pair<std::uint64_t, std::size_t>> remainders;  // (remainder numerator, slot)
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < surplus.size(); ++k) {
    const unsigned __int128 num = static_cast<unsigned __int128>(remove) * surplus[k].second;
    quota[k] = static_cast<std::size_t>(num / total_surplus);
    remainders.emplace_back(static_cast<std::uint64_t>(num % total_surplus), k);
    assigned += quota[k];
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < remove; ++r) {
    ++quota[remainders[r].second];
    ++assigned;
  }

  std::vector<bool> drop(records.size(), false);
  for (std::size_t k = 0; k < surplus.size(); ++k) {
    std::vector<std::size_t> pool = bots_by_dataset.at(surplus[k].first);
    std::mt19937_64 rng(seed ^ digest::fnv1a64(surplus[k].first));
    // Partial Fisher-Yates: the first quota[k] slots become the removed set.
    for (std::size_t i = 0; i < quota[k]; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng() % (pool.size() - i));
      std::swap(pool[i], pool[j]);
      drop[pool[i]] = true;
    }
  }
  std::vector<UserRecord> out;
  out.reserve(records.size() - remove);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!drop[i]) out.push_back(std::move(records[i]));
  }
  return out;
}

std::vector<UserRecord> ingest_all(const Registry& registry, std::uint64_t seed, IngestSummary* summary,
                                   const BalanceOptions& options) {
  std::vector<std::future<ParseResult>> jobs;
  for (const auto& s : registry.sources) {
    jobs.push_back(std::async(std::launch::async, [&s] { return parse_source(s); }));
  }
  std::vector<UserRecord> merged;
  IngestSummary local;
  for (auto& job : jobs) {
    ParseResult r = job.get();
    local.parsed += r.records.size();
    std::move(r.records.begin(), r.records.end(), std::back_inserter(merged));
    std::move(r.skipped.begin(), r.skipped.end(), std::back_inserter(local.skipped));
  }
  merged = dedupe(std::move(merged));
  local.after_dedupe = merged.size();

  std::vector<UserRecord> train, eval;
  for (auto& r : merged) (is_training_year(r.release_year) ? train : eval).push_back(std::move(r));
  if (!train.empty()) train = balance(std::move(train), seed, options);
  std::move(eval.begin(), eval.end(), std::back_inserter(train));
  std::sort(train.begin(), train.end(), [](const UserRecord& a, const UserRecord& b) {
    return a.dataset_id != b.dataset_id ? a.dataset_id < b.dataset_id : a.user_id < b.user_id;
  });
  if (summary != nullptr) *summary = std::move(local);
  return train;
}

}  // namespace mgdil::ingest
