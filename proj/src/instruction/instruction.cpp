#include "mgdil/instruction/instruction.hpp"

#include <map>

#include "mgdil/util/error.hpp"
#include "mgdil/util/jsonl.hpp"
#include "mgdil/util/log.hpp"
#include "mgdil/util/utf8.hpp"

namespace mgdil::instruction {

const std::string kInstruction =
    "You are a social media account classification assistant. Please determine whether the given account is a "
    "human or a bot based on the provided account features.";

const std::string kInputIntro =
    "Below is structured information about a social media account. Please determine whether this account is a "
    "human or a bot based on this information.";

std::string_view variant_name(Variant v) { return v == Variant::kMetaData ? "metadata" : "meta-summary"; }

Variant parse_variant(std::string_view name) {
  if (name == "metadata") return Variant::kMetaData;
  if (name == "meta-summary") return Variant::kMetaSummary;
  throw ConfigError("variant must be 'metadata' or 'meta-summary', not '" + std::string(name) + "'");
}

const std::vector<std::string>& section_headers() {
  static const std::vector<std::string> h = [] {
    std::vector<std::string> out{"User ID"};
    for (auto c : {profile::Category::kBasic, profile::Category::kCompleteness, profile::Category::kTextStats,
                   profile::Category::kName, profile::Category::kLanguageGeo, profile::Category::kDescription}) {
      out.emplace_back(profile::category_header(c));
    }
    out.emplace_back("Posts Events");
    return out;
  }();
  return h;
}

std::string InstructionDoc::text() const { return instruction + "\n\n" + input; }

InstructionDoc build_instruction(const ingest::UserRecord& record, const profile::ProfileRendering& rendering,
                                 const std::optional<summary::PostSummary>& summary, Variant variant) {
  InstructionDoc doc;
  doc.user_id = record.user_id;
  doc.dataset_id = record.dataset_id;
  doc.variant = variant;
  doc.label = record.label;
  doc.domain_id = record.domain_id;
  doc.instruction = kInstruction;

  std::string events(profile::kPlaceholder);
  if (variant == Variant::kMetaSummary && summary) {
    events = "[Multi-Dimensional Summary]: " + summary::render_summary(*summary);
  }
  doc.input = kInputIntro + "\n\nUser ID: " + record.user_id + "\n\n" + rendering.text + "\n\nPosts Events: " + events;

  const std::size_t overhead = utf8::length(doc.instruction) + 2;
  const std::u32string input32 = utf8::decode(doc.input);
  if (overhead + input32.size() > kMaxDocChars) {
    const std::size_t keep = kMaxDocChars > overhead ? kMaxDocChars - overhead : 0;
    doc.input = utf8::encode(std::u32string_view(input32).substr(0, keep));
    doc.truncated = true;
    log::warn("instruction.truncated", {{"user_id", record.user_id}, {"chars", overhead + input32.size()}});
  }
  return doc;
}

nlohmann::json to_json(const InstructionDoc& d) {
  return {{"user_id", d.user_id},
          {"dataset_id", d.dataset_id},
          {"variant", variant_name(d.variant)},
          {"label", ingest::label_name(d.label)},
          {"domain_id", d.domain_id ? nlohmann::json(*d.domain_id) : nlohmann::json(nullptr)},
          {"truncated", d.truncated},
          {"instruction", d.instruction},
          {"input", d.input}};
}

InstructionDoc doc_from_json(const nlohmann::json& j) {
  InstructionDoc d;
  try {
    d.user_id = j.at("user_id").get<std::string>();
    d.dataset_id = j.at("dataset_id").get<std::string>();
    d.variant = parse_variant(j.at("variant").get<std::string>());
    d.label = ingest::parse_label_name(j.at("label").get<std::string>());
    if (!j.at("domain_id").is_null()) d.domain_id = j.at("domain_id").get<int>();
    d.truncated = j.value("truncated", false);
    d.instruction = j.at("instruction").get<std::string>();
    d.input = j.at("input").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad instruction doc: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(e.what());
  }
  return d;
}

void write_corpus(const std::filesystem::path& path, const std::vector<InstructionDoc>& docs) {
  std::string out;
  for (const auto& d : docs) out += jsonl::dump_line(to_json(d));
  jsonl::write_text(path, out);
}

std::vector<InstructionDoc> read_corpus(const std::filesystem::path& path) {
  std::vector<InstructionDoc> out;
  jsonl::for_each(path, [&](std::size_t line, const nlohmann::json& j) {
    try {
      out.push_back(doc_from_json(j));
    } catch (const ParseError& e) {
      throw ParseError(path.filename().string() + ": " + e.what(), line);
    }
  });
  return out;
}

nlohmann::json corpus_manifest(const std::vector<InstructionDoc>& docs, Variant variant) {
  std::map<std::string, std::map<std::string, std::size_t>> per_dataset;
  std::map<std::string, std::size_t> per_domain;
  std::size_t truncated = 0;
  for (const auto& d : docs) {
    ++per_dataset[d.dataset_id][std::string(ingest::label_name(d.label))];
    ++per_domain[d.domain_id ? std::to_string(*d.domain_id) : "none"];
    truncated += d.truncated ? 1 : 0;
  }
  return {{"variant", variant_name(variant)},
          {"documents", docs.size()},
          {"per_dataset", per_dataset},
          {"per_domain", per_domain},
          {"truncated", truncated}};
}

}  // namespace mgdil::instruction
