#pragma once

// Instruction documents: fixed preamble, then an input block with the user
// id, the rendered profile and the post summary.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mgdil/ingest/record.hpp"
#include "mgdil/profile/profile.hpp"
#include "mgdil/summary/summary.hpp"

namespace mgdil::instruction {

enum class Variant { kMetaData, kMetaSummary };

std::string_view variant_name(Variant v);  // "metadata" | "meta-summary"
Variant parse_variant(std::string_view name);

extern const std::string kInstruction;
extern const std::string kInputIntro;

// Documents are capped at 2048 tokens, approximated as 4 characters each.
inline constexpr std::size_t kMaxDocChars = 8192;

struct InstructionDoc {
  std::string user_id;
  std::string dataset_id;
  Variant variant = Variant::kMetaData;
  std::string instruction;
  std::string input;
  ingest::Label label = ingest::Label::kHuman;
  std::optional<int> domain_id;
  bool truncated = false;

  // instruction + "\n\n" + input, the text handed to the encoder.
  std::string text() const;
  bool operator==(const InstructionDoc&) const = default;
};

// Section headers in document order.
const std::vector<std::string>& section_headers();

// `summary` is ignored for the MetaData variant; a Meta-Summary document
// without one (no posts) shows the placeholder.
InstructionDoc build_instruction(const ingest::UserRecord& record, const profile::ProfileRendering& rendering,
                                 const std::optional<summary::PostSummary>& summary, Variant variant);

nlohmann::json to_json(const InstructionDoc& doc);
InstructionDoc doc_from_json(const nlohmann::json& j);

void write_corpus(const std::filesystem::path& path, const std::vector<InstructionDoc>& docs);
std::vector<InstructionDoc> read_corpus(const std::filesystem::path& path);

// Variant, per-dataset label counts, per-domain counts and truncations.
nlohmann::json corpus_manifest(const std::vector<InstructionDoc>& docs, Variant variant);

}  // namespace mgdil::instruction
