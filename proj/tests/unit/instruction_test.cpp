#include <random>

#include "doctest.h"
#include "mgdil/instruction/instruction.hpp"
#include "mgdil/util/error.hpp"
#include "testing.hpp"

using namespace mgdil;
using namespace mgdil::instruction;

namespace {

summary::PostSummary example_summary() {
  return summary::parse_summary_sentence(
      "Regarding content themes, the user's posts mainly revolve around Politics, Entertainment, and Lifestyle. The "
      "overall sentiment polarity is Neutral, with a dominant emotional tone of CalmOrObjective and "
      "EmotionalNonHostile. The text style is Casual. Functionally, the user appears to be engaged in "
      "OpinionsOrComplaints, RandomStatementsOrThoughts, and InformationSharing.");
}

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("meta-summary document layout") {
  const auto rec = testing::example_user();
  const auto rendering = profile::render_profile(rec);
  const auto doc = build_instruction(rec, rendering, example_summary(), Variant::kMetaSummary);
  CHECK(doc.instruction.rfind("You are a social media account classification assistant.", 0) == 0);
  CHECK(doc.input.find("User ID: u87470\n\n") != std::string::npos);
  CHECK(doc.input.find("Posts Events: [Multi-Dimensional Summary]: Regarding content themes") != std::string::npos);
  CHECK(doc.input.find(rendering.text) != std::string::npos);
  CHECK(doc.label == ingest::Label::kHuman);
  CHECK(doc.domain_id == 0);
  CHECK_FALSE(doc.truncated);
  CHECK(doc.text() == doc.instruction + "\n\n" + doc.input);

  std::size_t last = 0;
  for (const auto& h : section_headers()) {
    const std::string tag = h + ":";
    CHECK(count_of(doc.input, tag) == 1);
    const auto at = doc.input.find(tag);
    CHECK(at >= last);
    last = at;
  }
}

TEST_CASE("metadata document carries the placeholder") {
  const auto rec = testing::example_user();
  const auto rendering = profile::render_profile(rec);
  const auto doc = build_instruction(rec, rendering, example_summary(), Variant::kMetaData);
  CHECK(doc.input.find("Posts Events: unavailable") != std::string::npos);
  CHECK(doc.input.find("Multi-Dimensional Summary") == std::string::npos);
  const auto no_posts = build_instruction(rec, rendering, std::nullopt, Variant::kMetaSummary);
  CHECK(no_posts.input.substr(no_posts.input.size() - 25) == "Posts Events: unavailable");
}

TEST_CASE("documents are deterministic and distinct per user") {
  auto a = testing::example_user();
  auto b = a;
  b.user_id = "u87471";
  const auto ra = profile::render_profile(a);
  const auto d1 = build_instruction(a, ra, example_summary(), Variant::kMetaSummary);
  const auto d2 = build_instruction(a, ra, example_summary(), Variant::kMetaSummary);
  CHECK(d1 == d2);
  CHECK(to_json(d1).dump() == to_json(d2).dump());
  const auto d3 = build_instruction(b, profile::render_profile(b), example_summary(), Variant::kMetaSummary);
  CHECK(d3.text() != d1.text());
}

TEST_CASE("long documents are tail-truncated") {
  auto rec = testing::example_user();
  rec.profile["description"] = std::string(10000, 'x');
  const auto doc = build_instruction(rec, profile::render_profile(rec), std::nullopt, Variant::kMetaData);
  CHECK(doc.truncated);
  CHECK(doc.instruction.size() + 2 + doc.input.size() == kMaxDocChars);
  CHECK(doc.input.rfind(kInputIntro, 0) == 0);
}

TEST_CASE("variant names") {
  CHECK(parse_variant("metadata") == Variant::kMetaData);
  CHECK(parse_variant("meta-summary") == Variant::kMetaSummary);
  CHECK(variant_name(Variant::kMetaSummary) == "meta-summary");
  CHECK_THROWS_AS(parse_variant("both"), ConfigError);
}

TEST_CASE("corpus round trip") {
  testing::TempDir dir;
  write_corpus(dir / "empty.jsonl", {});
  CHECK(testing::slurp(dir / "empty.jsonl").empty());
  CHECK(read_corpus(dir / "empty.jsonl").empty());

  std::mt19937_64 rng(4);
  std::vector<InstructionDoc> docs;
  for (int i = 0; i < 100; ++i) {
    InstructionDoc d;
    d.user_id = "u" + std::to_string(rng() % 100000);
    d.dataset_id = rng() % 2 ? "a" : "b";
    d.variant = rng() % 2 ? Variant::kMetaData : Variant::kMetaSummary;
    d.instruction = kInstruction;
    d.input = "line one\nline \"two\" \xC3\xA8 " + std::to_string(rng());
    d.label = rng() % 2 ? ingest::Label::kBot : ingest::Label::kHuman;
    if (rng() % 3) d.domain_id = static_cast<int>(rng() % 3);
    d.truncated = rng() % 5 == 0;
    docs.push_back(d);
  }
  write_corpus(dir / "c.jsonl", docs);
  CHECK(count_of(testing::slurp(dir / "c.jsonl"), "\n") == 100);
  CHECK(read_corpus(dir / "c.jsonl") == docs);

  testing::spit(dir / "bad.jsonl", testing::slurp(dir / "c.jsonl") + "{\"user_id\": \"x\"}\n");
  try {
    read_corpus(dir / "bad.jsonl");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 101);
  }
}

TEST_CASE("corpus manifest counts") {
  const auto rec = testing::example_user();
  const auto r = profile::render_profile(rec);
  std::vector<InstructionDoc> docs{build_instruction(rec, r, std::nullopt, Variant::kMetaData),
                                   build_instruction(rec, r, std::nullopt, Variant::kMetaData)};
  docs[1].label = ingest::Label::kBot;
  docs[1].domain_id.reset();
  const auto m = corpus_manifest(docs, Variant::kMetaData);
  CHECK(m.at("variant") == "metadata");
  CHECK(m.at("documents") == 2);
  CHECK(m.at("per_dataset").at("cresci-15").at("human") == 1);
  CHECK(m.at("per_dataset").at("cresci-15").at("bot") == 1);
  CHECK(m.at("per_domain").at("0") == 1);
  CHECK(m.at("per_domain").at("none") == 1);
}
