#pragma once

// Five-dimension post-history summary: the closed label vocabulary, the
// fixed one-sentence grammar, and the deterministic offline summarizer.

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mgdil/util/error.hpp"

namespace mgdil::summary {

enum class Dimension { kTheme, kSentiment, kEmotion, kStyle, kFunction };

inline constexpr std::array<Dimension, 5> kDimensions{Dimension::kTheme, Dimension::kSentiment, Dimension::kEmotion,
                                                      Dimension::kStyle, Dimension::kFunction};

// Short bracket names used in errors and reports: theme, sent, emo, style, func.
std::string_view dimension_name(Dimension d);

// Labels in vocabulary order; case-sensitive.
const std::vector<std::string>& vocabulary(Dimension d);
bool in_vocabulary(Dimension d, std::string_view label);

inline constexpr std::size_t kMaxLabels = 3;

struct PostSummary {
  std::array<std::vector<std::string>, 5> labels;  // indexed by Dimension

  std::vector<std::string>& operator[](Dimension d) { return labels[static_cast<std::size_t>(d)]; }
  const std::vector<std::string>& operator[](Dimension d) const { return labels[static_cast<std::size_t>(d)]; }
  bool operator==(const PostSummary&) const = default;

  // Throws Error unless every dimension has 1-3 distinct vocabulary labels.
  void validate() const;
};

// Names the bracket that failed: a dimension name, or "sentence" when the
// text does not start with the fixed opening.
class SummaryParseError : public ParseError {
 public:
  SummaryParseError(std::string bracket, const std::string& what)
      : ParseError("bracket '" + bracket + "': " + what), bracket_(std::move(bracket)) {}
  const std::string& bracket() const noexcept { return bracket_; }

 private:
  std::string bracket_;
};

// Canonical sentence. Two labels join with " and ", three as "A, B, and C".
std::string render_summary(const PostSummary& summary);

// Accepts the canonical form plus: surrounding whitespace or double quotes,
// "sentiment tendency" for "sentiment polarity", square brackets around a
// label list, and ",", ", ", " and ", ", and " as label separators.
PostSummary parse_summary_sentence(std::string_view text);

// --- prompt ---

inline constexpr std::size_t kDefaultPromptBudget = 8000;

// Loads the template with its {posts_content} placeholder.
std::string load_prompt_template(const std::filesystem::path& path);
const std::string& default_prompt_template();

// Posts are treated as oldest first; the oldest are dropped until the joined
// text fits `budget` characters (Unicode scalars). A single post longer than
// the budget keeps its tail.
std::string build_prompt(const std::vector<std::string>& posts, const std::string& prompt_template,
                         std::size_t budget = kDefaultPromptBudget);
std::string build_prompt(const std::vector<std::string>& posts);

// --- offline summarizer ---

struct FallbackRules {
  // Keyword phrases per (dimension, label); normalized with text::normalize_words.
  std::array<std::vector<std::pair<std::string, std::vector<std::string>>>, 5> keywords;
  std::array<std::size_t, 5> top_k{3, 1, 2, 2, 3};

  static FallbackRules load(const std::filesystem::path& path);
  static const FallbackRules& defaults();  // <data>/lexicons/summary_rules.tsv
};

// Default labels when nothing scores in a dimension.
const PostSummary& fallback_defaults();

// Per-dimension label scores from lexicon hits and structural signals.
std::array<std::vector<double>, 5> fallback_scores(const std::vector<std::string>& posts, const FallbackRules& rules);

PostSummary fallback_summarize(const std::vector<std::string>& posts,
                               const FallbackRules& rules = FallbackRules::defaults());

// --- sidecar files ---

nlohmann::json to_json(const PostSummary& s);  // {"theme": [...], ..., "sentence": "..."}
PostSummary summary_from_json(const nlohmann::json& j);

// One {"user_id", "summary"} object per line, in the given order.
void write_summaries(const std::filesystem::path& path,
                     const std::vector<std::pair<std::string, PostSummary>>& summaries);
std::map<std::string, PostSummary> read_summaries(const std::filesystem::path& path);

}  // namespace mgdil::summary
