#include "mgdil/summary/summary.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "mgdil/profile/profile.hpp"
#include "mgdil/util/config.hpp"
#include "mgdil/util/jsonl.hpp"
#include "mgdil/util/text.hpp"
#include "mgdil/util/utf8.hpp"

namespace mgdil::summary {

namespace {

std::size_t idx(Dimension d) { return static_cast<std::size_t>(d); }

const std::array<std::vector<std::string>, 5>& vocab_table() {
  static const std::array<std::vector<std::string>, 5> v{{
      {"Politics", "Business", "Entertainment", "Lifestyle", "Technology", "Cryptocurrency", "Sports", "Culture"},
      {"Positive", "Neutral", "Negative", "Mixed"},
      {"CalmOrObjective", "EmotionalNonHostile", "HostileOrAggressive", "MixedOrUnclear"},
      {"Casual", "Formal", "MechanicalOrTemplateLike", "Aggressive"},
      {"InformationSharing", "SelfPromotion", "OpinionsOrComplaints", "RandomStatementsOrThoughts", "MeNow",
       "QuestionsToFollowers", "PresenceMaintenance", "Anecdote"},
  }};
  return v;
}

}  // namespace

std::string_view dimension_name(Dimension d) {
  switch (d) {
    case Dimension::kTheme: return "theme";
    case Dimension::kSentiment: return "sent";
    case Dimension::kEmotion: return "emo";
    case Dimension::kStyle: return "style";
    case Dimension::kFunction: return "func";
  }
  return "";
}

const std::vector<std::string>& vocabulary(Dimension d) { return vocab_table()[idx(d)]; }

bool in_vocabulary(Dimension d, std::string_view label) {
  const auto& v = vocabulary(d);
  return std::find(v.begin(), v.end(), label) != v.end();
}

void PostSummary::validate() const {
  for (Dimension d : kDimensions) {
    const auto& ls = (*this)[d];
    const std::string name(dimension_name(d));
    if (ls.empty() || ls.size() > kMaxLabels) throw Error("summary bracket '" + name + "' needs 1-3 labels");
    std::set<std::string> seen;
    for (const auto& l : ls) {
      if (!in_vocabulary(d, l)) throw Error("summary bracket '" + name + "' has unknown label '" + l + "'");
      if (!seen.insert(l).second) throw Error("summary bracket '" + name + "' repeats '" + l + "'");
    }
  }
}

// ---------------------------------------------------------------------------
// Sentence grammar

namespace {

constexpr std::string_view kOpen = "Regarding content themes, the user's posts mainly revolve around ";
constexpr std::string_view kSentPolarity = ". The overall sentiment polarity is ";
constexpr std::string_view kSentTendency = ". The overall sentiment tendency is ";
constexpr std::string_view kEmo = ", with a dominant emotional tone of ";
constexpr std::string_view kStyle = ". The text style is ";
constexpr std::string_view kFunc = ". Functionally, the user appears to be engaged in ";

std::string join_labels(const std::vector<std::string>& ls) {
  if (ls.size() == 1) return ls[0];
  if (ls.size() == 2) return ls[0] + " and " + ls[1];
  std::string out;
  for (std::size_t i = 0; i + 1 < ls.size(); ++i) out += ls[i] + ", ";
  return out + "and " + ls.back();
}

std::vector<std::string> split_labels(std::string_view raw, Dimension d) {
  const std::string bracket(dimension_name(d));
  std::string body = text::trim(raw);
  if (body.size() >= 2 && body.front() == '[' && body.back() == ']') body = text::trim(body.substr(1, body.size() - 2));
  if (body.empty()) throw SummaryParseError(bracket, "no labels");

  std::vector<std::string> pieces;
  std::stringstream ss(body);
  std::string part;
  while (std::getline(ss, part, ',')) pieces.push_back(part);
  if (!body.empty() && body.back() == ',') pieces.emplace_back();

  std::vector<std::string> out;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    std::string p = text::trim(pieces[i]);
    if (i > 0 && p.rfind("and ", 0) == 0) p = text::trim(p.substr(4));
    // "A and B" inside one comma piece.
    std::size_t start = 0;
    for (;;) {
      const auto pos = p.find(" and ", start);
      std::string label = text::trim(p.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
      if (label.empty()) throw SummaryParseError(bracket, "empty label in '" + body + "'");
      out.push_back(std::move(label));
      if (pos == std::string::npos) break;
      start = pos + 5;
    }
  }
  if (out.size() > kMaxLabels) throw SummaryParseError(bracket, "more than 3 labels");
  std::set<std::string> seen;
  for (const auto& l : out) {
    if (!in_vocabulary(d, l)) throw SummaryParseError(bracket, "unknown label '" + l + "'");
    if (!seen.insert(l).second) throw SummaryParseError(bracket, "duplicate label '" + l + "'");
  }
  return out;
}

// Finds `lit` starting at or after `from`; the text between is the bracket.
std::string_view take_until(std::string_view s, std::size_t& from, std::string_view lit, Dimension d) {
  const auto pos = s.find(lit, from);
  if (pos == std::string_view::npos) {
    throw SummaryParseError(std::string(dimension_name(d)), "expected \"" + text::trim(lit) + "\" after the labels");
  }
  std::string_view out = s.substr(from, pos - from);
  from = pos + lit.size();
  return out;
}

}  // namespace

std::string render_summary(const PostSummary& s) {
  std::string out(kOpen);
  out += join_labels(s[Dimension::kTheme]);
  out += kSentPolarity;
  out += join_labels(s[Dimension::kSentiment]);
  out += kEmo;
  out += join_labels(s[Dimension::kEmotion]);
  out += kStyle;
  out += join_labels(s[Dimension::kStyle]);
  out += kFunc;
  out += join_labels(s[Dimension::kFunction]);
  out += '.';
  return out;
}

PostSummary parse_summary_sentence(std::string_view input) {
  std::string owned = text::trim(input);
  if (owned.size() >= 2 && owned.front() == '"' && owned.back() == '"') owned = text::trim(owned.substr(1, owned.size() - 2));
  const std::string_view s = owned;
  if (s.substr(0, kOpen.size()) != kOpen) throw SummaryParseError("sentence", "does not start with the theme clause");
  std::size_t at = kOpen.size();
  PostSummary out;

  // The sentiment clause has two accepted spellings; take whichever comes first.
  {
    const auto p1 = s.find(kSentPolarity, at), p2 = s.find(kSentTendency, at);
    const auto pos = std::min(p1, p2);
    if (pos == std::string_view::npos) throw SummaryParseError("theme", "expected \"The overall sentiment polarity is\"");
    out[Dimension::kTheme] = split_labels(s.substr(at, pos - at), Dimension::kTheme);
    at = pos + kSentPolarity.size();  // both spellings have the same length
  }
  out[Dimension::kSentiment] = split_labels(take_until(s, at, kEmo, Dimension::kSentiment), Dimension::kSentiment);
  out[Dimension::kEmotion] = split_labels(take_until(s, at, kStyle, Dimension::kEmotion), Dimension::kEmotion);
  out[Dimension::kStyle] = split_labels(take_until(s, at, kFunc, Dimension::kStyle), Dimension::kStyle);
  std::string_view tail = s.substr(at);
  if (tail.empty() || tail.back() != '.') throw SummaryParseError("func", "sentence must end with '.'");
  out[Dimension::kFunction] = split_labels(tail.substr(0, tail.size() - 1), Dimension::kFunction);
  return out;
}

// ---------------------------------------------------------------------------
// Prompt

std::string load_prompt_template(const std::filesystem::path& path) {
  std::string t = jsonl::read_text(path);
  if (t.find("{posts_content}") == std::string::npos) {
    throw ConfigError(path.string() + ": prompt template lacks {posts_content}");
  }
  return t;
}

const std::string& default_prompt_template() {
  static const std::string t = load_prompt_template(config::default_data_dir() / "prompts" / "summary_prompt.txt");
  return t;
}

std::string build_prompt(const std::vector<std::string>& posts, const std::string& prompt_template, std::size_t budget) {
  if (posts.empty()) throw Error("no history to summarize");
  std::vector<std::size_t> lengths;
  for (const auto& p : posts) lengths.push_back(utf8::length(p));
  // Keep the newest suffix of posts whose joined length (with newlines) fits.
  std::size_t first = posts.size() - 1, total = lengths.back();
  while (first > 0 && total + 1 + lengths[first - 1] <= budget) total += 1 + lengths[--first];
  std::string content;
  if (total > budget) {
    const std::u32string last = utf8::decode(posts.back());
    content = utf8::encode(std::u32string_view(last).substr(last.size() - budget));
  } else {
    for (std::size_t i = first; i < posts.size(); ++i) {
      if (i > first) content += '\n';
      content += posts[i];
    }
  }
  std::string out = prompt_template;
  out.replace(out.find("{posts_content}"), std::string_view("{posts_content}").size(), content);
  return out;
}

std::string build_prompt(const std::vector<std::string>& posts) { return build_prompt(posts, default_prompt_template()); }

// ---------------------------------------------------------------------------
// Fallback summarizer

FallbackRules FallbackRules::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  FallbackRules rules;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = text::trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    const std::string where = path.filename().string() + " line " + std::to_string(line_no);
    if (cols.size() != 3) throw ConfigError(where + ": expected dimension<TAB>label<TAB>keywords");
    std::optional<Dimension> dim;
    for (Dimension d : kDimensions) {
      if (dimension_name(d) == cols[0]) dim = d;
    }
    if (!dim) throw ConfigError(where + ": unknown dimension '" + cols[0] + "'");
    if (!in_vocabulary(*dim, cols[1])) throw ConfigError(where + ": unknown label '" + cols[1] + "'");
    std::vector<std::string> kws;
    std::stringstream ks(cols[2]);
    std::string kw;
    while (std::getline(ks, kw, ',')) {
      const std::string norm = text::normalize_words(kw);
      if (norm.size() > 2) kws.push_back(norm);
    }
    rules.keywords[idx(*dim)].emplace_back(cols[1], std::move(kws));
  }
  return rules;
}

const FallbackRules& FallbackRules::defaults() {
  static const FallbackRules r = load(config::default_data_dir() / "lexicons" / "summary_rules.tsv");
  return r;
}

const PostSummary& fallback_defaults() {
  static const PostSummary s = [] {
    PostSummary d;
    d[Dimension::kTheme] = {"Lifestyle"};
    d[Dimension::kSentiment] = {"Neutral"};
    d[Dimension::kEmotion] = {"MixedOrUnclear"};
    d[Dimension::kStyle] = {"Casual"};
    d[Dimension::kFunction] = {"RandomStatementsOrThoughts"};
    return d;
  }();
  return s;
}

namespace {

std::size_t label_index(Dimension d, std::string_view label) {
  const auto& v = vocabulary(d);
  return static_cast<std::size_t>(std::find(v.begin(), v.end(), label) - v.begin());
}

std::size_t lexicon_hits(const FallbackRules& rules, Dimension d, std::string_view label, const std::string& norm) {
  std::size_t n = 0;
  for (const auto& [l, kws] : rules.keywords[idx(d)]) {
    if (l != label) continue;
    for (const auto& kw : kws) n += text::count_phrase(norm, kw);
  }
  return n;
}

// First few words of a post; posts sharing it look generated from a template.
std::string template_prefix(const std::string& norm) {
  std::string p = text::trim(norm);
  std::size_t words = 0, pos = 0;
  while (pos < p.size() && words < 3) {
    pos = p.find(' ', pos);
    if (pos == std::string::npos) break;
    ++words;
    ++pos;
  }
  return words < 3 ? p : p.substr(0, pos - 1);
}

}  // namespace

std::array<std::vector<double>, 5> fallback_scores(const std::vector<std::string>& posts, const FallbackRules& rules) {
  std::array<std::vector<double>, 5> score;
  for (Dimension d : kDimensions) score[idx(d)].assign(vocabulary(d).size(), 0.0);
  auto add = [&](Dimension d, std::string_view label, double v) { score[idx(d)][label_index(d, label)] += v; };

  std::map<std::string, std::size_t> prefix_counts;
  std::vector<std::string> norms;
  for (const auto& p : posts) {
    norms.push_back(text::normalize_words(p));
    const std::string pre = template_prefix(norms.back());
    if (!pre.empty()) ++prefix_counts[pre];
  }

  for (std::size_t i = 0; i < posts.size(); ++i) {
    const std::string& post = posts[i];
    const std::string& norm = norms[i];
    bool other_signal = false;
    for (Dimension d : {Dimension::kTheme, Dimension::kStyle, Dimension::kFunction}) {
      for (const auto& label : vocabulary(d)) {
        const std::size_t h = lexicon_hits(rules, d, label, norm);
        if (h > 0) {
          add(d, label, static_cast<double>(h));
          other_signal = true;
        }
      }
    }
    if (profile::has_url(post)) {
      add(Dimension::kFunction, "InformationSharing", 1.0);
      other_signal = true;
    }
    if (post.find('?') != std::string::npos) {
      add(Dimension::kFunction, "QuestionsToFollowers", 1.0);
      other_signal = true;
    }
    if (posts.size() >= 2 && prefix_counts[template_prefix(norm)] >= 2) {
      add(Dimension::kStyle, "MechanicalOrTemplateLike", 1.0);
      other_signal = true;
    }

    const std::size_t pos = lexicon_hits(rules, Dimension::kSentiment, "Positive", norm);
    const std::size_t neg = lexicon_hits(rules, Dimension::kSentiment, "Negative", norm);
    const std::size_t hostile = lexicon_hits(rules, Dimension::kEmotion, "HostileOrAggressive", norm);
    add(Dimension::kSentiment, "Positive", static_cast<double>(pos));
    add(Dimension::kSentiment, "Negative", static_cast<double>(neg));
    const bool emotional = pos + neg > 0 || post.find("!!") != std::string::npos;
    if (hostile > 0) add(Dimension::kEmotion, "HostileOrAggressive", static_cast<double>(hostile));
    if (emotional && hostile == 0) add(Dimension::kEmotion, "EmotionalNonHostile", 1.0);
    if (emotional && hostile > 0) add(Dimension::kEmotion, "MixedOrUnclear", 1.0);
    // A post with topical signal but no affect reads as neutral and calm.
    if (other_signal && !emotional && hostile == 0) {
      add(Dimension::kSentiment, "Neutral", 1.0);
      add(Dimension::kEmotion, "CalmOrObjective", 1.0);
    }
  }
  auto& sent = score[idx(Dimension::kSentiment)];
  const double p = sent[label_index(Dimension::kSentiment, "Positive")];
  const double n = sent[label_index(Dimension::kSentiment, "Negative")];
  // Mixed outranks both polarities once the weaker reaches half the stronger.
  if (p > 0 && n > 0) {
    const double lo = std::min(p, n), hi = std::max(p, n);
    sent[label_index(Dimension::kSentiment, "Mixed")] = 2.0 * lo >= hi ? hi + 0.5 : lo;
  }
  return score;
}

PostSummary fallback_summarize(const std::vector<std::string>& posts, const FallbackRules& rules) {
  if (posts.empty()) throw Error("no history to summarize");
  const auto scores = fallback_scores(posts, rules);
  PostSummary out;
  for (Dimension d : kDimensions) {
    const auto& sc = scores[idx(d)];
    std::vector<std::size_t> order(sc.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sc[a] > sc[b]; });
    for (std::size_t k = 0; k < order.size() && out[d].size() < rules.top_k[idx(d)]; ++k) {
      if (sc[order[k]] > 0.0) out[d].push_back(vocabulary(d)[order[k]]);
    }
    if (out[d].empty()) out[d] = fallback_defaults()[d];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sidecar files

nlohmann::json to_json(const PostSummary& s) {
  nlohmann::json j = nlohmann::json::object();
  for (Dimension d : kDimensions) j[std::string(dimension_name(d))] = s[d];
  j["sentence"] = render_summary(s);
  return j;
}

PostSummary summary_from_json(const nlohmann::json& j) {
  PostSummary s;
  try {
    for (Dimension d : kDimensions) s[d] = j.at(std::string(dimension_name(d))).get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad summary: ") + e.what());
  }
  try {
    s.validate();
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
  return s;
}

void write_summaries(const std::filesystem::path& path,
                     const std::vector<std::pair<std::string, PostSummary>>& summaries) {
  std::string out;
  for (const auto& [id, s] : summaries) out += jsonl::dump_line({{"user_id", id}, {"summary", to_json(s)}});
  jsonl::write_text(path, out);
}

std::map<std::string, PostSummary> read_summaries(const std::filesystem::path& path) {
  std::map<std::string, PostSummary> out;
  jsonl::for_each(path, [&](std::size_t line, const nlohmann::json& j) {
    try {
      out[j.at("user_id").get<std::string>()] = summary_from_json(j.at("summary"));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.filename().string() + ": " + e.what(), line);
    } catch (const ParseError& e) {
      throw ParseError(path.filename().string() + ": " + e.what(), line);
    }
  });
  return out;
}

}  // namespace mgdil::summary
