#include "mgdil/profile/profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "mgdil/util/config.hpp"
#include "mgdil/util/error.hpp"
#include "mgdil/util/text.hpp"
#include "mgdil/util/utf8.hpp"

namespace mgdil::profile {

std::string_view category_header(Category c) {
  switch (c) {
    case Category::kBasic: return "Account Basic Information";
    case Category::kCompleteness: return "Profile Completeness Features";
    case Category::kTextStats: return "Profile Text Statistics Features";
    case Category::kName: return "Name Features";
    case Category::kLanguageGeo: return "Language and Geographic Features";
    case Category::kDescription: return "Description Text";
  }
  return "";
}

namespace {

std::optional<std::size_t> own(std::string_view raw) { return raw_field_index(raw); }

}  // namespace

const std::array<SlotDef, kSlotCount> kSlots{{
    {"followers_count", Category::kBasic, own("followers_count")},
    {"friends_count", Category::kBasic, own("friends_count")},
    {"ff_ratio", Category::kBasic, std::nullopt},
    {"statuses_count", Category::kBasic, own("statuses_count")},
    {"favourites_count", Category::kBasic, own("favourites_count")},
    {"listed_count", Category::kBasic, own("listed_count")},
    {"verified", Category::kBasic, own("verified")},
    {"protected", Category::kBasic, own("protected")},
    {"default_profile_image", Category::kBasic, own("default_profile_image")},
    {"default_profile", Category::kBasic, own("default_profile")},
    {"geo_enabled", Category::kBasic, own("geo_enabled")},
    {"lang_hint", Category::kBasic, own("lang")},
    {"location_present", Category::kCompleteness, own("location")},
    {"profile_banner_url_present", Category::kCompleteness, own("profile_banner_url")},
    {"profile_use_background_image", Category::kCompleteness, own("profile_use_background_image")},
    {"profile_background_tile", Category::kCompleteness, own("profile_background_tile")},
    {"time_zone_present", Category::kCompleteness, own("time_zone")},
    {"utc_offset_present", Category::kCompleteness, own("utc_offset")},
    {"desc_length", Category::kTextStats, std::nullopt},
    {"emoji_count", Category::kTextStats, std::nullopt},
    {"has_url_in_desc", Category::kTextStats, std::nullopt},
    {"has_mention_in_desc", Category::kTextStats, std::nullopt},
    {"has_hashtag_in_desc", Category::kTextStats, std::nullopt},
    {"has_email_in_desc", Category::kTextStats, std::nullopt},
    {"has_phone_in_desc", Category::kTextStats, std::nullopt},
    {"has_promo_keyword_in_desc", Category::kTextStats, std::nullopt},
    {"url_category_desc", Category::kTextStats, std::nullopt},
    {"has_url_in_bio", Category::kTextStats, own("url")},
    {"url_category_bio", Category::kTextStats, std::nullopt},
    {"name_length", Category::kName, own("name")},
    {"name_digit_ratio", Category::kName, std::nullopt},
    {"name_special_char_ratio", Category::kName, std::nullopt},
    {"screen_name_length", Category::kName, own("screen_name")},
    {"screen_name_digit_ratio", Category::kName, std::nullopt},
    {"screen_name_underscore_ratio", Category::kName, std::nullopt},
    {"name_screen_name_similarity", Category::kName, std::nullopt},
    {"lang_timezone_mismatch", Category::kLanguageGeo, std::nullopt},
    {"location_generic_flag", Category::kLanguageGeo, std::nullopt},
    {"description_text", Category::kDescription, own("description")},
}};

std::size_t AvailabilityMask::popcount() const { return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), true)); }

AvailabilityMask availability_mask(const RawProfile& profile) {
  AvailabilityMask m;
  for (std::size_t j = 0; j < kRawFieldCount; ++j) {
    auto it = profile.find(std::string(kRawFields[j].id));
    m.bits[j] = it != profile.end() && !it->second.is_null();
  }
  return m;
}

std::string format_value(const FeatureValue& value) {
  struct Visitor {
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const {
      const double r = std::round(d * 100.0) / 100.0;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.2f", r == 0.0 ? 0.0 : r);
      std::string s = buf;
      while (s.size() > 1 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
      return s;
    }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(const std::vector<std::string>& v) const {
      std::string out = "[";
      for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
      return out + "]";
    }
  };
  return std::visit(Visitor{}, value);
}

std::string render_slot(std::string_view field_id, const std::optional<FeatureValue>& value, bool mask_bit) {
  const std::string shown = mask_bit && value ? format_value(*value) : std::string(kPlaceholder);
  if (field_id == "description_text") return shown;
  return std::string(field_id) + " = " + shown + "; ";
}

// ---------------------------------------------------------------------------
// Lexicons

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open lexicon " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t");
    out.push_back(line.substr(first, last - first + 1));
  }
  return out;
}

std::pair<std::string, std::string> split_tab(const std::string& line, const std::filesystem::path& path) {
  const auto tab = line.find('\t');
  if (tab == std::string::npos) throw ConfigError(path.filename().string() + ": expected key<TAB>value in '" + line + "'");
  return {line.substr(0, tab), line.substr(tab + 1)};
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(' ');
    const auto b = item.find_last_not_of(' ');
    if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

}  // namespace

Lexicons Lexicons::load(const std::filesystem::path& dir) {
  Lexicons lx;
  for (auto& w : read_lines(dir / "promo_keywords.txt")) lx.promo_keywords.push_back(text::normalize_words(w));
  for (auto& w : read_lines(dir / "generic_locations.txt")) lx.generic_locations.push_back(utf8::to_lower_ascii(w));
  const auto lang_path = dir / "language_regions.tsv";
  for (auto& line : read_lines(lang_path)) {
    auto [k, v] = split_tab(line, lang_path);
    lx.language_regions[utf8::to_lower_ascii(k)] = split_list(v);
  }
  const auto tz_path = dir / "timezone_regions.tsv";
  for (auto& line : read_lines(tz_path)) {
    auto [k, v] = split_tab(line, tz_path);
    lx.timezone_regions[utf8::to_lower_ascii(k)] = v;
  }
  const auto url_path = dir / "url_taxonomy.tsv";
  for (auto& line : read_lines(url_path)) {
    auto [k, v] = split_tab(line, url_path);
    std::vector<std::string> hosts;
    for (auto& h : split_list(v)) hosts.push_back(utf8::to_lower_ascii(h));
    lx.url_taxonomy.emplace_back(k, std::move(hosts));
  }
  return lx;
}

const Lexicons& Lexicons::defaults() {
  static const Lexicons lx = load(config::default_data_dir() / "lexicons");
  return lx;
}

// ---------------------------------------------------------------------------
// Pattern rules

namespace {

bool word_char(char32_t c) { return utf8::is_letter(c) || utf8::is_ascii_digit(c) || c == U'_'; }

std::string strip_edges(std::string token) {
  static const std::string lead = "([<\"'";
  static const std::string trail = ".,;:!?)]>\"'";
  std::size_t a = 0;
  while (a < token.size() && lead.find(token[a]) != std::string::npos) ++a;
  std::size_t b = token.size();
  while (b > a && trail.find(token[b - 1]) != std::string::npos) --b;
  return token.substr(a, b - a);
}

std::vector<std::string> whitespace_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char32_t c : utf8::decode(text)) {
    if (utf8::is_whitespace(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += utf8::encode(std::u32string(1, c));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

std::string url_host(std::string url) {
  url = utf8::to_lower_ascii(url);
  for (std::string_view scheme : {"https://", "http://"}) {
    if (starts_with(url, scheme)) url = url.substr(scheme.size());
  }
  url = url.substr(0, url.find_first_of("/?#:"));
  if (starts_with(url, "www.")) url = url.substr(4);
  return url;
}

// True when `marker` starts a word and is followed by an accepted character.
// A preceding word character rules out emails and in-word '#'.
template <typename Pred>
bool marker_followed_by(std::string_view text, char32_t marker, Pred accept) {
  const std::u32string s = utf8::decode(text);
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (s[i] != marker) continue;
    if (i > 0 && (word_char(s[i - 1]) || s[i - 1] == U'.' || s[i - 1] == U'&')) continue;
    if (accept(s[i + 1])) return true;
  }
  return false;
}

}  // namespace

std::vector<std::string> extract_urls(std::string_view text) {
  std::vector<std::string> out;
  for (auto& raw : whitespace_tokens(text)) {
    std::string tok = strip_edges(raw);
    const std::string lower = utf8::to_lower_ascii(tok);
    if ((starts_with(lower, "http://") || starts_with(lower, "https://")) && lower.find("://") + 3 < lower.size()) {
      out.push_back(tok);
    } else if (starts_with(lower, "www.") && lower.size() > 4) {
      out.push_back(tok);
    }
  }
  return out;
}

bool has_url(std::string_view text) { return !extract_urls(text).empty(); }

bool has_mention(std::string_view text) {
  return marker_followed_by(text, U'@', [](char32_t c) { return c < 0x80 && word_char(c); });
}

bool has_hashtag(std::string_view text) { return marker_followed_by(text, U'#', word_char); }

bool has_email(std::string_view text) {
  static const std::regex re(R"([A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,})");
  return std::regex_search(text.begin(), text.end(), re);
}

bool has_phone(std::string_view text) {
  // Digits may be split by single separators or pairs like ") "; a longer
  // gap or any other character ends the run.
  static constexpr std::u32string_view kSeparators = U" -.()+/";
  std::size_t digits = 0, gap = 0;
  for (char32_t c : utf8::decode(text)) {
    if (utf8::is_ascii_digit(c)) {
      ++digits;
      gap = 0;
      if (digits >= 7) return true;
    } else if (kSeparators.find(c) != std::u32string_view::npos) {
      if (++gap > 2) digits = 0;
    } else {
      digits = 0;
      gap = 0;
    }
  }
  return false;
}

std::vector<std::string> url_categories(const std::vector<std::string>& urls, const Lexicons& lexicons) {
  std::set<std::size_t> hit;
  bool other = false;
  for (const auto& u : urls) {
    const std::string host = url_host(u);
    bool matched = false;
    for (std::size_t k = 0; k < lexicons.url_taxonomy.size() && !matched; ++k) {
      for (const auto& kw : lexicons.url_taxonomy[k].second) {
        if (host == kw || (host.size() > kw.size() && host.compare(host.size() - kw.size(), kw.size(), kw) == 0 &&
                           host[host.size() - kw.size() - 1] == '.')) {
          hit.insert(k);
          matched = true;
          break;
        }
      }
    }
    if (!matched) other = true;
  }
  std::vector<std::string> out;
  for (std::size_t k : hit) out.push_back(lexicons.url_taxonomy[k].first);
  if (other) out.push_back("other");
  return out;
}

double name_similarity(std::string_view a, std::string_view b) {
  const std::u32string x = utf8::decode(utf8::to_lower_ascii(a));
  const std::u32string y = utf8::decode(utf8::to_lower_ascii(b));
  const std::size_t longest = std::max(x.size(), y.size());
  if (longest == 0) return 1.0;
  std::vector<std::size_t> prev(y.size() + 1), cur(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return 1.0 - static_cast<double>(prev[y.size()]) / static_cast<double>(longest);
}

// ---------------------------------------------------------------------------
// Features

namespace {

const nlohmann::json* raw(const RawProfile& p, std::string_view key) {
  auto it = p.find(std::string(key));
  return it == p.end() || it->second.is_null() ? nullptr : &it->second;
}

std::int64_t raw_int(const RawProfile& p, std::string_view key) {
  const auto* v = raw(p, key);
  return v != nullptr && v->is_number_integer() ? v->get<std::int64_t>() : 0;
}

bool raw_flag(const RawProfile& p, std::string_view key) {
  const auto* v = raw(p, key);
  return v != nullptr && v->is_boolean() && v->get<bool>();
}

std::string raw_text(const RawProfile& p, std::string_view key) {
  const auto* v = raw(p, key);
  return v != nullptr && v->is_string() ? v->get<std::string>() : std::string();
}

bool non_blank(const RawProfile& p, std::string_view key) {
  const auto* v = raw(p, key);
  if (v == nullptr) return false;
  if (!v->is_string()) return true;
  for (char32_t c : utf8::decode(v->get_ref<const std::string&>())) {
    if (!utf8::is_whitespace(c)) return true;
  }
  return false;
}

struct CharStats {
  std::size_t length = 0, digits = 0, special = 0, underscores = 0;
};

CharStats char_stats(std::string_view s) {
  CharStats st;
  for (char32_t c : utf8::decode(s)) {
    ++st.length;
    if (utf8::is_ascii_digit(c)) {
      ++st.digits;
    } else if (!utf8::is_letter(c) && !utf8::is_whitespace(c)) {
      ++st.special;
    }
    if (c == U'_') ++st.underscores;
  }
  return st;
}

double ratio(std::size_t num, std::size_t den) { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }

bool contains_phrase(const std::string& desc, const std::vector<std::string>& phrases) {
  const std::string norm = text::normalize_words(desc);
  for (const auto& p : phrases) {
    if (text::count_phrase(norm, p) > 0) return true;
  }
  return false;
}

std::string language_key(const Lexicons& lx, std::string lang) {
  lang = utf8::to_lower_ascii(lang);
  if (lx.language_regions.count(lang)) return lang;
  return lang.substr(0, lang.find_first_of("-_"));
}

std::optional<std::string> timezone_region(const Lexicons& lx, const std::string& tz) {
  const std::string key = utf8::to_lower_ascii(tz);
  if (auto it = lx.timezone_regions.find(key); it != lx.timezone_regions.end()) return it->second;
  if (auto slash = key.find('/'); slash != std::string::npos) {
    if (auto it = lx.timezone_regions.find(key.substr(0, slash + 1)); it != lx.timezone_regions.end()) return it->second;
  }
  return std::nullopt;
}

std::string trim_punct_lower(const std::string& s) {
  std::string out;
  for (char32_t c : utf8::decode(utf8::to_lower_ascii(s))) {
    if (utf8::is_letter(c) || utf8::is_ascii_digit(c) || c == U' ') out += utf8::encode(std::u32string(1, c));
  }
  const auto a = out.find_first_not_of(' ');
  if (a == std::string::npos) return {};
  const auto b = out.find_last_not_of(' ');
  // Collapse inner runs of spaces.
  std::string collapsed;
  for (std::size_t i = a; i <= b; ++i) {
    if (out[i] == ' ' && !collapsed.empty() && collapsed.back() == ' ') continue;
    collapsed += out[i];
  }
  return collapsed;
}

}  // namespace

FeatureMap derive_features(const RawProfile& p, const Lexicons& lx) {
  FeatureMap f;
  for (std::string_view k : {"followers_count", "friends_count", "statuses_count", "favourites_count", "listed_count"}) {
    f[std::string(k)] = raw_int(p, k);
  }
  f["ff_ratio"] = static_cast<double>(raw_int(p, "followers_count")) /
                  static_cast<double>(std::max<std::int64_t>(raw_int(p, "friends_count"), 1));
  for (std::string_view k : {"verified", "protected", "default_profile_image", "default_profile", "geo_enabled",
                             "profile_use_background_image", "profile_background_tile"}) {
    f[std::string(k)] = raw_flag(p, k);
  }
  const std::string lang = raw_text(p, "lang");
  f["lang_hint"] = lang.empty() ? std::string("und") : lang;

  f["location_present"] = non_blank(p, "location");
  f["profile_banner_url_present"] = non_blank(p, "profile_banner_url");
  f["time_zone_present"] = non_blank(p, "time_zone");
  f["utc_offset_present"] = raw(p, "utc_offset") != nullptr;

  const std::string desc = raw_text(p, "description");
  const std::u32string desc32 = utf8::decode(desc);
  f["desc_length"] = static_cast<std::int64_t>(desc32.size());
  f["emoji_count"] = static_cast<std::int64_t>(std::count_if(desc32.begin(), desc32.end(), utf8::is_emoji));
  const auto desc_urls = extract_urls(desc);
  f["has_url_in_desc"] = !desc_urls.empty();
  f["has_mention_in_desc"] = has_mention(desc);
  f["has_hashtag_in_desc"] = has_hashtag(desc);
  f["has_email_in_desc"] = has_email(desc);
  f["has_phone_in_desc"] = has_phone(desc);
  f["has_promo_keyword_in_desc"] = contains_phrase(desc, lx.promo_keywords);
  f["url_category_desc"] = url_categories(desc_urls, lx);
  const std::string bio_url = raw_text(p, "url");
  const bool bio = non_blank(p, "url");
  f["has_url_in_bio"] = bio;
  f["url_category_bio"] = bio ? url_categories({bio_url}, lx) : std::vector<std::string>{};

  const std::string name = raw_text(p, "name");
  const std::string screen = raw_text(p, "screen_name");
  const CharStats ns = char_stats(name), ss = char_stats(screen);
  f["name_length"] = static_cast<std::int64_t>(ns.length);
  f["name_digit_ratio"] = ratio(ns.digits, ns.length);
  f["name_special_char_ratio"] = ratio(ns.special, ns.length);
  f["screen_name_length"] = static_cast<std::int64_t>(ss.length);
  f["screen_name_digit_ratio"] = ratio(ss.digits, ss.length);
  f["screen_name_underscore_ratio"] = ratio(ss.underscores, ss.length);
  f["name_screen_name_similarity"] =
      raw(p, "name") != nullptr && raw(p, "screen_name") != nullptr ? name_similarity(name, screen) : 0.0;

  bool mismatch = false;
  if (!lang.empty() && non_blank(p, "time_zone")) {
    auto regions = lx.language_regions.find(language_key(lx, lang));
    auto tz = timezone_region(lx, raw_text(p, "time_zone"));
    if (regions != lx.language_regions.end() && tz) {
      mismatch = std::find(regions->second.begin(), regions->second.end(), *tz) == regions->second.end();
    }
  }
  f["lang_timezone_mismatch"] = mismatch;
  const std::string loc = trim_punct_lower(raw_text(p, "location"));
  f["location_generic_flag"] =
      !loc.empty() && std::find(lx.generic_locations.begin(), lx.generic_locations.end(), loc) != lx.generic_locations.end();
  f["description_text"] = desc;
  return f;
}

std::size_t ProfileRendering::placeholder_count() const {
  std::size_t n = 0;
  for (std::size_t j = 0; j < kSlotCount; ++j) {
    const std::string& s = slots[j];
    if (kSlots[j].category == Category::kDescription ? s == kPlaceholder
                                                       : s == std::string(kSlots[j].id) + " = " + std::string(kPlaceholder) + "; ") {
      ++n;
    }
  }
  return n;
}

std::string join_slots(const std::vector<std::string>& slots) {
  std::string text;
  std::size_t j = 0;
  while (j < kSlotCount) {
    const Category c = kSlots[j].category;
    std::string line = std::string(category_header(c)) + ": ";
    for (; j < kSlotCount && kSlots[j].category == c; ++j) line += slots[j];
    if (line.size() >= 2 && line.compare(line.size() - 2, 2, "; ") == 0) line.replace(line.size() - 2, 2, ".");
    if (!text.empty()) text += '\n';
    text += line;
  }
  return text;
}

ProfileRendering render_profile(const RawProfile& profile, const Lexicons& lexicons) {
  ProfileRendering r;
  r.mask = availability_mask(profile);
  r.features = derive_features(profile, lexicons);
  r.slots.reserve(kSlotCount);
  for (const auto& slot : kSlots) {
    const bool available = !slot.owner || r.mask.bits[*slot.owner];
    r.slots.push_back(render_slot(slot.id, r.features.at(std::string(slot.id)), available));
  }
  r.text = join_slots(r.slots);
  return r;
}

ProfileRendering render_profile(const ingest::UserRecord& record, const Lexicons& lexicons) {
  return render_profile(record.profile, lexicons);
}

std::vector<std::string> feature_csv_header() {
  std::vector<std::string> h{"user_id"};
  for (const auto& s : kSlots) h.emplace_back(s.id);
  return h;
}

std::vector<std::string> feature_csv_row(const std::string& user_id, const FeatureMap& features) {
  std::vector<std::string> row{user_id};
  for (const auto& s : kSlots) {
    const FeatureValue& v = features.at(std::string(s.id));
    // Full precision in the CSV; rounding is a rendering concern.
    if (const double* d = std::get_if<double>(&v)) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", *d);
      row.emplace_back(buf);
    } else if (const auto* list = std::get_if<std::vector<std::string>>(&v)) {
      std::string joined;
      for (std::size_t i = 0; i < list->size(); ++i) joined += (i ? ";" : "") + (*list)[i];
      row.push_back(joined);
    } else {
      row.push_back(format_value(v));
    }
  }
  return row;
}

}  // namespace mgdil::profile
