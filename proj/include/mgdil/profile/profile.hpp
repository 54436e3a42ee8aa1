#pragma once

// Slot-based profile rendering. Each of the 39 profile features has a slot
// "name = value; " grouped under a category header. Every raw field owns one
// slot; when the raw field is missing that slot shows the placeholder, so the
// placeholder count always equals the number of missing raw fields. Slots
// derived from several inputs fall back to neutral values instead.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "mgdil/ingest/record.hpp"
#include "mgdil/profile/fields.hpp"

namespace mgdil::profile {

inline constexpr std::string_view kPlaceholder = "unavailable";

enum class Category { kBasic, kCompleteness, kTextStats, kName, kLanguageGeo, kDescription };

std::string_view category_header(Category c);

struct SlotDef {
  std::string_view id;
  Category category;
  std::optional<std::size_t> owner;  // index into kRawFields
};

inline constexpr std::size_t kSlotCount = 39;

extern const std::array<SlotDef, kSlotCount> kSlots;

using RawProfile = std::map<std::string, nlohmann::json>;

struct AvailabilityMask {
  std::vector<bool> bits = std::vector<bool>(kRawFieldCount, false);

  std::size_t popcount() const;
  bool operator==(const AvailabilityMask&) const = default;
};

AvailabilityMask availability_mask(const RawProfile& profile);

using FeatureValue = std::variant<bool, std::int64_t, double, std::string, std::vector<std::string>>;
using FeatureMap = std::map<std::string, FeatureValue>;

// Rendering of a single value: integers in decimal, flags as true/false,
// ratios rounded to two decimals with at least one fractional digit
// ("0.56", "0.0"), lists as "[a, b]".
std::string format_value(const FeatureValue& value);

// "name = value; ", or the placeholder when `mask_bit` is false. The
// description slot renders the bare text.
std::string render_slot(std::string_view field_id, const std::optional<FeatureValue>& value, bool mask_bit);

struct Lexicons {
  std::vector<std::string> promo_keywords;     // normalized by text::normalize_words
  std::vector<std::string> generic_locations;  // lowercase
  std::map<std::string, std::vector<std::string>> language_regions;
  std::map<std::string, std::string> timezone_regions;  // keys lowercase
  std::vector<std::pair<std::string, std::vector<std::string>>> url_taxonomy;  // category -> host keywords

  static Lexicons load(const std::filesystem::path& dir);
  static const Lexicons& defaults();  // loaded once from <data>/lexicons
};

// All 39 features keyed by slot id. Missing inputs give neutral values.
FeatureMap derive_features(const RawProfile& profile, const Lexicons& lexicons = Lexicons::defaults());

struct ProfileRendering {
  std::vector<std::string> slots;  // kSlotCount entries, schema order
  std::string text;
  FeatureMap features;
  AvailabilityMask mask;

  std::size_t placeholder_count() const;
};

ProfileRendering render_profile(const ingest::UserRecord& record, const Lexicons& lexicons = Lexicons::defaults());
ProfileRendering render_profile(const RawProfile& profile, const Lexicons& lexicons = Lexicons::defaults());

// Category lines joined by newlines; the final "; " of each line becomes ".".
std::string join_slots(const std::vector<std::string>& slots);

// 1 - levenshtein / max length on ASCII-lowercased code points; 1 for two
// empty strings.
double name_similarity(std::string_view a, std::string_view b);

// Pattern rules over description text.
bool has_url(std::string_view text);
bool has_mention(std::string_view text);
bool has_hashtag(std::string_view text);
bool has_email(std::string_view text);
bool has_phone(std::string_view text);
std::vector<std::string> extract_urls(std::string_view text);
std::vector<std::string> url_categories(const std::vector<std::string>& urls, const Lexicons& lexicons);

std::vector<std::string> feature_csv_header();
std::vector<std::string> feature_csv_row(const std::string& user_id, const FeatureMap& features);

}  // namespace mgdil::profile
