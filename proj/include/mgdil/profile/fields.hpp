#pragma once

// Raw profile attributes a source may supply. The availability mask is
// indexed by position in this list.

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace mgdil::profile {

enum class RawKind { kInteger, kFlag, kText };

struct RawField {
  std::string_view id;
  RawKind kind;
};

inline constexpr std::array<RawField, 21> kRawFields{{
    {"followers_count", RawKind::kInteger},
    {"friends_count", RawKind::kInteger},
    {"statuses_count", RawKind::kInteger},
    {"favourites_count", RawKind::kInteger},
    {"listed_count", RawKind::kInteger},
    {"verified", RawKind::kFlag},
    {"protected", RawKind::kFlag},
    {"default_profile_image", RawKind::kFlag},
    {"default_profile", RawKind::kFlag},
    {"geo_enabled", RawKind::kFlag},
    {"lang", RawKind::kText},
    {"location", RawKind::kText},
    {"profile_banner_url", RawKind::kText},
    {"profile_use_background_image", RawKind::kFlag},
    {"profile_background_tile", RawKind::kFlag},
    {"time_zone", RawKind::kText},
    {"utc_offset", RawKind::kInteger},
    {"description", RawKind::kText},
    {"url", RawKind::kText},
    {"name", RawKind::kText},
    {"screen_name", RawKind::kText},
}};

inline constexpr std::size_t kRawFieldCount = kRawFields.size();

inline std::optional<std::size_t> raw_field_index(std::string_view id) {
  for (std::size_t i = 0; i < kRawFields.size(); ++i) {
    if (kRawFields[i].id == id) return i;
  }
  return std::nullopt;
}

}  // namespace mgdil::profile
