#include <algorithm>
#include <random>

#include "doctest.h"
#include "mgdil/profile/profile.hpp"
#include "mgdil/util/text.hpp"
#include "testing.hpp"

using namespace mgdil;
using namespace mgdil::profile;

namespace {

std::size_t occurrences(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + needle.size())) ++n;
  return n;
}

// Plain dynamic-programming edit distance over bytes, for ASCII inputs.
std::size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
  }
  return d[a.size()][b.size()];
}

RawProfile random_profile(std::mt19937_64& rng, std::vector<bool>* present) {
  RawProfile p;
  present->assign(kRawFieldCount, false);
  for (std::size_t j = 0; j < kRawFieldCount; ++j) {
    if (rng() % 2 == 0) continue;
    (*present)[j] = true;
    const auto& f = kRawFields[j];
    switch (f.kind) {
      case RawKind::kInteger:
        p[std::string(f.id)] = static_cast<std::int64_t>(rng() % 5000);
        break;
      case RawKind::kFlag:
        p[std::string(f.id)] = rng() % 2 == 0;
        break;
      case RawKind::kText:
        p[std::string(f.id)] = rng() % 4 == 0 ? std::string() : "x_" + std::to_string(rng() % 1000) + " Bot!";
        break;
    }
  }
  return p;
}

}  // namespace

TEST_CASE("schema shape") {
  CHECK(kRawFieldCount == 21);
  CHECK(kSlots.size() == 39);
  std::vector<std::size_t> owners;
  for (const auto& s : kSlots) {
    if (s.owner) owners.push_back(*s.owner);
  }
  std::sort(owners.begin(), owners.end());
  REQUIRE(owners.size() == kRawFieldCount);
  for (std::size_t j = 0; j < owners.size(); ++j) CHECK(owners[j] == j);
}

TEST_CASE("availability mask") {
  CHECK(availability_mask({}).popcount() == 0);
  const auto one = availability_mask({{"followers_count", 3}});
  CHECK(one.popcount() == 1);
  CHECK(one.bits[*raw_field_index("followers_count")]);
  CHECK(availability_mask({{"location", nullptr}}).popcount() == 0);
  const auto m = availability_mask(testing::example_user().profile);
  CHECK(m.popcount() == kRawFieldCount);
}

TEST_CASE("slot rendering") {
  CHECK(render_slot("verified", FeatureValue(false), true) == "verified = false; ");
  CHECK(render_slot("location_present", std::nullopt, false) == "location_present = unavailable; ");
  CHECK(render_slot("followers_count", FeatureValue(std::int64_t{705}), true) == "followers_count = 705; ");
  CHECK(render_slot("url_category_desc", FeatureValue(std::vector<std::string>{}), true) == "url_category_desc = []; ");
  CHECK(render_slot("description_text", FeatureValue(std::string("hi there")), true) == "hi there");
}

TEST_CASE("value formatting") {
  CHECK(format_value(0.0) == "0.0");
  CHECK(format_value(0.5644) == "0.56");
  CHECK(format_value(1.0) == "1.0");
  CHECK(format_value(0.1) == "0.1");
  CHECK(format_value(3.0 / 7.0) == "0.43");
  CHECK(format_value(std::int64_t{-5}) == "-5");
  CHECK(format_value(true) == "true");
  CHECK(format_value(std::vector<std::string>{"social", "other"}) == "[social, other]");
}

TEST_CASE("example account anchors") {
  const auto r = render_profile(testing::example_user());
  const auto& f = r.features;
  CHECK(std::get<double>(f.at("ff_ratio")) == doctest::Approx(705.0 / 1249.0));
  CHECK(format_value(f.at("ff_ratio")) == "0.56");
  CHECK(std::get<std::int64_t>(f.at("emoji_count")) == 0);
  CHECK(format_value(f.at("screen_name_underscore_ratio")) == "0.14");
  CHECK(std::get<std::int64_t>(f.at("name_length")) == 16);
  CHECK(std::get<std::int64_t>(f.at("screen_name_length")) == 7);
  CHECK(std::get<std::int64_t>(f.at("desc_length")) == 53);
  CHECK(std::get<bool>(f.at("lang_timezone_mismatch")) == false);
  CHECK(std::get<bool>(f.at("location_present")) == false);
  CHECK(std::get<bool>(f.at("profile_banner_url_present")) == true);
  CHECK(r.placeholder_count() == 0);

  CHECK(r.text.find("ff_ratio = 0.56") != std::string::npos);
  CHECK(r.text.find("emoji_count = 0;") != std::string::npos);
  CHECK(r.text.find("screen_name_underscore_ratio = 0.14;") != std::string::npos);
  CHECK(r.text.find("geo_enabled = false; lang_hint = it.") != std::string::npos);
  CHECK(r.text.find("name_digit_ratio = 0.0;") != std::string::npos);
  CHECK(r.text.find("url_category_desc = [];") != std::string::npos);
  CHECK(r.text.find("Description Text: l' unico cane tanto figo da avere un account twitter.") != std::string::npos);
  CHECK(r.text.rfind("Account Basic Information: followers_count = 705; friends_count = 1249; ff_ratio = 0.56;", 0) == 0);
}

TEST_CASE("empty profile renders every raw slot as a placeholder") {
  const auto r = render_profile(RawProfile{});
  CHECK(r.placeholder_count() == kRawFieldCount);
  CHECK(occurrences(r.text, std::string(kPlaceholder)) == kRawFieldCount);
  CHECK(std::get<double>(r.features.at("ff_ratio")) == 0.0);
  CHECK(std::get<std::string>(r.features.at("lang_hint")) == "und");
}

TEST_CASE("placeholder count matches missing raw fields on random masks") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<bool> present;
    const auto p = random_profile(rng, &present);
    const auto r = render_profile(p);
    const auto missing = static_cast<std::size_t>(std::count(present.begin(), present.end(), false));
    CHECK(r.mask.bits == present);
    CHECK(r.placeholder_count() == kRawFieldCount - r.mask.popcount());
    CHECK(r.placeholder_count() == missing);
    for (const auto& name : {"name_digit_ratio", "name_special_char_ratio", "screen_name_digit_ratio",
                             "screen_name_underscore_ratio", "name_screen_name_similarity"}) {
      const double v = std::get<double>(r.features.at(name));
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(std::get<double>(r.features.at("name_digit_ratio")) +
              std::get<double>(r.features.at("name_special_char_ratio")) <=
          1.0 + 1e-12);
    CHECK(render_profile(p).text == r.text);
  }
}

TEST_CASE("insertion order does not change the text") {
  const auto rec = testing::example_user();
  RawProfile reversed;
  for (auto it = rec.profile.rbegin(); it != rec.profile.rend(); ++it) reversed.insert(*it);
  CHECK(render_profile(reversed).text == render_profile(rec).text);
}

TEST_CASE("text lines are grouped under headers") {
  const auto r = render_profile(testing::example_user());
  std::vector<std::string> lines;
  std::size_t start = 0;
  for (auto p = r.text.find('\n'); ; p = r.text.find('\n', start)) {
    lines.push_back(r.text.substr(start, p == std::string::npos ? std::string::npos : p - start));
    if (p == std::string::npos) break;
    start = p + 1;
  }
  REQUIRE(lines.size() == 6);
  CHECK(lines[0].rfind("Account Basic Information: ", 0) == 0);
  CHECK(lines[1].rfind("Profile Completeness Features: ", 0) == 0);
  CHECK(lines[2].rfind("Profile Text Statistics Features: ", 0) == 0);
  CHECK(lines[3].rfind("Name Features: ", 0) == 0);
  CHECK(lines[4].rfind("Language and Geographic Features: ", 0) == 0);
  CHECK(lines[5].rfind("Description Text: ", 0) == 0);
  for (std::size_t i = 0; i + 1 < lines.size(); ++i) CHECK(lines[i].back() == '.');
}

TEST_CASE("name similarity") {
  CHECK(name_similarity("pippo", "pippo") == 1.0);
  CHECK(name_similarity("", "") == 1.0);
  CHECK(name_similarity("Pippo", "PIPPO") == 1.0);
  CHECK(name_similarity("abc", "") == 0.0);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    std::string a, b;
    for (std::size_t k = rng() % 8; k > 0; --k) a += static_cast<char>('a' + rng() % 4);
    for (std::size_t k = rng() % 8; k > 0; --k) b += static_cast<char>('a' + rng() % 4);
    const double s = name_similarity(a, b);
    CHECK(s == name_similarity(b, a));
    const std::size_t m = std::max(a.size(), b.size());
    const double expect = m == 0 ? 1.0 : 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(m);
    CHECK(s == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("screen name underscore ratio") {
  const auto f = derive_features({{"screen_name", "a_b_c_d"}});
  CHECK(std::get<double>(f.at("screen_name_underscore_ratio")) == doctest::Approx(3.0 / 7.0));
  CHECK(format_value(f.at("screen_name_underscore_ratio")) == "0.43");
}

TEST_CASE("description pattern rules") {
  CHECK(has_url("see https://example.com now"));
  CHECK(has_url("www.example.org"));
  CHECK_FALSE(has_url("example dot com"));
  CHECK(has_mention("thanks @friend"));
  CHECK_FALSE(has_mention("mail me at a@b.com"));
  CHECK(has_hashtag("#Election2020 is here"));
  CHECK(has_email("contact: jo.doe@mail.co"));
  CHECK_FALSE(has_email("just @handle"));
  CHECK(has_phone("call 555-123-4567"));
  CHECK(has_phone("+39 (06) 1234567"));
  CHECK_FALSE(has_phone("born 1985"));
  CHECK_FALSE(has_phone("1 - - - 2 - - - 3 4 5 6 7"));
  CHECK(extract_urls("a http://bit.ly/x and https://shop.amazon.com/y") ==
        std::vector<std::string>{"http://bit.ly/x", "https://shop.amazon.com/y"});
}

TEST_CASE("url categories and promo keywords") {
  const auto& lex = Lexicons::defaults();
  const auto cats = url_categories({"http://bit.ly/x", "https://example.org"}, lex);
  CHECK(std::find(cats.begin(), cats.end(), "link-shortener") != cats.end());
  CHECK(std::find(cats.begin(), cats.end(), "other") != cats.end());
  CHECK(url_categories({}, lex).empty());
  const auto f = derive_features({{"description", "Follow back! Free promo http://bit.ly/x"}});
  CHECK(std::get<bool>(f.at("has_promo_keyword_in_desc")));
  CHECK(std::get<bool>(f.at("has_url_in_desc")));
  CHECK(std::get<std::vector<std::string>>(f.at("url_category_desc")) == std::vector<std::string>{"link-shortener"});
}

TEST_CASE("language and location lexicons") {
  CHECK(std::get<bool>(derive_features({{"lang", "it"}, {"time_zone", "Tokyo"}}).at("lang_timezone_mismatch")));
  CHECK_FALSE(std::get<bool>(derive_features({{"lang", "it"}, {"time_zone", "Europe/Rome"}}).at("lang_timezone_mismatch")));
  CHECK_FALSE(std::get<bool>(derive_features({{"lang", "it"}}).at("lang_timezone_mismatch")));
  CHECK(std::get<bool>(derive_features({{"location", "Worldwide"}}).at("location_generic_flag")));
  CHECK_FALSE(std::get<bool>(derive_features({{"location", "Milano"}}).at("location_generic_flag")));
}

TEST_CASE("emoji counting") {
  const auto f = derive_features({{"description", "love it \xF0\x9F\x98\x80\xF0\x9F\x9A\x80 \xE2\x9C\xA8"}});
  CHECK(std::get<std::int64_t>(f.at("emoji_count")) == 3);
}

TEST_CASE("feature csv") {
  const auto header = feature_csv_header();
  CHECK(header.size() == kSlotCount + 1);
  CHECK(header[0] == "user_id");
  const auto row = feature_csv_row("u87470", render_profile(testing::example_user()).features);
  CHECK(row.size() == header.size());
  CHECK(row[0] == "u87470");
}

TEST_CASE("word normalization") {
  CHECK(text::normalize_words("I'm BACK!!") == " i m back ");
  CHECK(text::count_phrase(text::normalize_words("buy now, buy later"), text::normalize_words("buy")) == 2);
  CHECK(text::trim("  a b \n") == "a b");
}
