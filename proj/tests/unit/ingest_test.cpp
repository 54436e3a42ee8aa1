#include <algorithm>
#include <map>
#include <random>

#include "doctest.h"
#include "mgdil/ingest/ingest.hpp"
#include "mgdil/util/config.hpp"
#include "mgdil/util/error.hpp"
#include "testing.hpp"

using namespace mgdil;
using namespace mgdil::ingest;

namespace {

UserRecord rec(std::string id, std::string dataset, int year, Label label) {
  UserRecord r;
  r.user_id = std::move(id);
  r.dataset_id = std::move(dataset);
  r.release_year = year;
  r.label = label;
  if (is_training_year(year)) r.domain_id = assign_domain(year);
  return r;
}

std::size_t count_label(const std::vector<UserRecord>& rs, Label l) {
  return static_cast<std::size_t>(std::count_if(rs.begin(), rs.end(), [&](const auto& r) { return r.label == l; }));
}

Registry demo_registry() { return load_registry(testing::data_dir() / "demo" / "registry.toml"); }

}  // namespace

TEST_CASE("domain assignment by release period") {
  CHECK(assign_domain(2015) == 0);
  CHECK(assign_domain(2016) == 0);
  CHECK(assign_domain(2017) == 0);
  CHECK(assign_domain(2018) == 1);
  CHECK(assign_domain(2019) == 2);
  CHECK_THROWS_WITH(assign_domain(2020), doctest::Contains("domain label undefined"));
  CHECK_THROWS(assign_domain(2014));
  CHECK(is_training_year(2019));
  CHECK_FALSE(is_training_year(2023));
}

TEST_CASE("registry loads sources with column tables") {
  const auto reg = demo_registry();
  REQUIRE(reg.sources.size() == 3);
  const auto& c = reg.find("cresci-15");
  CHECK(c.format == SourceFormat::kCsv);
  CHECK(c.release_year == 2015);
  CHECK(c.field_mappings.at("time_zone") == "time_zone");
  CHECK(c.null_tokens == std::vector<std::string>{"NULL", "None"});
  CHECK(reg.find("midterm-18").format == SourceFormat::kJsonLines);
  CHECK(reg.find("midterm-18").constant_label == Label::kBot);
  CHECK(reg.find("twibot-20").field_mappings.at("followers") == "followers_count");
  CHECK_THROWS_AS(reg.find("nope"), ConfigError);
}

TEST_CASE("registry rejects unknown fields and duplicates") {
  const auto bad_field = config::parse_toml(
      "[[source]]\ndataset_id = \"a\"\nrelease_year = 2015\npath = \"a.csv\"\n[source.columns]\nx = \"not_a_field\"\n");
  CHECK_THROWS_AS(registry_from_json(bad_field, "."), ConfigError);
  const auto dup = config::parse_toml(
      "[[source]]\ndataset_id = \"a\"\nrelease_year = 2015\npath = \"a.csv\"\n"
      "[[source]]\ndataset_id = \"a\"\nrelease_year = 2016\npath = \"b.csv\"\n");
  CHECK_THROWS_AS(registry_from_json(dup, "."), ConfigError);
  CHECK_THROWS_AS(registry_from_json(nlohmann::json::object(), "."), ConfigError);
}

TEST_CASE("csv source parsing maps fields and skips malformed rows") {
  const auto reg = demo_registry();
  const auto res = parse_source(reg.find("cresci-15"));
  REQUIRE(res.records.size() == 4);
  REQUIRE(res.skipped.size() == 1);
  CHECK(res.skipped[0].dataset_id == "cresci-15");
  CHECK(res.skipped[0].line == 6);

  const auto& u1 = res.records[0];
  CHECK(u1.user_id == "u1");
  CHECK(u1.label == Label::kHuman);
  CHECK(u1.domain_id == 0);
  CHECK(u1.profile.at("followers_count") == 705);
  CHECK(u1.profile.at("verified") == false);
  CHECK(u1.profile.at("lang") == "it");
  // An empty text cell is a present, empty value.
  CHECK(u1.profile.at("location") == "");
  CHECK(u1.posts == std::vector<std::string>{"Oggi al parco", "Che bella giornata!"});
  CHECK(u1.relations == std::vector<Relation>{{"follower", "u2"}, {"friend", "u3"}});

  const auto& u3 = res.records[2];
  CHECK(u3.label == Label::kBot);
  CHECK(u3.profile.count("verified") == 0);  // NULL token
  CHECK(u3.profile.count("time_zone") == 0);  // None token

  // Empty integer or flag cells count as absent.
  const auto& u4 = res.records[3];
  CHECK(u4.profile.count("time_zone") == 1);
  CHECK(u4.relations.empty());
}

TEST_CASE("jsonl source with a constant label") {
  const auto res = parse_source(demo_registry().find("midterm-18"));
  REQUIRE(res.records.size() == 3);
  CHECK(res.skipped.empty());
  for (const auto& r : res.records) {
    CHECK(r.label == Label::kBot);
    CHECK(r.domain_id == 1);
  }
  CHECK(res.records[0].profile.at("url") == "https://t.co/abc");
  CHECK(res.records[1].profile.count("description") == 0);  // JSON null
  CHECK(res.records[1].posts.empty());
}

TEST_CASE("evaluation-period sources carry no domain") {
  const auto res = parse_source(demo_registry().find("twibot-20"));
  REQUIRE(res.records.size() == 3);
  for (const auto& r : res.records) CHECK_FALSE(r.domain_id.has_value());
}

TEST_CASE("unlabeled rows are skipped with a diagnostic") {
  testing::TempDir dir;
  testing::spit(dir / "s.csv", "id,label\na,human\nb,maybe\nc,bot\n");
  SourceSchema s;
  s.dataset_id = "s";
  s.release_year = 2016;
  s.path = dir / "s.csv";
  const auto res = parse_source(s);
  CHECK(res.records.size() == 2);
  REQUIRE(res.skipped.size() == 1);
  CHECK(res.skipped[0].line == 3);
}

TEST_CASE("dedupe keeps the earliest release and sorts") {
  std::vector<UserRecord> rs{rec("x", "twibot-20", 2020, Label::kBot), rec("y", "b", 2018, Label::kHuman),
                             rec("x", "cresci-15", 2015, Label::kBot), rec("z", "a", 2015, Label::kHuman),
                             rec("y", "a", 2018, Label::kHuman)};
  const auto out = dedupe(rs);
  REQUIRE(out.size() == 3);
  CHECK(out[0].dataset_id == "a");
  CHECK(out[0].user_id == "y");  // tie on year broken by dataset_id
  CHECK(out[1].user_id == "z");
  CHECK(out[2].dataset_id == "cresci-15");
  CHECK(out[2].user_id == "x");
  CHECK(dedupe(out) == out);
}

TEST_CASE("dedupe rejects conflicting labels") {
  std::vector<UserRecord> rs{rec("x", "a", 2015, Label::kBot), rec("x", "b", 2016, Label::kHuman)};
  CHECK_THROWS_AS(dedupe(rs), Error);
}

TEST_CASE("balance keeps humans and trims bots to the slack") {
  std::vector<UserRecord> rs;
  for (int i = 0; i < 10; ++i) rs.push_back(rec("h" + std::to_string(i), "a", 2015, Label::kHuman));
  for (int i = 0; i < 30; ++i) rs.push_back(rec("b" + std::to_string(i), "a", 2015, Label::kBot));
  for (int i = 0; i < 10; ++i) rs.push_back(rec("c" + std::to_string(i), "b", 2018, Label::kBot));
  const auto out = balance(rs, 7);
  CHECK(count_label(out, Label::kHuman) == 10);
  CHECK(count_label(out, Label::kBot) == 12);
  // Surpluses over humans are 20 and 10; the quota of 28 splits 19/9.
  std::map<std::string, std::size_t> bots;
  for (const auto& r : out) {
    if (r.label == Label::kBot) ++bots[r.dataset_id];
  }
  CHECK(bots["a"] == 11);
  CHECK(bots["b"] == 1);
  CHECK(balance(rs, 7) == out);
  CHECK(balance(out, 7) == out);
}

TEST_CASE("balance leaves already balanced data alone") {
  std::vector<UserRecord> rs{rec("h", "a", 2015, Label::kHuman), rec("b1", "a", 2015, Label::kBot),
                             rec("b2", "a", 2015, Label::kBot), rec("b3", "a", 2015, Label::kBot)};
  CHECK(balance(rs, 1).size() == 4);
  std::vector<UserRecord> bots_only{rec("b1", "a", 2015, Label::kBot)};
  CHECK_THROWS_WITH(balance(bots_only, 1), doctest::Contains("no majority target"));
}

TEST_CASE("balance respects custom slack and differs by seed") {
  std::vector<UserRecord> rs;
  for (int i = 0; i < 5; ++i) rs.push_back(rec("h" + std::to_string(i), "a", 2015, Label::kHuman));
  for (int i = 0; i < 50; ++i) rs.push_back(rec("b" + std::to_string(i), "a", 2015, Label::kBot));
  const auto a = balance(rs, 1, {0});
  CHECK(count_label(a, Label::kBot) == 5);
  const auto b = balance(rs, 2, {0});
  CHECK(a != b);
}

TEST_CASE("ingest_all dedupes across sources and balances training years") {
  IngestSummary summary;
  const auto out = ingest_all(demo_registry(), 42, &summary);
  CHECK(summary.parsed == 10);
  CHECK(summary.skipped.size() == 1);
  CHECK(summary.after_dedupe == 9);  // u1 appears in cresci-15 and twibot-20
  const auto u1 = std::count_if(out.begin(), out.end(), [](const auto& r) { return r.user_id == "u1"; });
  CHECK(u1 == 1);
  std::size_t train_h = 0, train_b = 0;
  for (const auto& r : out) {
    if (!is_training_year(r.release_year)) continue;
    (r.label == Label::kHuman ? train_h : train_b) += 1;
  }
  CHECK(train_h == 2);
  CHECK(train_b <= train_h + 2);
  CHECK(std::is_sorted(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.dataset_id, a.user_id) < std::tie(b.dataset_id, b.user_id);
  }));
  CHECK(ingest_all(demo_registry(), 42) == out);
}

TEST_CASE("record json round trip") {
  testing::TempDir dir;
  auto a = testing::example_user();
  auto b = rec("t9", "twibot-20", 2020, Label::kBot);
  b.relations = {{"follower", "u87470"}};
  write_records(dir / "c.jsonl", {a, b});
  const auto back = read_records(dir / "c.jsonl");
  REQUIRE(back.size() == 2);
  CHECK(back[0] == a);
  CHECK(back[1] == b);
  testing::spit(dir / "bad.jsonl", testing::slurp(dir / "c.jsonl") + "{\"user_id\": 3}\n");
  try {
    read_records(dir / "bad.jsonl");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}
