#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "mgdil/bench/experiments.hpp"
#include "mgdil/bench/metrics.hpp"
#include "mgdil/bench/probe.hpp"
#include "mgdil/bench/report.hpp"
#include "mgdil/bench/synthetic.hpp"
#include "mgdil/util/digest.hpp"
#include "mgdil/util/error.hpp"
#include "oracles.hpp"
#include "testing.hpp"

using namespace mgdil;
using namespace mgdil::bench;

TEST_CASE("metrics examples") {
  const std::vector<int> y{0, 1, 0, 1};
  const auto perfect = metrics(y, y);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.macro_f1 == 1.0);
  const auto zeros = metrics(y, std::vector<int>{0, 0, 0, 0});
  CHECK(zeros.accuracy == 0.5);
  CHECK(std::abs(zeros.macro_f1 - 1.0 / 3.0) < 1e-15);
  CHECK(zeros.per_class[1].f1 == 0.0);
  CHECK(zeros.confusion[1][0] == 2);
  CHECK_THROWS_AS(metrics(y, std::vector<int>{0}), Error);
  CHECK_THROWS_AS(metrics(std::vector<int>{}, std::vector<int>{}), Error);
  CHECK_THROWS_AS(metrics(std::vector<int>{2}, std::vector<int>{0}), Error);
}

TEST_CASE("metrics agree with the brute-force oracle on every short label vector") {
  std::size_t cases = 0;
  for (std::size_t n = 1; n <= 8; ++n) {
    for (unsigned t = 0; t < (1u << n); ++t) {
      for (unsigned p = 0; p < (1u << n); ++p) {
        std::vector<int> yt(n), yp(n);
        for (std::size_t i = 0; i < n; ++i) {
          yt[i] = static_cast<int>((t >> i) & 1u);
          yp[i] = static_cast<int>((p >> i) & 1u);
        }
        const auto r = metrics(yt, yp);
        const auto o = oracle::binary_metrics(yt, yp);
        std::size_t total = 0;
        for (const auto& row : r.confusion) total += row[0] + row[1];
        if (std::abs(r.accuracy - o.accuracy) > 1e-12 || std::abs(r.macro_f1 - o.macro_f1) > 1e-12 || total != n ||
            std::abs(r.macro_f1 - (r.per_class[0].f1 + r.per_class[1].f1) / 2.0) > 1e-15) {
          FAIL_CHECK("mismatch at n=" << n << " t=" << t << " p=" << p);
        }
        ++cases;
      }
    }
  }
  CHECK(cases == 87380);
}

TEST_CASE("metrics are invariant under paired shuffles") {
  std::mt19937_64 rng(8);
  std::vector<int> yt(50), yp(50);
  for (std::size_t i = 0; i < 50; ++i) {
    yt[i] = static_cast<int>(rng() % 2);
    yp[i] = static_cast<int>(rng() % 2);
  }
  const auto base = metrics(yt, yp);
  std::vector<std::size_t> idx(50);
  for (std::size_t i = 0; i < 50; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<int> st(50), sp(50);
  for (std::size_t i = 0; i < 50; ++i) {
    st[i] = yt[idx[i]];
    sp[i] = yp[idx[i]];
  }
  const auto shuffled = metrics(st, sp);
  CHECK(shuffled.accuracy == base.accuracy);
  CHECK(shuffled.macro_f1 == base.macro_f1);
}

TEST_CASE("synthetic corpus shape and reproducibility") {
  SyntheticSpec spec;
  spec.samples_per_cell = 200;
  spec.target_samples_per_class = 100;
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  CHECK(a.source.x == b.source.x);
  CHECK(a.source.size() == 200 * 2 * 3);
  CHECK(a.target.size() == 200);
  for (int d : a.target.domains) CHECK(d == dil::kNoDomain);

  // Class means on axis 0 sit 2*mu apart, within sampling error.
  double m[2] = {0, 0};
  std::size_t c[2] = {0, 0};
  for (std::size_t i = 0; i < a.source.size(); ++i) {
    const auto y = static_cast<std::size_t>(a.source.labels[i]);
    m[y] += a.source.row(i)[0];
    ++c[y];
  }
  const double gap = m[1] / static_cast<double>(c[1]) - m[0] / static_cast<double>(c[0]);
  CHECK(std::abs(gap - 2 * spec.mu) < 3 * spec.sigma * std::sqrt(2.0 / 600.0));

  SyntheticSpec bad = spec;
  bad.sigma = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = spec;
  bad.source_domains = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("domain probe responds to domain signal") {
  const std::size_t n = 300, dim = 3;
  std::vector<int> domains(n);
  std::vector<double> onehot(n * dim, 0.0), constant(n * dim, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    domains[i] = static_cast<int>(i % 3);
    onehot[i * dim + static_cast<std::size_t>(domains[i])] = 1.0;
  }
  CHECK(domain_probe(onehot, dim, domains, 1) > 0.95);
  CHECK(std::abs(domain_probe(constant, dim, domains, 1) - 1.0 / 3.0) < 0.12);

  std::vector<int> shuffled = domains;
  std::mt19937_64 rng(4);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  CHECK(std::abs(domain_probe(onehot, dim, shuffled, 1) - 1.0 / 3.0) < 0.15);

  std::vector<int> single(n, 0);
  CHECK_THROWS_AS(domain_probe(onehot, dim, single, 1), Error);
}

TEST_CASE("mean and sample std") {
  CHECK(mean_of({1.0, 2.0, 3.0}) == 2.0);
  CHECK(std_of({1.0, 2.0, 3.0}) == 1.0);
  CHECK(std_of({5.0}) == 0.0);
}

TEST_CASE("ablation with equal weights across cells gives identical reports") {
  SyntheticSpec spec;
  spec.dim = 8;
  spec.samples_per_cell = 20;
  spec.target_samples_per_class = 20;
  const auto corpus = generate_synthetic(spec);
  dil::TrainConfig cfg;
  cfg.dims = {8, 8, 4, 4, 3, 2};
  cfg.epochs = 1;
  cfg.seeds = {1, 2};
  cfg.precision = dil::Precision::kFloat64;
  cfg.weights.adv = 0.0;
  cfg.weights.con = 0.0;
  const auto runs = ablation_run(corpus.source, corpus.target, cfg, false, 1);
  REQUIRE(runs.size() == 8);
  for (std::size_t cell = 1; cell < 4; ++cell) {
    for (std::size_t s = 0; s < 2; ++s) {
      CHECK(runs[cell * 2 + s].report.accuracy == runs[s].report.accuracy);
      CHECK(runs[cell * 2 + s].report.macro_f1 == runs[s].report.macro_f1);
    }
  }
  const auto summaries = summarize(runs);
  REQUIRE(summaries.size() == 4);
  CHECK(summaries[0].runs == 2);
  CHECK(summaries[0].name == ablation_cells(cfg)[0].name);

  const auto sweep_runs = sweep(corpus.source, corpus.target, cfg, SweepTarget::kAdv, {0.2}, 1);
  CHECK(sweep_runs.size() == 2);
  CHECK(sweep_runs[0].lambda_adv == 0.2);
  CHECK(sweep_runs[0].lambda_con == 0.2);
}

TEST_CASE("distribution report tallies") {
  summary::PostSummary s1, s2;
  for (auto d : summary::kDimensions) {
    s1[d] = {summary::vocabulary(d)[0]};
    s2[d] = {summary::vocabulary(d)[0], summary::vocabulary(d)[1]};
  }
  s1[summary::Dimension::kTheme] = {"Politics"};
  s2[summary::Dimension::kTheme] = {"Politics", "Sports", "Culture"};
  const auto rows = distribution_report({{s1, ingest::Label::kBot, "a"}, {s2, ingest::Label::kBot, "a"},
                                         {s1, ingest::Label::kHuman, "b"}});
  auto find = [&](const std::string& ds, ingest::Label l, const std::string& cat) {
    for (const auto& r : rows) {
      if (r.dataset_id == ds && r.label == l && r.category == cat && r.dimension == summary::Dimension::kTheme) return r;
    }
    FAIL("row not found");
    return DistributionRow{};
  };
  CHECK(find("a", ingest::Label::kBot, "Politics").frequency == 1.0);
  CHECK(find("a", ingest::Label::kBot, "Sports").frequency == 0.5);
  CHECK(find("a", ingest::Label::kBot, "Lifestyle").count == 0);
  CHECK(find("b", ingest::Label::kHuman, "Politics").frequency == 1.0);
  CHECK(find("b", ingest::Label::kHuman, "Politics").users == 1);

  // Per block the frequencies sum to label assignments / users: (1 + 3) / 2.
  double theme_sum = 0.0;
  for (const auto& r : rows) {
    if (r.dataset_id == "a" && r.label == ingest::Label::kBot && r.dimension == summary::Dimension::kTheme) {
      theme_sum += r.frequency;
    }
  }
  CHECK(theme_sum == 2.0);
  CHECK(rows.size() == 2 * 28);
  const auto csv = distribution_csv(rows);
  CHECK(csv.rfind("dataset_id,label,dimension,category,count,users,frequency\n", 0) == 0);
  CHECK(csv.find("a,bot,theme,Sports,1,2,0.500000\n") != std::string::npos);
  CHECK(distribution_report({}).empty());
}

TEST_CASE("run manifest digests inputs") {
  testing::TempDir dir;
  testing::spit(dir / "in.txt", "hello\n");
  const auto m = run_manifest("train", {{"epochs", 5}}, {42, 43}, {dir / "in.txt"}, {});
  CHECK(m.at("command") == "train");
  CHECK(m.at("seeds") == nlohmann::json::array({42, 43}));
  // git hash-object of "hello\n".
  CHECK(m.at("inputs")[0].at("git_blob_id") == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(m.at("outputs").empty());
  CHECK(run_manifest("train", {{"epochs", 5}}, {42, 43}, {dir / "in.txt"}, {}) == m);
}
