#include "mgdil/bench/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "mgdil/bench/probe.hpp"
#include "mgdil/util/csv.hpp"

namespace mgdil::bench {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

struct Job {
  std::string name;
  dil::TrainConfig config;
  std::uint64_t seed;
};

std::vector<RunResult> run_jobs(const std::vector<Job>& jobs, const dil::EncodedCorpus& source,
                                const dil::EncodedCorpus& eval, bool probe, std::size_t threads) {
  std::vector<RunResult> results(jobs.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        results[i] = run_once(jobs[i].name, source, eval, jobs[i].config, jobs[i].seed, probe);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

template <typename Real>
RunResult run_typed(const std::string& name, const dil::EncodedCorpus& source, const dil::EncodedCorpus& eval,
                    const dil::TrainConfig& config, std::uint64_t seed, bool probe) {
  const auto trained = dil::train<Real>(source, config, seed);
  RunResult r;
  r.name = name;
  r.seed = seed;
  r.lambda_adv = config.weights.adv;
  r.lambda_con = config.weights.con;
  r.best_epoch = trained.best_epoch;
  const auto pred = dil::predict_labels(trained.model, eval);
  r.report = metrics(eval.labels, pred);
  r.report.seed = seed;
  if (probe) {
    const auto h = dil::latents(trained.model, source);
    r.probe_accuracy = domain_probe(h, config.dims.latent, source.domains, seed);
  }
  return r;
}

}  // namespace

RunResult run_once(const std::string& name, const dil::EncodedCorpus& source, const dil::EncodedCorpus& eval,
                   const dil::TrainConfig& config, std::uint64_t seed, bool probe) {
  if (config.precision == dil::Precision::kFloat64) return run_typed<double>(name, source, eval, config, seed, probe);
  return run_typed<float>(name, source, eval, config, seed, probe);
}

std::vector<AblationCell> ablation_cells(const dil::TrainConfig& base) {
  return {{"full", base.weights.adv, base.weights.con},
          {"w/o adversarial", 0.0, base.weights.con},
          {"w/o contrast", base.weights.adv, 0.0},
          {"w/o adv & con", 0.0, 0.0}};
}

std::vector<RunResult> ablation_run(const dil::EncodedCorpus& source, const dil::EncodedCorpus& eval,
                                    const dil::TrainConfig& config, bool probe, std::size_t threads) {
  config.validate();
  std::vector<Job> jobs;
  for (const auto& cell : ablation_cells(config)) {
    for (std::uint64_t seed : config.seeds) {
      dil::TrainConfig c = config;
      c.weights.adv = cell.lambda_adv;
      c.weights.con = cell.lambda_con;
      jobs.push_back({cell.name, c, seed});
    }
  }
  return run_jobs(jobs, source, eval, probe, threads);
}

std::vector<RunResult> sweep(const dil::EncodedCorpus& source, const dil::EncodedCorpus& eval,
                             const dil::TrainConfig& config, SweepTarget which, const std::vector<double>& values,
                             std::size_t threads) {
  if (values.empty()) throw Error("sweep needs at least one value");
  config.validate();
  std::vector<Job> jobs;
  for (double value : values) {
    dil::TrainConfig c = config;
    c.weights.adv = which == SweepTarget::kAdv ? value : 0.2;
    c.weights.con = which == SweepTarget::kCon ? value : 0.2;
    const std::string name = std::string(which == SweepTarget::kAdv ? "lambda_adv=" : "lambda_con=") + fmt(value);
    for (std::uint64_t seed : config.seeds) jobs.push_back({name, c, seed});
  }
  return run_jobs(jobs, source, eval, false, threads);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::vector<Summary> summarize(const std::vector<RunResult>& runs) {
  std::vector<Summary> out;
  std::vector<std::string> order;
  for (const auto& r : runs) {
    if (std::find(order.begin(), order.end(), r.name) == order.end()) order.push_back(r.name);
  }
  for (const auto& name : order) {
    Summary s;
    s.name = name;
    std::vector<double> acc, f1, probe;
    for (const auto& r : runs) {
      if (r.name != name) continue;
      s.lambda_adv = r.lambda_adv;
      s.lambda_con = r.lambda_con;
      acc.push_back(r.report.accuracy);
      f1.push_back(r.report.macro_f1);
      if (r.probe_accuracy >= 0.0) probe.push_back(r.probe_accuracy);
    }
    s.runs = acc.size();
    s.accuracy_mean = mean_of(acc);
    s.accuracy_std = std_of(acc);
    s.macro_f1_mean = mean_of(f1);
    s.macro_f1_std = std_of(f1);
    if (!probe.empty()) {
      s.probe_mean = mean_of(probe);
      s.probe_std = std_of(probe);
    }
    out.push_back(s);
  }
  return out;
}

std::string runs_csv(const std::vector<RunResult>& runs) {
  std::string out = "config,seed,lambda_adv,lambda_con,accuracy,macro_f1,probe_accuracy,best_epoch\n";
  for (const auto& r : runs) {
    out += csv::join({r.name, std::to_string(r.seed), fmt(r.lambda_adv), fmt(r.lambda_con), fmt(r.report.accuracy),
                      fmt(r.report.macro_f1), r.probe_accuracy >= 0.0 ? fmt(r.probe_accuracy) : "",
                      std::to_string(r.best_epoch)}) +
           "\n";
  }
  return out;
}

std::string summary_csv(const std::vector<Summary>& summaries) {
  std::string out =
      "config,lambda_adv,lambda_con,runs,accuracy_mean,accuracy_std,macro_f1_mean,macro_f1_std,probe_mean,probe_std\n";
  for (const auto& s : summaries) {
    out += csv::join({s.name, fmt(s.lambda_adv), fmt(s.lambda_con), std::to_string(s.runs), fmt(s.accuracy_mean),
                      fmt(s.accuracy_std), fmt(s.macro_f1_mean), fmt(s.macro_f1_std),
                      s.probe_mean >= 0.0 ? fmt(s.probe_mean) : "", s.probe_mean >= 0.0 ? fmt(s.probe_std) : ""}) +
           "\n";
  }
  return out;
}

}  // namespace mgdil::bench
