#include "mgdil/bench/metrics.hpp"

#include "mgdil/util/error.hpp"

namespace mgdil::bench {

EvalReport metrics(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) throw Error("metrics: y_true and y_pred differ in length");
  if (y_true.empty()) throw Error("metrics: no samples");
  EvalReport report;
  report.samples = y_true.size();
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i];
    const int p = y_pred[i];
    if (t < 0 || t > 1 || p < 0 || p > 1) throw Error("metrics: labels must be 0 or 1");
    ++report.confusion[t][p];
  }
  const std::size_t correct = report.confusion[0][0] + report.confusion[1][1];
  report.accuracy = static_cast<double>(correct) / static_cast<double>(report.samples);
  double f1_sum = 0.0;
  for (int k = 0; k < 2; ++k) {
    const std::size_t tp = report.confusion[k][k];
    const std::size_t fp = report.confusion[1 - k][k];
    const std::size_t fn = report.confusion[k][1 - k];
    ClassScores& s = report.per_class[k];
    s.support = tp + fn;
    s.precision = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    s.recall = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    s.f1 = (s.precision + s.recall) > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    f1_sum += s.f1;
  }
  report.macro_f1 = f1_sum / 2.0;
  return report;
}

}  // namespace mgdil::bench
