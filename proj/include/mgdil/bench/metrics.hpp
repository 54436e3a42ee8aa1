#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>

namespace mgdil::bench {

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct EvalReport {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::array<ClassScores, 2> per_class{};
  // confusion[true][pred]
  std::array<std::array<std::size_t, 2>, 2> confusion{};
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::string config_digest;
};

// Binary labels (0 human, 1 bot). Per-class F1 is 0 when precision+recall is 0.
// Throws mgdil::Error on length mismatch, empty input or labels outside {0,1}.
EvalReport metrics(std::span<const int> y_true, std::span<const int> y_pred);

}  // namespace mgdil::bench
