#pragma once

#include <array>

#include "talkgrade/eval.hpp"

namespace fixtures {

// Confusion counts with hand-worked metrics.
struct MetricCase {
  talkgrade::ConfusionCounts counts;
  double precision, recall, f_score, accuracy;
  bool degenerate;
};

inline const std::array<MetricCase, 10>& metric_cases() {
  using C = talkgrade::ConfusionCounts;  // tp, fp, tn, fn
  static const std::array<MetricCase, 10> cases{{
      {C{5, 0, 5, 0}, 1.0, 1.0, 1.0, 1.0, false},
      {C{5, 5, 0, 0}, 0.5, 1.0, 2.0 / 3.0, 0.5, false},
      {C{0, 0, 10, 0}, 0.0, 0.0, 0.0, 1.0, true},
      {C{0, 5, 5, 0}, 0.0, 0.0, 0.0, 0.5, true},
      {C{3, 1, 4, 2}, 0.75, 0.6, 2.0 / 3.0, 0.7, false},
      {C{1, 3, 2, 4}, 0.25, 0.2, 2.0 / 9.0, 0.3, false},
      {C{0, 0, 0, 4}, 0.0, 0.0, 0.0, 0.0, true},
      {C{2, 2, 2, 2}, 0.5, 0.5, 0.5, 0.5, false},
      {C{9, 1, 0, 0}, 0.9, 1.0, 18.0 / 19.0, 0.9, false},
      {C{7, 0, 0, 3}, 1.0, 0.7, 14.0 / 17.0, 0.7, false},
  }};
  return cases;
}

// Values are ratios of small integers; allow for the last bit of rounding.
constexpr double kMetricTolerance = 1e-15;

}  // namespace fixtures
