#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "talkgrade/corpus.hpp"
#include "talkgrade/error.hpp"

namespace talkgrade {

using RatingVector = Eigen::Matrix<double, kNumCategories, 1>;

/// Divides each count by the talk's total so that the view count, which
/// multiplies every category alike, drops out.
RatingVector scale_ratings(const RatingCounts& counts);

struct Binarized {
  Eigen::MatrixXd labels;  // rows = talks, cols = categories, entries 0/1
  RatingVector thresholds;
};

/// Median of `values` (mean of the two central values for even lengths).
double median(std::vector<double> values);

/// Thresholds are column medians over `fit_rows` only; a label is 1 iff the
/// value is strictly above its column's threshold.
Binarized median_binarize(const Eigen::MatrixXd& scaled, const std::vector<std::size_t>& fit_rows);

/// Applies previously fitted thresholds.
Eigen::MatrixXd apply_thresholds(const Eigen::MatrixXd& values, const RatingVector& thresholds);

/// Pearson product-moment correlation. Throws "degenerate series" when
/// either argument has zero variance.
template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar pearson(const Eigen::MatrixBase<DerivedX>& x,
                                  const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  if (x.size() != y.size()) throw Error("pearson: series lengths differ");
  if (x.size() < 2) throw Error("pearson: need at least two observations");
  auto xc = (x.array() - x.mean()).eval();
  auto yc = (y.array() - y.mean()).eval();
  Scalar sxx = xc.square().sum();
  Scalar syy = yc.square().sum();
  if (!(sxx > 0) || !(syy > 0)) throw Error("degenerate series");
  Scalar r = (xc * yc).sum() / std::sqrt(sxx * syy);
  return std::clamp(r, Scalar(-1), Scalar(1));
}

struct CorrelationReport {
  struct Row {
    double raw_views = 0, scaled_views = 0, raw_age = 0, scaled_age = 0;
  };
  std::array<Row, kNumCategories> rows{};
  Row average;

  std::string to_text() const;
  std::string to_csv() const;
};

CorrelationReport correlation_report(const std::vector<Talk>& talks);

/// Talks × 14 matrix of raw counts (as reals) or of scaled ratings.
Eigen::MatrixXd raw_count_matrix(const std::vector<Talk>& talks);
Eigen::MatrixXd scaled_rating_matrix(const std::vector<Talk>& talks);

}  // namespace talkgrade
