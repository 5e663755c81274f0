#include "talkgrade/debias.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace talkgrade {

RatingVector scale_ratings(const RatingCounts& counts) {
  std::int64_t total = 0;
  for (auto c : counts) {
    if (c < 0) throw Error("negative rating count");
    total += c;
  }
  if (total == 0) throw Error("no ratings");
  RatingVector out;
  for (std::size_t i = 0; i < kNumCategories; ++i)
    out[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error("median of empty sample");
  const std::size_t n = values.size();
  auto mid = values.begin() + n / 2;
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  double upper = *mid;
  double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

Binarized median_binarize(const Eigen::MatrixXd& scaled, const std::vector<std::size_t>& fit_rows) {
  if (fit_rows.empty()) throw Error("median_binarize: no rows to fit thresholds on");
  if (scaled.cols() != static_cast<Eigen::Index>(kNumCategories))
    throw Error("median_binarize: expected 14 columns");
  Binarized out;
  std::vector<double> column(fit_rows.size());
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    for (std::size_t k = 0; k < fit_rows.size(); ++k) {
      if (fit_rows[k] >= static_cast<std::size_t>(scaled.rows()))
        throw Error("median_binarize: fit row out of range");
      column[k] = scaled(static_cast<Eigen::Index>(fit_rows[k]), static_cast<Eigen::Index>(c));
    }
    out.thresholds[c] = median(column);
  }
  out.labels = apply_thresholds(scaled, out.thresholds);
  return out;
}

Eigen::MatrixXd apply_thresholds(const Eigen::MatrixXd& values, const RatingVector& thresholds) {
  if (values.cols() != static_cast<Eigen::Index>(kNumCategories))
    throw Error("apply_thresholds: expected 14 columns");
  Eigen::MatrixXd labels(values.rows(), values.cols());
  for (Eigen::Index c = 0; c < values.cols(); ++c)
    labels.col(c) = (values.col(c).array() > thresholds[c]).cast<double>().matrix();
  return labels;
}

Eigen::MatrixXd raw_count_matrix(const std::vector<Talk>& talks) {
  Eigen::MatrixXd m(talks.size(), kNumCategories);
  for (std::size_t r = 0; r < talks.size(); ++r)
    for (std::size_t c = 0; c < kNumCategories; ++c)
      m(r, c) = static_cast<double>(talks[r].rating_counts[c]);
  return m;
}

Eigen::MatrixXd scaled_rating_matrix(const std::vector<Talk>& talks) {
  Eigen::MatrixXd m(talks.size(), kNumCategories);
  for (std::size_t r = 0; r < talks.size(); ++r)
    m.row(r) = scale_ratings(talks[r].rating_counts).transpose();
  return m;
}

CorrelationReport correlation_report(const std::vector<Talk>& talks) {
  if (talks.size() < 2) throw Error("correlation_report: need at least two talks");
  const auto n = static_cast<Eigen::Index>(talks.size());
  Eigen::VectorXd views(n), age(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    views[i] = static_cast<double>(talks[i].total_views);
    age[i] = static_cast<double>(talks[i].age_days);
  }
  Eigen::MatrixXd raw = raw_count_matrix(talks);
  Eigen::MatrixXd scaled = scaled_rating_matrix(talks);

  CorrelationReport rep;
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    auto corr = [&](const Eigen::MatrixXd& m, const Eigen::VectorXd& v, const char* what) {
      try {
        return pearson(m.col(col), v);
      } catch (const Error& e) {
        throw Error(std::string(kCategoryNames[c]) + " (" + what + "): " + e.what());
      }
    };
    auto& row = rep.rows[c];
    row.raw_views = corr(raw, views, "raw vs views");
    row.scaled_views = corr(scaled, views, "scaled vs views");
    row.raw_age = corr(raw, age, "raw vs age");
    row.scaled_age = corr(scaled, age, "scaled vs age");
  }
  for (const auto& r : rep.rows) {
    rep.average.raw_views += r.raw_views / kNumCategories;
    rep.average.scaled_views += r.scaled_views / kNumCategories;
    rep.average.raw_age += r.raw_age / kNumCategories;
    rep.average.scaled_age += r.scaled_age / kNumCategories;
  }
  return rep;
}

std::string CorrelationReport::to_text() const {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-14s %10s %10s %10s %10s\n", "", "views", "views", "age", "age");
  os << buf;
  std::snprintf(buf, sizeof buf, "%-14s %10s %10s %10s %10s\n", "Category", "noscale", "scale",
                "noscale", "scale");
  os << buf;
  auto line = [&](std::string_view name, const Row& r) {
    std::snprintf(buf, sizeof buf, "%-14.*s %10.3f %10.3f %10.3f %10.3f\n",
                  static_cast<int>(name.size()), name.data(), r.raw_views, r.scaled_views,
                  r.raw_age, r.scaled_age);
    os << buf;
  };
  for (std::size_t c = 0; c < kNumCategories; ++c) line(kCategoryNames[c], rows[c]);
  os << std::string(58, '-') << '\n';
  line("Average", average);
  return os.str();
}

std::string CorrelationReport::to_csv() const {
  std::ostringstream os;
  os << "category,raw_views,scaled_views,raw_age,scaled_age\n";
  char buf[200];
  auto line = [&](std::string_view name, const Row& r) {
    std::snprintf(buf, sizeof buf, "%.*s,%.6f,%.6f,%.6f,%.6f\n", static_cast<int>(name.size()),
                  name.data(), r.raw_views, r.scaled_views, r.raw_age, r.scaled_age);
    os << buf;
  };
  for (std::size_t c = 0; c < kNumCategories; ++c) line(kCategoryNames[c], rows[c]);
  line("Average", average);
  return os.str();
}

}  // namespace talkgrade
