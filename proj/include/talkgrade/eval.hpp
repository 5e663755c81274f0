#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "talkgrade/categories.hpp"

namespace talkgrade {

struct ConfusionCounts {
  long tp = 0, fp = 0, tn = 0, fn = 0;
  long total() const { return tp + fp + tn + fn; }
};

using ConfusionTable = std::array<ConfusionCounts, kNumCategories>;

/// Per-category counts, label 1 = positive. Both matrices are talks x 14
/// with 0/1 entries.
ConfusionTable confusion(const Eigen::MatrixXd& preds, const Eigen::MatrixXd& labels);

struct MetricsRow {
  double precision = 0, recall = 0, f_score = 0, accuracy = 0;
  bool degenerate = false;  // some denominator was zero; that metric is 0
};

MetricsRow metrics(const ConfusionCounts& c);

struct MetricsTable {
  std::array<MetricsRow, kNumCategories> rows{};
  MetricsRow average;  // macro average over the 14 rows
};

MetricsTable metrics(const ConfusionTable& counts);

struct NamedTable {
  std::string model;  // word-seq, dep-tree, dep-tree-unscaled, svm, lasso, ...
  MetricsTable table;
};

/// Human-readable row label, e.g. "Dep. Tree (Unscaled)".
std::string display_name(const std::string& model);

/// Tables in report order: word-seq, dep-tree, dep-tree-unscaled, svm,
/// lasso, then anything else in input order.
std::vector<NamedTable> in_report_order(std::vector<NamedTable> tables);

/// Averages table followed by the per-category recall table.
std::string report_text(const std::vector<NamedTable>& tables);

/// model,category,precision,recall,f_score,accuracy (14 rows plus an
/// "Average" row per model).
std::string report_csv(const std::vector<NamedTable>& tables);

/// Inverse of report_csv.
std::vector<NamedTable> parse_report_csv(const std::string& csv);

}  // namespace talkgrade
