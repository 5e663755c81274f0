#include "talkgrade/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "talkgrade/error.hpp"

namespace talkgrade {

ConfusionTable confusion(const Eigen::MatrixXd& preds, const Eigen::MatrixXd& labels) {
  if (preds.rows() != labels.rows() || preds.cols() != labels.cols())
    throw Error("confusion: shape mismatch (" + std::to_string(preds.rows()) + "x" +
                std::to_string(preds.cols()) + ") vs (" + std::to_string(labels.rows()) + "x" +
                std::to_string(labels.cols()) + ")");
  if (preds.cols() != static_cast<Eigen::Index>(kNumCategories))
    throw Error("confusion: expected 14 columns");
  ConfusionTable t{};
  for (Eigen::Index r = 0; r < preds.rows(); ++r)
    for (std::size_t c = 0; c < kNumCategories; ++c) {
      const bool p = preds(r, static_cast<Eigen::Index>(c)) != 0.0;
      const bool y = labels(r, static_cast<Eigen::Index>(c)) != 0.0;
      auto& k = t[c];
      if (p && y) ++k.tp;
      else if (p) ++k.fp;
      else if (y) ++k.fn;
      else ++k.tn;
    }
  return t;
}

MetricsRow metrics(const ConfusionCounts& c) {
  MetricsRow m;
  auto ratio = [&](long num, long den) {
    if (den == 0) {
      m.degenerate = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  if (m.precision + m.recall > 0)
    m.f_score = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  else
    m.degenerate = true;
  m.accuracy = ratio(c.tp + c.tn, c.total());
  return m;
}

MetricsTable metrics(const ConfusionTable& counts) {
  MetricsTable t;
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    t.rows[c] = metrics(counts[c]);
    t.average.precision += t.rows[c].precision;
    t.average.recall += t.rows[c].recall;
    t.average.f_score += t.rows[c].f_score;
    t.average.accuracy += t.rows[c].accuracy;
    t.average.degenerate = t.average.degenerate || t.rows[c].degenerate;
  }
  t.average.precision /= kNumCategories;
  t.average.recall /= kNumCategories;
  t.average.f_score /= kNumCategories;
  t.average.accuracy /= kNumCategories;
  return t;
}

std::string display_name(const std::string& model) {
  static const std::map<std::string, std::string> names = {
      {"word-seq", "Word Seq"}, {"dep-tree", "Dep. Tree"}, {"svm", "LinearSVM"}, {"lasso", "LASSO"}};
  const std::string suffix = "-unscaled";
  if (model.size() > suffix.size() &&
      model.compare(model.size() - suffix.size(), suffix.size(), suffix) == 0)
    return display_name(model.substr(0, model.size() - suffix.size())) + " (Unscaled)";
  auto it = names.find(model);
  return it == names.end() ? model : it->second;
}

std::vector<NamedTable> in_report_order(std::vector<NamedTable> tables) {
  static const std::vector<std::string> order = {"word-seq", "dep-tree", "dep-tree-unscaled", "svm",
                                                 "lasso"};
  auto rank = [&](const NamedTable& t) {
    auto it = std::find(order.begin(), order.end(), t.model);
    return static_cast<std::size_t>(it - order.begin());
  };
  std::stable_sort(tables.begin(), tables.end(),
                   [&](const NamedTable& a, const NamedTable& b) { return rank(a) < rank(b); });
  return tables;
}

std::string report_text(const std::vector<NamedTable>& input) {
  if (input.empty()) throw Error("report: no tables");
  auto tables = in_report_order(input);
  std::ostringstream os;
  char buf[256];

  os << "Average F-score, Precision, Recall and Accuracy\n";
  std::snprintf(buf, sizeof buf, "%-24s %8s %8s %8s %8s\n", "Model", "F-sc.", "Prec.", "Rec.", "Acc.");
  os << buf << std::string(60, '-') << '\n';
  for (const auto& t : tables) {
    const auto& a = t.table.average;
    std::snprintf(buf, sizeof buf, "%-24s %8.2f %8.2f %8.2f %8.2f%s\n", display_name(t.model).c_str(),
                  a.f_score, a.precision, a.recall, a.accuracy, a.degenerate ? "  *" : "");
    os << buf;
  }

  os << "\nRecall per rating category\n";
  std::snprintf(buf, sizeof buf, "%-14s", "Rating");
  os << buf;
  for (const auto& t : tables) {
    std::snprintf(buf, sizeof buf, " %22s", display_name(t.model).c_str());
    os << buf;
  }
  os << '\n' << std::string(14 + 23 * tables.size(), '-') << '\n';
  for (std::size_t c = 0; c <= kNumCategories; ++c) {
    const bool avg = c == kNumCategories;
    std::snprintf(buf, sizeof buf, "%-14s", avg ? "Average" : std::string(kCategoryNames[c]).c_str());
    os << buf;
    std::string line;
    for (const auto& t : tables) {
      const auto& row = avg ? t.table.average : t.table.rows[c];
      std::snprintf(buf, sizeof buf, " %20.2f%2s", row.recall, row.degenerate ? " *" : "");
      line += buf;
    }
    os << line.substr(0, line.find_last_not_of(' ') + 1) << '\n';
  }
  bool any = std::any_of(tables.begin(), tables.end(),
                         [](const NamedTable& t) { return t.table.average.degenerate; });
  if (any) os << "\n* a zero denominator occurred; the affected metric was reported as 0\n";
  return os.str();
}

std::string report_csv(const std::vector<NamedTable>& input) {
  if (input.empty()) throw Error("report: no tables");
  auto tables = in_report_order(input);
  std::ostringstream os;
  os << "model,category,precision,recall,f_score,accuracy\n";
  char buf[256];
  for (const auto& t : tables) {
    for (std::size_t c = 0; c <= kNumCategories; ++c) {
      const bool avg = c == kNumCategories;
      const auto& r = avg ? t.table.average : t.table.rows[c];
      std::snprintf(buf, sizeof buf, "%s,%s,%.6f,%.6f,%.6f,%.6f\n", t.model.c_str(),
                    avg ? "Average" : std::string(kCategoryNames[c]).c_str(), r.precision, r.recall,
                    r.f_score, r.accuracy);
      os << buf;
    }
  }
  return os.str();
}

std::vector<NamedTable> parse_report_csv(const std::string& csv) {
  std::istringstream is(csv);
  std::string line;
  if (!std::getline(is, line) || line != "model,category,precision,recall,f_score,accuracy")
    throw Error("metrics CSV: unexpected header");
  std::vector<NamedTable> out;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 6) throw Error("metrics CSV line " + std::to_string(line_no) + ": expected 6 fields");
    if (out.empty() || out.back().model != f[0]) out.push_back(NamedTable{f[0], {}});
    MetricsRow row{std::stod(f[2]), std::stod(f[3]), std::stod(f[4]), std::stod(f[5]), false};
    if (f[1] == "Average") {
      out.back().table.average = row;
    } else {
      auto idx = category_index(f[1]);
      if (!idx) throw Error("metrics CSV line " + std::to_string(line_no) + ": unknown category");
      out.back().table.rows[*idx] = row;
    }
  }
  return out;
}

}  // namespace talkgrade
