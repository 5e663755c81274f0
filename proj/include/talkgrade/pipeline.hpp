#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "talkgrade/autodiff.hpp"
#include "talkgrade/bundle.hpp"
#include "talkgrade/debias.hpp"
#include "talkgrade/eval.hpp"
#include "talkgrade/training.hpp"

namespace talkgrade {

namespace fs = std::filesystem;

struct IngestOptions {
  fs::path talks, vectors;
  std::optional<fs::path> trees;
  fs::path out;
  int vector_dim = 0;  // 0: infer from the first line of the vectors file
  std::size_t min_words = kDefaultMinWords;
  std::int64_t min_age_days = kDefaultMinAgeDays;
};

/// Writes <out>/bundle.bin and <out>/summary.txt; returns the summary.
DatasetSummary cmd_ingest(const IngestOptions& opts);

/// Which talks train/dev/test and how labels are derived from ratings.
struct LabelSpec {
  std::uint64_t seed = 1;
  int test_n = 150;
  double dev_fraction = 0.1;
  bool unscaled = false;
};

struct PreparedLabels {
  Split split;
  Eigen::MatrixXd targets;  // talks x 14, scaled ratings or raw counts
  Binarized labels;         // thresholds fit on split.train
};

PreparedLabels prepare_labels(const std::vector<Talk>& talks, const LabelSpec& spec);

/// Writes labels.csv, correlation.txt and correlation.csv under `out`.
CorrelationReport cmd_debias(const fs::path& bundle, const fs::path& out, const LabelSpec& spec);

struct TrainOptions {
  fs::path bundle, out;
  ModelKind model = ModelKind::WordSeq;
  bool unscaled = false;
  TrainConfig config;
  std::optional<fs::path> lexicon;  // baselines only
};

/// "dep-tree", "dep-tree-unscaled", ...
std::string run_label(ModelKind kind, bool unscaled);

/// Writes <label>.manifest.json before training, then <label>.ckpt and,
/// for neural models, <label>.curves.csv. Returns the checkpoint path.
fs::path cmd_train(const TrainOptions& opts);

/// Evaluates each checkpoint on its test split; writes metrics.csv and
/// report.txt under `out`.
std::vector<NamedTable> cmd_eval(const fs::path& bundle, const std::vector<fs::path>& checkpoints,
                                 const fs::path& out, int threads = 0);

/// Merges metrics CSVs into one report; writes metrics.csv and report.txt.
std::vector<NamedTable> cmd_report(const std::vector<fs::path>& metrics_csvs, const fs::path& out);

/// Gradient check on a toy-size model: hidden 4, 10-word vocabulary, one
/// two-sentence talk.
ad::GradCheckReport<double> toy_gradcheck(ModelKind kind, std::uint64_t seed);
std::string gradcheck_summary(ModelKind kind, const ad::GradCheckReport<double>& report);

inline constexpr double kGradcheckTolerance = 1e-5;

std::string sha256_hex(const fs::path& file);

}  // namespace talkgrade
