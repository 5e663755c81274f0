// talkgrade: ingest -> debias -> train -> eval -> report, plus gradcheck.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "talkgrade/config.hpp"
#include "talkgrade/error.hpp"
#include "talkgrade/pipeline.hpp"

using namespace talkgrade;

namespace {

ModelKind model_flag(const std::string& name, bool neural_only) {
  ModelKind k = parse_model_kind(name);
  if (neural_only && !is_neural(k)) throw CLI::ValidationError("--model", "expected word-seq or dep-tree");
  return k;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predict TED-talk rating categories from transcripts"};
  app.require_subcommand(1);

  // ingest
  IngestOptions ingest;
  std::string trees_path;
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate raw inputs into a corpus bundle");
  ingest_cmd->add_option("--talks", ingest.talks, "Talks, one JSON record per line")->required();
  ingest_cmd->add_option("--vectors", ingest.vectors, "Word vectors (token v1 ... vD)")->required();
  ingest_cmd->add_option("--trees", trees_path, "Dependency trees (CoNLL-U)");
  ingest_cmd->add_option("--out", ingest.out, "Output directory")->required();
  ingest_cmd->add_option("--dim", ingest.vector_dim, "Word-vector dimension (default: infer)");
  ingest_cmd->add_option("--min-words", ingest.min_words, "Drop talks with fewer tokens")
      ->capture_default_str();
  ingest_cmd->add_option("--min-age-days", ingest.min_age_days, "Drop younger talks")
      ->capture_default_str();

  // Shared by debias/train.
  std::string bundle, out, config_path, model_name, lexicon;
  std::vector<std::string> settings;
  std::optional<std::uint64_t> seed;
  std::optional<int> test_n;
  std::optional<double> dev_fraction;
  bool unscaled = false;
  auto add_split_flags = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Random seed (default 1)");
    cmd->add_option("--test-n", test_n, "Test-set size (default 150)");
    cmd->add_option("--dev-fraction", dev_fraction, "Dev share of the non-test talks (default 0.1)");
    cmd->add_flag("--unscaled", unscaled, "Label from raw counts instead of scaled ratings");
  };

  auto* debias_cmd = app.add_subcommand("debias", "Scale, binarize and audit the ratings");
  debias_cmd->add_option("--bundle", bundle, "Corpus bundle from ingest")->required();
  debias_cmd->add_option("--out", out, "Output directory")->required();
  add_split_flags(debias_cmd);

  auto* train_cmd = app.add_subcommand("train", "Train one model and write its checkpoint");
  train_cmd->add_option("--bundle", bundle, "Corpus bundle from ingest")->required();
  train_cmd->add_option("--out", out, "Output directory")->required();
  train_cmd->add_option("--model", model_name, "word-seq | dep-tree | svm | lasso")
      ->required()
      ->check(CLI::IsMember({"word-seq", "dep-tree", "svm", "lasso"}));
  train_cmd->add_option("--config", config_path, "key = value settings file");
  train_cmd->add_option("--set", settings, "Override one setting, key=value (repeatable)");
  train_cmd->add_option("--lexicon", lexicon, "Word-category lexicon (svm, lasso)");
  add_split_flags(train_cmd);

  std::vector<std::string> checkpoints;
  int threads = 0;
  auto* eval_cmd = app.add_subcommand("eval", "Score checkpoints on their test split");
  eval_cmd->add_option("--bundle", bundle, "Corpus bundle from ingest")->required();
  eval_cmd->add_option("--checkpoint", checkpoints, "Checkpoint file (repeatable)")->required();
  eval_cmd->add_option("--out", out, "Output directory")->required();
  eval_cmd->add_option("--threads", threads, "Worker threads (default: TALKGRADE_THREADS or all)");

  std::vector<std::string> metrics_files;
  auto* report_cmd = app.add_subcommand("report", "Merge metrics CSVs into one report");
  report_cmd->add_option("metrics", metrics_files, "metrics.csv files")->required();
  report_cmd->add_option("--out", out, "Output directory")->required();

  std::string gc_model = "word-seq";
  std::uint64_t gc_seed = 1;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference check of a toy-size model");
  gc_cmd->add_option("--model", gc_model, "word-seq | dep-tree")
      ->capture_default_str()
      ->check(CLI::IsMember({"word-seq", "dep-tree"}));
  gc_cmd->add_option("--seed", gc_seed, "Parameter seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*ingest_cmd) {
      if (!trees_path.empty()) ingest.trees = trees_path;
      DatasetSummary s = cmd_ingest(ingest);
      std::cout << s.to_text();
    } else if (*debias_cmd) {
      LabelSpec spec;
      if (seed) spec.seed = *seed;
      if (test_n) spec.test_n = *test_n;
      if (dev_fraction) spec.dev_fraction = *dev_fraction;
      spec.unscaled = unscaled;
      std::cout << cmd_debias(bundle, out, spec).to_text();
    } else if (*train_cmd) {
      TrainOptions opts;
      opts.bundle = bundle;
      opts.out = out;
      opts.model = model_flag(model_name, false);
      opts.unscaled = unscaled;
      if (!config_path.empty()) opts.config = load_config(config_path);
      for (const auto& s : settings) apply_assignment(opts.config, s);
      if (seed) opts.config.seed = *seed;
      if (test_n) opts.config.test_n = *test_n;
      if (dev_fraction) opts.config.dev_fraction = *dev_fraction;
      if (!lexicon.empty()) opts.lexicon = lexicon;
      std::cout << cmd_train(opts).string() << '\n';
    } else if (*eval_cmd) {
      std::vector<fs::path> paths(checkpoints.begin(), checkpoints.end());
      std::cout << report_text(cmd_eval(bundle, paths, out, threads));
    } else if (*report_cmd) {
      std::vector<fs::path> paths(metrics_files.begin(), metrics_files.end());
      std::cout << report_text(cmd_report(paths, out));
    } else if (*gc_cmd) {
      const ModelKind kind = model_flag(gc_model, true);
      auto rep = toy_gradcheck(kind, gc_seed);
      std::cout << gradcheck_summary(kind, rep);
      return rep.passed ? 0 : 1;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "talkgrade: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "talkgrade: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
