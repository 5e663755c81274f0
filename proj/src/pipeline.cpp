#include "talkgrade/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <memory>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "talkgrade/baselines.hpp"
#include "talkgrade/checkpoint.hpp"
#include "talkgrade/config.hpp"
#include "talkgrade/error.hpp"

#ifndef TALKGRADE_REVISION
#define TALKGRADE_REVISION "unknown"
#endif

namespace talkgrade {

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory " + dir.string() + ": " + ec.message());
}

int infer_vector_dim(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open word vectors " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    int n = -1;
    while (ls >> tok) ++n;
    if (n > 0) return n;
  }
  throw Error("word vector file is empty: " + path.string());
}

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

std::string join_hex(const RatingVector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? " " : "") + hex(v[i]);
  return out;
}

RatingVector parse_thresholds(const std::string& text) {
  std::istringstream is(text);
  RatingVector v;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::string tok;
    if (!(is >> tok)) throw Error("checkpoint: expected 14 thresholds");
    v[i] = std::strtod(tok.c_str(), nullptr);
  }
  return v;
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& m, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

TalkInput talk_input(const CorpusBundle& b, std::size_t i, ModelKind kind) {
  TalkInput in;
  in.sentences = &b.talks[i].sentences;
  if (kind == ModelKind::DepTree) in.trees = b.trees_for(b.talks[i].id);
  return in;
}

std::unique_ptr<NeuralModel> make_model(ModelKind kind, const CorpusBundle& b,
                                        const ArchitectureSpec& arch, const Vocab* vocab) {
  if (kind == ModelKind::WordSeq) return std::make_unique<WordSeqModel>(b.vectors, arch);
  if (!vocab) throw Error("dep-tree model needs a tag vocabulary");
  return std::make_unique<DepTreeModel>(b.vectors, *vocab, arch);
}

struct RunContext {
  CorpusBundle bundle;
  LabelSpec spec;
  PreparedLabels prepared;
};

// ---------------------------------------------------------------------------
// Baselines.

const std::vector<double> kCGrid = {0.01, 0.1, 1.0, 10.0, 100.0};

Eigen::MatrixXd feature_matrix(const CorpusBundle& b, const std::vector<std::size_t>& idx,
                               const Lexicon& lex) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(lex.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    X.row(static_cast<Eigen::Index>(i)) = extract_features(b.talks[idx[i]], lex).transpose();
  return X;
}

Margin margin_of(ModelKind k) { return k == ModelKind::Svm ? Margin::Svm : Margin::Lasso; }

LinearModel fit_linear(ModelKind k, const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double C) {
  return k == ModelKind::Svm ? train_svm(X, y, C) : train_lasso(X, y, C);
}

// Constant classifier for a category whose training labels are all one class.
LinearModel constant_model(ModelKind k, Eigen::Index d, int label) {
  LinearModel m{Eigen::VectorXd::Zero(d), 0.0, 0.0};
  const double favour_one = label == 1 ? 1.0 : -1.0;
  m.b = k == ModelKind::Svm ? -favour_one : favour_one;
  return m;
}

double accuracy(const LinearModel& m, ModelKind k, const Eigen::MatrixXd& X, const Eigen::VectorXd& y01) {
  if (X.rows() == 0) return 0.0;
  long hits = 0;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    hits += predict_linear(m, X.row(i).transpose(), margin_of(k)) == static_cast<int>(y01[i]);
  return static_cast<double>(hits) / static_cast<double>(X.rows());
}

Checkpoint train_baseline(const RunContext& ctx, const TrainOptions& opts) {
  if (!opts.lexicon) throw Error("baseline models require --lexicon");
  const Lexicon lex = Lexicon::load(*opts.lexicon);
  const auto& split = ctx.prepared.split;
  const Eigen::MatrixXd Xtr = feature_matrix(ctx.bundle, split.train, lex);
  const Eigen::MatrixXd Xdev = feature_matrix(ctx.bundle, split.dev, lex);
  const Eigen::MatrixXd Ytr = rows_of(ctx.prepared.labels.labels, split.train);
  const Eigen::MatrixXd Ydev = rows_of(ctx.prepared.labels.labels, split.dev);
  const double fixed_c = opts.model == ModelKind::Svm ? opts.config.svm_c : opts.config.lasso_c;

  Checkpoint ck;
  ck.set_meta("lexicon_categories", std::to_string(lex.size()));
  std::istringstream lex_lines(lex.to_text());
  std::size_t n = 0;
  for (std::string line; std::getline(lex_lines, line); ++n) {
    char key[32];
    std::snprintf(key, sizeof key, "lexicon.%04zu", n);
    ck.set_meta(key, line);
  }

  for (std::size_t c = 0; c < kNumCategories; ++c) {
    const std::string name(kCategoryNames[c]);
    const auto col = static_cast<Eigen::Index>(c);
    Eigen::VectorXd y01 = Ytr.col(col);
    Eigen::VectorXd ypm = (2.0 * y01.array() - 1.0).matrix();
    const double positives = y01.sum();
    LinearModel best;
    double chosen_c = 0;
    if (positives == 0 || positives == static_cast<double>(y01.size())) {
      best = constant_model(opts.model, Xtr.cols(), positives == 0 ? 0 : 1);
      ck.set_meta("single_class." + name, "1");
    } else if (fixed_c > 0) {
      best = fit_linear(opts.model, Xtr, ypm, fixed_c);
      chosen_c = fixed_c;
    } else {
      // Dev accuracy picks C; ties keep the smaller C. Without a dev split
      // the training accuracy decides.
      const bool use_dev = Xdev.rows() > 0;
      double best_acc = -1;
      for (double C : kCGrid) {
        LinearModel m = fit_linear(opts.model, Xtr, ypm, C);
        double acc = use_dev ? accuracy(m, opts.model, Xdev, Ydev.col(col)) : accuracy(m, opts.model, Xtr, y01);
        if (acc > best_acc) {
          best_acc = acc;
          best = m;
          chosen_c = C;
        }
      }
    }
    ck.set_meta("C." + name, hex(chosen_c));
    ck.add_tensor(name + ".w", best.w);
    ck.add_tensor(name + ".b", Eigen::MatrixXd::Constant(1, 1, best.b));
  }
  return ck;
}

Eigen::MatrixXd predict_baseline(const Checkpoint& ck, ModelKind kind, const CorpusBundle& b,
                                 const std::vector<std::size_t>& idx) {
  std::string text;
  for (const auto& [k, v] : ck.all_meta())
    if (k.rfind("lexicon.", 0) == 0) text += v + "\n";
  const Lexicon lex = Lexicon::parse(text);
  const Eigen::MatrixXd X = feature_matrix(b, idx, lex);
  Eigen::MatrixXd preds(X.rows(), static_cast<Eigen::Index>(kNumCategories));
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    const std::string name(kCategoryNames[c]);
    LinearModel m{ck.tensor(name + ".w").col(0), ck.tensor(name + ".b")(0, 0), 0.0};
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      preds(i, static_cast<Eigen::Index>(c)) = predict_linear(m, X.row(i).transpose(), margin_of(kind));
  }
  return preds;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string sha256_hex(const fs::path& file) {
  const std::string data = read_file(file);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

DatasetSummary cmd_ingest(const IngestOptions& opts) {
  auto talks = filter_talks(load_talks(opts.talks), opts.min_words, opts.min_age_days,
                            default_banned_keywords());
  if (talks.empty()) throw Error("no talks left after filtering " + opts.talks.string());

  CorpusBundle b;
  std::set<std::string> ids;
  std::set<std::string> vocab;
  for (const auto& t : talks) {
    if (!ids.insert(t.id).second) throw Error("duplicate talk id '" + t.id + "'");
    for (const auto& s : t.sentences) vocab.insert(s.begin(), s.end());
  }

  if (opts.trees) {
    for (auto& [key, tree] : load_dep_trees(*opts.trees)) {
      if (!ids.count(key.first)) continue;  // talk filtered out
      for (const auto& node : tree.nodes) vocab.insert(node.token);
      b.trees.emplace(key, std::move(tree));
    }
    b.has_trees = true;
    for (const auto& t : talks)
      if (b.trees.lower_bound({t.id, 0}) == b.trees.end() ||
          b.trees.lower_bound({t.id, 0})->first.first != t.id)
        throw Error("trees file has no sentences for talk '" + t.id + "'");
  }

  const int dim = opts.vector_dim > 0 ? opts.vector_dim : infer_vector_dim(opts.vectors);
  b.vectors = load_word_vectors(opts.vectors, dim).restricted_to({vocab.begin(), vocab.end()});
  b.talks = std::move(talks);

  ensure_dir(opts.out);
  b.save(opts.out / "bundle.bin");
  DatasetSummary s = summarize(b);
  std::string text = s.to_text();
  char buf[96];
  std::snprintf(buf, sizeof buf, "\nWord vectors: %zu of %zu corpus tokens covered (dim %d)\n",
                b.vectors.size(), vocab.size(), dim);
  write_file(opts.out / "summary.txt", text + buf);
  return s;
}

PreparedLabels prepare_labels(const std::vector<Talk>& talks, const LabelSpec& spec) {
  PreparedLabels p;
  if (spec.test_n < 0) throw Error("test_n must be non-negative");
  p.split = split_data(talks.size(), static_cast<std::size_t>(spec.test_n), spec.dev_fraction, spec.seed);
  if (p.split.train.empty()) throw Error("training split is empty; lower --test-n or --dev-fraction");
  p.targets = spec.unscaled ? raw_count_matrix(talks) : scaled_rating_matrix(talks);
  p.labels = median_binarize(p.targets, p.split.train);
  return p;
}

CorrelationReport cmd_debias(const fs::path& bundle_path, const fs::path& out, const LabelSpec& spec) {
  const CorpusBundle b = CorpusBundle::load(bundle_path);
  const PreparedLabels p = prepare_labels(b.talks, spec);
  ensure_dir(out);

  std::vector<const char*> part(b.talks.size(), "train");
  for (auto i : p.split.dev) part[i] = "dev";
  for (auto i : p.split.test) part[i] = "test";

  std::ostringstream os;
  os << "talk_id,split";
  for (auto name : kCategoryNames) os << ",value_" << name;
  for (auto name : kCategoryNames) os << ",label_" << name;
  os << '\n';
  char buf[64];
  for (std::size_t i = 0; i < b.talks.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    os << b.talks[i].id << ',' << part[i];
    for (Eigen::Index c = 0; c < p.targets.cols(); ++c) {
      std::snprintf(buf, sizeof buf, ",%.17g", p.targets(r, c));
      os << buf;
    }
    for (Eigen::Index c = 0; c < p.targets.cols(); ++c) os << ',' << static_cast<int>(p.labels.labels(r, c));
    os << '\n';
  }
  os << "threshold,train";
  for (Eigen::Index c = 0; c < p.labels.thresholds.size(); ++c) {
    std::snprintf(buf, sizeof buf, ",%.17g", p.labels.thresholds[c]);
    os << buf;
  }
  for (std::size_t c = 0; c < kNumCategories; ++c) os << ',';
  os << '\n';
  write_file(out / "labels.csv", os.str());

  CorrelationReport rep = correlation_report(b.talks);
  write_file(out / "correlation.txt", rep.to_text());
  write_file(out / "correlation.csv", rep.to_csv());
  return rep;
}

std::string run_label(ModelKind kind, bool unscaled) {
  return to_string(kind) + (unscaled ? "-unscaled" : "");
}

fs::path cmd_train(const TrainOptions& opts) {
  opts.config.validate();
  const std::string label = run_label(opts.model, opts.unscaled);
  RunContext ctx;
  ctx.bundle = CorpusBundle::load(opts.bundle);
  if (opts.model == ModelKind::DepTree && (!ctx.bundle.has_trees || ctx.bundle.trees.empty()))
    throw Error("trees required: the dep-tree model needs a bundle ingested with --trees");
  ctx.spec = LabelSpec{opts.config.seed, opts.config.test_n, opts.config.dev_fraction, opts.unscaled};
  ctx.prepared = prepare_labels(ctx.bundle.talks, ctx.spec);

  ensure_dir(opts.out);
  const fs::path ckpt_path = opts.out / (label + ".ckpt");
  const fs::path curves_path = opts.out / (label + ".curves.csv");
  const fs::path manifest_path = opts.out / (label + ".manifest.json");

  nlohmann::ordered_json manifest;
  manifest["command"] = "train";
  manifest["model"] = to_string(opts.model);
  manifest["label"] = label;
  manifest["unscaled"] = opts.unscaled;
  manifest["seed"] = opts.config.seed;
  manifest["revision"] = TALKGRADE_REVISION;
  manifest["dataset"] = {{"path", opts.bundle.string()}, {"sha256", sha256_hex(opts.bundle)}};
  {
    nlohmann::ordered_json cfg;
    std::istringstream lines(config_to_text(opts.config));
    for (std::string line; std::getline(lines, line);) {
      auto eq = line.find(" = ");
      cfg[line.substr(0, eq)] = line.substr(eq + 3);
    }
    manifest["config"] = cfg;
  }
  if (opts.lexicon) manifest["lexicon"] = {{"path", opts.lexicon->string()}, {"sha256", sha256_hex(*opts.lexicon)}};
  manifest["outputs"] = {{"checkpoint", ckpt_path.string()}};
  if (is_neural(opts.model)) manifest["outputs"]["curves"] = curves_path.string();
  manifest["started_at"] = utc_now();
  write_file(manifest_path, manifest.dump(2) + "\n");

  auto stamp = [&](Checkpoint& ck) {
    ck.set_meta("model", to_string(opts.model));
    ck.set_meta("label", label);
    ck.set_meta("seed", std::to_string(opts.config.seed));
    ck.set_meta("test_n", std::to_string(opts.config.test_n));
    ck.set_meta("dev_fraction", hex(opts.config.dev_fraction));
    ck.set_meta("unscaled", opts.unscaled ? "1" : "0");
    ck.set_meta("thresholds", join_hex(ctx.prepared.labels.thresholds));
  };

  if (is_neural(opts.model)) {
    ArchitectureSpec arch{ctx.bundle.vectors.dim(), opts.config.hidden_dim, opts.config.pos_dim,
                          opts.config.dep_dim};
    const Vocab vocab = build_vocab(ctx.bundle.trees);
    auto model = make_model(opts.model, ctx.bundle, arch, &vocab);
    init_params(*model, opts.config.seed);

    auto examples = [&](const std::vector<std::size_t>& idx) {
      std::vector<Example> out;
      out.reserve(idx.size());
      for (auto i : idx)
        out.push_back(Example{talk_input(ctx.bundle, i, opts.model),
                              ctx.prepared.labels.labels.row(static_cast<Eigen::Index>(i)).transpose()});
      return out;
    };
    const auto train_set = examples(ctx.prepared.split.train);
    const auto dev_set = examples(ctx.prepared.split.dev);

    TrainHooks hooks;
    hooks.on_checkpoint = [&](int epoch, const NeuralModel& m) {
      Checkpoint ck = to_checkpoint(m);
      stamp(ck);
      ck.set_meta("epoch", std::to_string(epoch));
      ck.save(ckpt_path);
    };
    TrainResult res = train(*model, opts.config, train_set, dev_set, hooks);
    if (res.best_epoch == 0) {
      // Nothing improved (or no epochs ran): persist the parameters we hold.
      Checkpoint ck = to_checkpoint(*model);
      stamp(ck);
      ck.set_meta("epoch", "0");
      ck.save(ckpt_path);
    }
    write_file(curves_path, curves_csv(res.curve));
  } else {
    Checkpoint ck = train_baseline(ctx, opts);
    stamp(ck);
    ck.save(ckpt_path);
  }

  manifest["finished_at"] = utc_now();
  write_file(manifest_path, manifest.dump(2) + "\n");
  return ckpt_path;
}

std::vector<NamedTable> cmd_eval(const fs::path& bundle_path, const std::vector<fs::path>& checkpoints,
                                 const fs::path& out, int threads) {
  if (checkpoints.empty()) throw Error("eval needs at least one checkpoint");
  const CorpusBundle b = CorpusBundle::load(bundle_path);
  if (threads <= 0) threads = default_threads();
  std::vector<NamedTable> tables;
  for (const auto& path : checkpoints) {
    const Checkpoint ck = Checkpoint::load(path);
    const ModelKind kind = parse_model_kind(ck.meta("model"));
    LabelSpec spec;
    spec.seed = std::stoull(ck.meta("seed"));
    spec.test_n = std::stoi(ck.meta("test_n"));
    spec.dev_fraction = std::strtod(ck.meta("dev_fraction").c_str(), nullptr);
    spec.unscaled = ck.meta("unscaled") == "1";
    const Split split = split_data(b.talks.size(), static_cast<std::size_t>(spec.test_n),
                                   spec.dev_fraction, spec.seed);
    if (split.test.empty()) throw Error("checkpoint " + path.string() + " has an empty test split");
    const Eigen::MatrixXd targets = spec.unscaled ? raw_count_matrix(b.talks) : scaled_rating_matrix(b.talks);
    const Eigen::MatrixXd labels = apply_thresholds(rows_of(targets, split.test), parse_thresholds(ck.meta("thresholds")));

    Eigen::MatrixXd preds(labels.rows(), labels.cols());
    if (is_neural(kind)) {
      if (kind == ModelKind::DepTree && b.trees.empty())
        throw Error("trees required: bundle " + bundle_path.string() + " has no dependency trees");
      const Vocab vocab = kind == ModelKind::DepTree ? vocab_of(ck) : Vocab{};
      auto model = make_model(kind, b, architecture_of(ck), &vocab);
      load_into(*model, ck);
      std::vector<TalkInput> inputs;
      for (auto i : split.test) inputs.push_back(talk_input(b, i, kind));
      parallel_for(inputs.size(), threads, [&](std::size_t k) {
        RatingVector p = model->predict(inputs[k]);
        for (Eigen::Index c = 0; c < p.size(); ++c) preds(static_cast<Eigen::Index>(k), c) = p[c] >= 0.5 ? 1.0 : 0.0;
      });
    } else {
      preds = predict_baseline(ck, kind, b, split.test);
    }
    const std::string label = ck.has_meta("label") ? ck.meta("label") : to_string(kind);
    tables.push_back(NamedTable{label, metrics(confusion(preds, labels))});
  }
  ensure_dir(out);
  write_file(out / "metrics.csv", report_csv(tables));
  write_file(out / "report.txt", report_text(tables));
  return in_report_order(tables);
}

std::vector<NamedTable> cmd_report(const std::vector<fs::path>& metrics_csvs, const fs::path& out) {
  if (metrics_csvs.empty()) throw Error("report needs at least one metrics CSV");
  std::vector<NamedTable> tables;
  for (const auto& path : metrics_csvs) {
    auto part = parse_report_csv(read_file(path));
    tables.insert(tables.end(), part.begin(), part.end());
  }
  ensure_dir(out);
  write_file(out / "metrics.csv", report_csv(tables));
  write_file(out / "report.txt", report_text(tables));
  return in_report_order(tables);
}

// ---------------------------------------------------------------------------

ad::GradCheckReport<double> toy_gradcheck(ModelKind kind, std::uint64_t seed) {
  if (!is_neural(kind)) throw Error("gradcheck applies to word-seq and dep-tree only");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  constexpr int kWordDim = 5;

  WordVectors words(kWordDim);
  std::vector<std::string> vocab;
  for (int i = 0; i < 10; ++i) {
    vocab.push_back("w" + std::to_string(i));
    Eigen::VectorXd v(kWordDim);
    for (auto& x : v) x = unif(rng);
    words.insert(vocab.back(), v);
  }
  const std::vector<Sentence> sentences = {{"w0", "w3", "w7"}, {"w2", "w5", "w9", "w1"}};

  // Chain-with-branch trees over the same tokens.
  const std::vector<std::string> pos = {"NOUN", "VERB", "ADJ"}, deps = {"nsubj", "obj", "root"};
  std::vector<DepTree> trees;
  for (const auto& s : sentences) {
    std::vector<DepNode> nodes;
    std::vector<int> heads;
    for (std::size_t i = 0; i < s.size(); ++i) {
      nodes.push_back(DepNode{s[i], pos[i % 3], i == 1 ? "root" : deps[i % 2], -1, {}});
      heads.push_back(i == 1 ? 0 : (i == 3 ? 3 : 2));
    }
    trees.push_back(make_dep_tree(std::move(nodes), heads));
  }
  Vocab tags{TagIndex({"ADJ", "NOUN", "VERB"}), TagIndex({"nsubj", "obj", "root"})};

  ArchitectureSpec arch{kWordDim, 4, 3, 3};
  CorpusBundle holder;  // only to satisfy make_model's signature
  holder.vectors = words;
  auto model = make_model(kind, holder, arch, &tags);
  for (Tensor* t : model->parameters())
    for (Eigen::Index i = 0; i < t->value.size(); ++i) t->value.data()[i] = unif(rng);

  TalkInput in;
  in.sentences = &sentences;
  for (const auto& t : trees) in.trees.push_back(&t);
  Eigen::VectorXd labels(kNumCategories);
  for (auto& y : labels) y = static_cast<double>(rng() & 1U);

  std::function<Var(Graph&)> build = [&](Graph& g) { return bce_loss(g, model->forward(g, in), labels); };
  auto params = model->parameters();
  return ad::gradcheck<double>(build, std::span<Tensor* const>(params), 1e-6, kGradcheckTolerance);
}

std::string gradcheck_summary(ModelKind kind, const ad::GradCheckReport<double>& r) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s %s: %s, max rel err %.3e (tolerance %.0e, %zu coordinates)\n",
                "gradcheck", to_string(kind).c_str(), r.passed ? "PASS" : "FAIL", r.max_rel_error,
                kGradcheckTolerance, r.coordinates);
  os << buf;
  for (const auto& w : r.per_tensor) {
    std::snprintf(buf, sizeof buf, "  %-32s worst rel err %.3e (analytic %.6e, numeric %.6e)\n",
                  w.tensor.c_str(), w.rel_error, w.analytic, w.numeric);
    os << buf;
  }
  return os.str();
}

}  // namespace talkgrade
