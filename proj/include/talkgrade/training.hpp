#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "talkgrade/models.hpp"

namespace talkgrade {

enum class OptimizerKind { Adagrad, Adam };

std::string to_string(OptimizerKind k);
OptimizerKind parse_optimizer(const std::string& name);

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::Adagrad;
  double learning_rate = 0.01;
  int batch_size = 10;
  int epochs = 50;
  double weight_drop_p = 0.2;
  double fc_dropout_p = 0.2;
  std::uint64_t seed = 1;
  double dev_fraction = 0.1;
  int test_n = 150;

  // Architecture.
  int hidden_dim = 128;
  int pos_dim = 32;
  int dep_dim = 32;

  // Off unless set: adds weight_decay * mean(w^2) over all parameters.
  double weight_decay = 0.0;

  // Stop once the dev loss has not improved by more than min_delta for
  // `patience` consecutive epochs.
  int patience = 10;
  double min_delta = 1e-4;

  // Baselines: C <= 0 selects C by dev-set accuracy over a fixed grid.
  double svm_c = 0.0;
  double lasso_c = 0.0;

  int threads = 0;  // 0: TALKGRADE_THREADS or hardware concurrency

  void validate() const;
};

// ---------------------------------------------------------------------------
// Loss.

/// Mean over categories of the binary cross-entropy. Throws if any
/// probability is not strictly inside (0, 1).
double bce_loss(const Eigen::VectorXd& probs, const Eigen::VectorXd& labels);
Var bce_loss(Graph& g, Var probs, const Eigen::VectorXd& labels);

// ---------------------------------------------------------------------------
// Optimizers. State is sized lazily on the first step.

struct AdagradState {
  std::vector<Eigen::MatrixXd> sum_sq;
  double eps = 1e-10;
};

struct AdamState {
  std::vector<Eigen::MatrixXd> first, second;
  long step = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

using OptimizerState = std::variant<AdagradState, AdamState>;

OptimizerState make_optimizer_state(OptimizerKind kind);

void adagrad_step(AdagradState& state, std::span<Tensor* const> params,
                  std::span<const Eigen::MatrixXd> grads, double lr);
void adam_step(AdamState& state, std::span<Tensor* const> params,
               std::span<const Eigen::MatrixXd> grads, double lr);
void optimizer_step(OptimizerState& state, std::span<Tensor* const> params,
                    std::span<const Eigen::MatrixXd> grads, double lr);

// ---------------------------------------------------------------------------
// Dropout.

/// Seeded Bernoulli mask source that counts how many masks it has drawn.
class DropoutSource {
 public:
  explicit DropoutSource(std::uint64_t seed) : rng_(seed) {}

  /// Entries are 0 with probability p, otherwise 1/(1-p). Throws
  /// "degenerate dropout" for p == 1.
  Eigen::MatrixXd mask(Eigen::Index rows, Eigen::Index cols, double p);

  std::uint64_t draws() const { return draws_; }
  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
  std::uint64_t draws_ = 0;
};

/// Masked copies of the recurrent matrices; identity when !training or p == 0.
std::vector<Eigen::MatrixXd> weight_drop(std::span<const Eigen::MatrixXd> matrices, double p,
                                         DropoutSource& source, bool training);
Eigen::VectorXd fc_dropout(const Eigen::VectorXd& v, double p, DropoutSource& source, bool training);

/// One mask per recurrent matrix of `cell`; nullopt when p == 0.
std::optional<RecurrentMasks> draw_recurrent_masks(const CellParams& cell, double p,
                                                   DropoutSource& source);

// ---------------------------------------------------------------------------
// Data split.

struct Split {
  std::vector<std::size_t> train, dev, test;  // each sorted ascending
};

/// Draws `test_n` items for test, then floor(dev_fraction * rest) for dev;
/// the remainder trains.
Split split_data(std::size_t n_items, std::size_t test_n, double dev_fraction, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Training loop.

struct Example {
  TalkInput input;
  Eigen::VectorXd labels;  // 14 entries in {0, 1}
};

/// Strict-improvement checkpointing plus saturation detection.
class CheckpointPolicy {
 public:
  CheckpointPolicy(int patience, double min_delta) : patience_(patience), min_delta_(min_delta) {}

  /// Returns true when `dev_loss` is lower than every earlier value.
  bool observe(double dev_loss);
  bool saturated() const { return patience_ > 0 && stale_ >= patience_; }
  double best() const { return best_; }

 private:
  int patience_;
  double min_delta_;
  double best_ = std::numeric_limits<double>::infinity();
  double best_for_patience_ = std::numeric_limits<double>::infinity();
  int stale_ = 0;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0;
  double dev_loss = 0;
  bool saved = false;
};

std::string curves_csv(const std::vector<EpochRecord>& curve);

struct TrainHooks {
  /// Called with the model holding the newly best parameters.
  std::function<void(int epoch, const NeuralModel&)> on_checkpoint;
  /// Replaces the computed dev loss (used to script the checkpoint rule).
  std::function<double(int epoch, double computed)> dev_loss_override;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
  std::vector<EpochRecord> curve;
  int best_epoch = 0;  // 0: never improved (or no epochs)
  double best_dev_loss = std::numeric_limits<double>::infinity();
  bool stopped_early = false;
  std::uint64_t dev_mask_draws = 0;  // masks drawn during dev passes; must stay 0
};

/// Mean BCE of the model over `data` in evaluation mode.
double mean_loss(const NeuralModel& model, std::span<const Example> data, int threads = 1);

/// Mini-batch training with dev-loss checkpointing. On return `model` holds
/// the best parameters seen (or its initial ones if no epoch improved).
TrainResult train(NeuralModel& model, const TrainConfig& config, std::span<const Example> train_set,
                  std::span<const Example> dev_set, const TrainHooks& hooks = {});

/// Worker count from TALKGRADE_THREADS or hardware concurrency.
int default_threads();

/// Runs fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace talkgrade
