#include "talkgrade/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace talkgrade {

std::string to_string(OptimizerKind k) { return k == OptimizerKind::Adam ? "adam" : "adagrad"; }

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "adagrad") return OptimizerKind::Adagrad;
  if (name == "adam") return OptimizerKind::Adam;
  throw Error("unknown optimizer '" + name + "' (expected adagrad or adam)");
}

void TrainConfig::validate() const {
  auto prob = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(std::string(what) + " must be in [0, 1]");
  };
  if (!(learning_rate > 0)) throw Error("learning_rate must be positive");
  if (batch_size < 1) throw Error("batch_size must be at least 1");
  if (epochs < 0) throw Error("epochs must be non-negative");
  prob(weight_drop_p, "weight_drop_p");
  prob(fc_dropout_p, "fc_dropout_p");
  if (!(dev_fraction > 0 && dev_fraction < 1)) throw Error("dev_fraction must be in (0, 1)");
  if (test_n < 0) throw Error("test_n must be non-negative");
  if (hidden_dim < 1) throw Error("hidden_dim must be positive");
  if (pos_dim < 0 || dep_dim < 0) throw Error("embedding widths must be non-negative");
  if (weight_decay < 0) throw Error("weight_decay must be non-negative");
}

// ---------------------------------------------------------------------------

double bce_loss(const Eigen::VectorXd& probs, const Eigen::VectorXd& labels) {
  if (probs.size() != labels.size() || probs.size() == 0)
    throw Error("bce_loss: size mismatch");
  double sum = 0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    double r = probs[i], y = labels[i];
    if (!(r > 0.0 && r < 1.0)) throw Error("bce_loss: probability outside (0, 1)");
    sum += y * std::log(r) + (1.0 - y) * std::log(1.0 - r);
  }
  return -sum / static_cast<double>(probs.size());
}

Var bce_loss(Graph& g, Var probs, const Eigen::VectorXd& labels) {
  const auto& r = g.value(probs);
  if (r.cols() != 1 || r.rows() != labels.size()) throw Error("bce_loss: size mismatch");
  if (!((r.array() > 0.0) && (r.array() < 1.0)).all())
    throw Error("bce_loss: probability outside (0, 1)");
  const double n = static_cast<double>(labels.size());
  Var y = g.constant(labels);
  Var not_y = g.constant((1.0 - labels.array()).matrix());
  Var pos = ad::hadamard(y, ad::log(probs));
  Var neg = ad::hadamard(not_y, ad::log(ad::affine(probs, -1.0, 1.0)));
  return ad::affine(ad::sum_elements(pos + neg), -1.0 / n, 0.0);
}

// ---------------------------------------------------------------------------

namespace {

void check_shapes(std::span<Tensor* const> params, std::span<const Eigen::MatrixXd> grads) {
  if (params.size() != grads.size()) throw Error("optimizer: parameter/gradient count mismatch");
  for (std::size_t k = 0; k < params.size(); ++k)
    if (params[k]->rows() != grads[k].rows() || params[k]->cols() != grads[k].cols())
      throw Error("optimizer: shape mismatch for '" + params[k]->name + "'");
}

void size_like(std::vector<Eigen::MatrixXd>& acc, std::span<Tensor* const> params) {
  if (acc.empty()) {
    for (const Tensor* p : params) acc.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
  }
  if (acc.size() != params.size()) throw Error("optimizer: state does not match parameters");
}

}  // namespace

OptimizerState make_optimizer_state(OptimizerKind kind) {
  if (kind == OptimizerKind::Adam) return AdamState{};
  return AdagradState{};
}

void adagrad_step(AdagradState& state, std::span<Tensor* const> params,
                  std::span<const Eigen::MatrixXd> grads, double lr) {
  check_shapes(params, grads);
  size_like(state.sum_sq, params);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& acc = state.sum_sq[k];
    acc.array() += grads[k].array().square();
    params[k]->value.array() -= lr * grads[k].array() / (acc.array().sqrt() + state.eps);
  }
}

void adam_step(AdamState& state, std::span<Tensor* const> params,
               std::span<const Eigen::MatrixXd> grads, double lr) {
  check_shapes(params, grads);
  size_like(state.first, params);
  size_like(state.second, params);
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, double(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, double(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& m = state.first[k];
    auto& v = state.second[k];
    m = state.beta1 * m + (1.0 - state.beta1) * grads[k];
    v.array() = state.beta2 * v.array() + (1.0 - state.beta2) * grads[k].array().square();
    params[k]->value.array() -=
        lr * (m.array() / c1) / ((v.array() / c2).sqrt() + state.eps);
  }
}

void optimizer_step(OptimizerState& state, std::span<Tensor* const> params,
                    std::span<const Eigen::MatrixXd> grads, double lr) {
  std::visit(
      [&](auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, AdamState>)
          adam_step(s, params, grads, lr);
        else
          adagrad_step(s, params, grads, lr);
      },
      state);
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd DropoutSource::mask(Eigen::Index rows, Eigen::Index cols, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error("dropout probability must be in [0, 1]");
  if (p >= 1.0) throw Error("degenerate dropout");
  ++draws_;
  std::bernoulli_distribution keep(1.0 - p);
  const double scale = 1.0 / (1.0 - p);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = keep(rng_) ? scale : 0.0;
  return m;
}

std::vector<Eigen::MatrixXd> weight_drop(std::span<const Eigen::MatrixXd> matrices, double p,
                                         DropoutSource& source, bool training) {
  std::vector<Eigen::MatrixXd> out(matrices.begin(), matrices.end());
  if (!training || p == 0.0) return out;
  for (auto& m : out) m = m.cwiseProduct(source.mask(m.rows(), m.cols(), p));
  return out;
}

Eigen::VectorXd fc_dropout(const Eigen::VectorXd& v, double p, DropoutSource& source, bool training) {
  if (!training || p == 0.0) return v;
  return v.cwiseProduct(source.mask(v.size(), 1, p));
}

std::optional<RecurrentMasks> draw_recurrent_masks(const CellParams& cell, double p,
                                                   DropoutSource& source) {
  if (p == 0.0) return std::nullopt;
  const auto h = static_cast<Eigen::Index>(cell.hidden_dim);
  RecurrentMasks m;
  m.input_gate = source.mask(h, h, p);
  m.forget_gate = source.mask(h, h, p);
  m.candidate = source.mask(h, h, p);
  m.output_gate = source.mask(h, h, p);
  return m;
}

// ---------------------------------------------------------------------------

Split split_data(std::size_t n_items, std::size_t test_n, double dev_fraction, std::uint64_t seed) {
  if (n_items <= test_n)
    throw Error("insufficient talks: " + std::to_string(n_items) + " available, test set needs " +
                std::to_string(test_n) + " plus training data");
  if (!(dev_fraction > 0 && dev_fraction < 1)) throw Error("dev_fraction must be in (0, 1)");
  std::vector<std::size_t> perm(n_items);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  const std::size_t rest = n_items - test_n;
  const auto dev_n = static_cast<std::size_t>(std::floor(dev_fraction * static_cast<double>(rest)));
  Split s;
  s.test.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(test_n));
  s.dev.assign(perm.begin() + static_cast<std::ptrdiff_t>(test_n),
               perm.begin() + static_cast<std::ptrdiff_t>(test_n + dev_n));
  s.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(test_n + dev_n), perm.end());
  for (auto* part : {&s.train, &s.dev, &s.test}) std::sort(part->begin(), part->end());
  return s;
}

// ---------------------------------------------------------------------------

bool CheckpointPolicy::observe(double dev_loss) {
  if (best_for_patience_ - dev_loss > min_delta_) {
    best_for_patience_ = dev_loss;
    stale_ = 0;
  } else {
    ++stale_;
  }
  if (dev_loss < best_) {
    best_ = dev_loss;
    return true;
  }
  return false;
}

std::string curves_csv(const std::vector<EpochRecord>& curve) {
  std::ostringstream os;
  os << "epoch,train_loss,dev_loss,saved\n";
  char buf[128];
  for (const auto& r : curve) {
    std::snprintf(buf, sizeof buf, "%d,%.9f,%.9f,%d\n", r.epoch, r.train_loss, r.dev_loss,
                  r.saved ? 1 : 0);
    os << buf;
  }
  return os.str();
}

int default_threads() {
  if (const char* env = std::getenv("TALKGRADE_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double mean_loss(const NeuralModel& model, std::span<const Example> data, int threads) {
  if (data.empty()) throw Error("mean_loss: empty data set");
  std::vector<double> losses(data.size());
  parallel_for(data.size(), threads, [&](std::size_t i) {
    Graph g;
    Var r = model.forward(g, data[i].input);
    const Eigen::VectorXd probs = g.value(r);
    losses[i] = probs.allFinite() ? bce_loss(probs, data[i].labels) : std::numeric_limits<double>::quiet_NaN();
  });
  double total = 0;
  for (double l : losses) total += l;  // fixed order
  return total / static_cast<double>(data.size());
}

TrainResult train(NeuralModel& model, const TrainConfig& config, std::span<const Example> train_set,
                  std::span<const Example> dev_set, const TrainHooks& hooks) {
  config.validate();
  TrainResult result;
  if (config.epochs == 0) return result;
  if (train_set.empty()) throw Error("train: empty training set");
  if (dev_set.empty()) throw Error("train: empty development set");

  const int threads = config.threads > 0 ? config.threads : default_threads();
  std::vector<Tensor*> params = model.parameters();
  std::unordered_map<const Tensor*, std::size_t> slot;
  for (std::size_t k = 0; k < params.size(); ++k) slot.emplace(params[k], k);

  auto snapshot = [&] {
    std::vector<Eigen::MatrixXd> s;
    for (const Tensor* p : params) s.push_back(p->value);
    return s;
  };
  auto restore = [&](const std::vector<Eigen::MatrixXd>& s) {
    for (std::size_t k = 0; k < params.size(); ++k) params[k]->value = s[k];
  };
  std::vector<Eigen::MatrixXd> best = snapshot();
  std::size_t total_coeffs = 0;
  for (const Tensor* p : params) total_coeffs += static_cast<std::size_t>(p->size());

  OptimizerState opt = make_optimizer_state(config.optimizer);
  DropoutSource dropout(config.seed * 0x9E3779B97F4A7C15ULL + 1);
  std::mt19937_64 order_rng(config.seed);
  CheckpointPolicy policy(config.patience, config.min_delta);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(config.batch_size);
  const auto hidden = static_cast<Eigen::Index>(model.cell().hidden_dim);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    double epoch_loss = 0;

    for (std::size_t start = 0, b = 1; start < order.size(); start += batch, ++b) {
      const std::size_t count = std::min(batch, order.size() - start);
      auto masks = draw_recurrent_masks(model.cell(), config.weight_drop_p, dropout);
      std::vector<Eigen::MatrixXd> fc_masks;
      if (config.fc_dropout_p > 0)
        for (std::size_t k = 0; k < count; ++k)
          fc_masks.push_back(dropout.mask(hidden, 1, config.fc_dropout_p));

      std::vector<double> losses(count);
      std::vector<std::vector<Eigen::MatrixXd>> local(count);
      parallel_for(count, threads, [&](std::size_t k) {
        const Example& ex = train_set[order[start + k]];
        ForwardOptions fo{masks ? &*masks : nullptr, fc_masks.empty() ? nullptr : &fc_masks[k]};
        Graph g;
        Var probs = model.forward(g, ex.input, fo);
        if (!g.value(probs).allFinite()) {
          losses[k] = std::numeric_limits<double>::quiet_NaN();
          return;
        }
        Var loss = bce_loss(g, probs, ex.labels);
        losses[k] = g.value(loss)(0, 0);
        auto& grads = local[k];
        for (const Tensor* p : params) grads.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
        g.backward(loss, [&](const Tensor& t, const Eigen::MatrixXd& d) { grads[slot.at(&t)] += d; });
      });

      std::vector<Eigen::MatrixXd> grads;
      for (const Tensor* p : params) grads.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
      double batch_loss = 0;
      for (std::size_t k = 0; k < count; ++k) {
        batch_loss += losses[k];
        if (std::isfinite(losses[k]))
          for (std::size_t j = 0; j < params.size(); ++j) grads[j] += local[k][j];
      }
      if (!std::isfinite(batch_loss))
        throw Error("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                    std::to_string(b));
      for (auto& gk : grads) gk /= static_cast<double>(count);
      if (config.weight_decay > 0)
        for (std::size_t j = 0; j < params.size(); ++j)
          grads[j] += (2.0 * config.weight_decay / static_cast<double>(total_coeffs)) * params[j]->value;
      optimizer_step(opt, params, grads, config.learning_rate);
      epoch_loss += batch_loss;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(train_set.size());
    const auto draws_before = dropout.draws();
    rec.dev_loss = mean_loss(model, dev_set, threads);
    result.dev_mask_draws += dropout.draws() - draws_before;
    if (hooks.dev_loss_override) rec.dev_loss = hooks.dev_loss_override(epoch, rec.dev_loss);
    if (!std::isfinite(rec.dev_loss))
      throw Error("non-finite development loss at epoch " + std::to_string(epoch));

    rec.saved = policy.observe(rec.dev_loss);
    if (rec.saved) {
      best = snapshot();
      result.best_epoch = epoch;
      result.best_dev_loss = rec.dev_loss;
      if (hooks.on_checkpoint) hooks.on_checkpoint(epoch, model);
    }
    result.curve.push_back(rec);
    if (hooks.on_epoch) hooks.on_epoch(rec);
    if (policy.saturated()) {
      result.stopped_early = epoch < config.epochs;
      break;
    }
  }
  restore(best);
  return result;
}

}  // namespace talkgrade
