#pragma once

// Builders shared by the unit tests and the acceptance binary.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "talkgrade/models.hpp"
#include "talkgrade/training.hpp"

namespace fixtures {

using namespace talkgrade;

inline void randomize(Tensor& t, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (Eigen::Index i = 0; i < t.value.size(); ++i) t.value.data()[i] = u(rng);
}

inline CellParams random_cell(int input_dim, int hidden_dim, std::mt19937_64& rng, double scale = 0.8) {
  CellParams p(input_dim, hidden_dim);
  for (Tensor* t : p.tensors()) randomize(*t, rng, scale);
  return p;
}

inline WordVectors random_words(int n, int dim, std::mt19937_64& rng, const std::string& prefix = "w") {
  WordVectors wv(dim);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd v(dim);
    for (auto& x : v) x = u(rng);
    wv.insert(prefix + std::to_string(i), v);
  }
  return wv;
}

/// Left-to-right chain: the last token is the root and each token's only
/// child is the token before it.
inline DepTree chain_tree(const std::vector<std::string>& tokens, const std::string& pos = "X",
                          const std::string& dep = "dep") {
  std::vector<DepNode> nodes;
  std::vector<int> heads;
  const int n = static_cast<int>(tokens.size());
  for (int i = 0; i < n; ++i) {
    nodes.push_back(DepNode{tokens[static_cast<std::size_t>(i)], pos, dep, -1, {}});
    heads.push_back(i + 1 == n ? 0 : i + 2);
  }
  return make_dep_tree(std::move(nodes), heads);
}

inline Vocab single_tag_vocab(const std::string& pos = "X", const std::string& dep = "dep") {
  return Vocab{TagIndex({pos}), TagIndex({dep})};
}

struct ChainPair {
  Eigen::VectorXd lstm, tree;
};

/// Final hidden state of the sequence LSTM and of the child-sum TreeLSTM on
/// a chain over the same words, with zero-width tag embeddings.
inline ChainPair chain_pair(std::uint64_t seed, int length, int word_dim = 6, int hidden = 5) {
  std::mt19937_64 rng(seed);
  WordVectors words = random_words(length, word_dim, rng);
  CellParams cell = random_cell(word_dim, hidden, rng);
  std::vector<std::string> tokens;
  std::vector<const Eigen::VectorXd*> vecs;
  for (int i = 0; i < length; ++i) tokens.push_back("w" + std::to_string(i));
  for (const auto& t : tokens) vecs.push_back(&words.lookup(t));

  ChainPair out;
  {
    Graph g;
    BoundCell bound = bind_cell(g, cell);
    out.lstm = g.value(lstm_sentence(g, bound, vecs));
  }
  {
    Graph g;
    BoundCell bound = bind_cell(g, cell);
    Tensor pos("pos", 1, 0), dep("dep", 1, 0);
    DepTree tree = chain_tree(tokens);
    out.tree = g.value(treelstm_sentence(g, bound, g.leaf(pos), g.leaf(dep), single_tag_vocab(), tree, words));
  }
  return out;
}

/// Small labelled corpus for the sequence model: `n` talks of 2-3 short
/// sentences over a 12-word vocabulary, with random 14-way labels.
struct SyntheticSet {
  WordVectors words{8};
  std::vector<std::vector<Sentence>> talks;
  std::vector<Eigen::VectorXd> labels;

  SyntheticSet(std::size_t n, std::uint64_t seed, int dim = 8) {
    std::mt19937_64 rng(seed);
    words = random_words(12, dim, rng);
    for (std::size_t t = 0; t < n; ++t) {
      std::vector<Sentence> sents(2 + rng() % 2);
      for (auto& s : sents) {
        const auto len = 3 + rng() % 4;
        for (std::size_t i = 0; i < len; ++i) s.push_back("w" + std::to_string(rng() % 12));
      }
      talks.push_back(std::move(sents));
      Eigen::VectorXd y(kNumCategories);
      for (auto& v : y) v = static_cast<double>(rng() & 1U);
      labels.push_back(y);
    }
  }

  std::vector<Example> examples(std::size_t begin, std::size_t end) const {
    std::vector<Example> out;
    for (std::size_t i = begin; i < end; ++i) {
      TalkInput in;
      in.sentences = &talks[i];
      out.push_back(Example{in, labels[i]});
    }
    return out;
  }
};

/// Talks whose counts are f_c * views * (1 +- 5%) with log-normal views, so
/// raw counts track views and shares do not.
inline std::vector<Talk> synthetic_talks(std::size_t n, std::uint64_t seed, bool constant_views = false) {
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> views(10.0, 1.0);
  std::uniform_real_distribution<double> jitter(0.95, 1.05);
  std::array<double, kNumCategories> f{};
  for (std::size_t c = 0; c < kNumCategories; ++c) f[c] = 0.002 * (1.0 + static_cast<double>(c % 5));
  std::vector<Talk> talks(n);
  for (auto& t : talks) {
    t.total_views = constant_views ? 10000 : static_cast<std::int64_t>(views(rng));
    t.age_days = static_cast<std::int64_t>(200 + rng() % 3000);
    for (std::size_t c = 0; c < kNumCategories; ++c)
      t.rating_counts[c] = std::llround(f[c] * static_cast<double>(t.total_views) * jitter(rng));
  }
  return talks;
}

struct LinearProblem {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;  // +-1
};

/// `n` points in [-1, 1]^d labelled by a fixed hyperplane, with points
/// closer than `gap` to it rejected so the set is separable with margin.
inline LinearProblem separable_problem(std::uint64_t seed, int n = 20, int d = 2, double gap = 0.15) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::VectorXd normal(d);
  for (auto& v : normal) v = u(rng);
  normal.normalize();
  const double offset = 0.3 * u(rng);
  LinearProblem p{Eigen::MatrixXd(n, d), Eigen::VectorXd(n)};
  int filled = 0, pos = 0;
  while (filled < n) {
    Eigen::VectorXd x(d);
    for (auto& v : x) v = u(rng);
    const double side = normal.dot(x) - offset;
    if (std::abs(side) < gap) continue;
    const double label = side > 0 ? 1.0 : -1.0;
    // keep both classes represented
    if (filled == n - 1 && pos == 0 && label < 0) continue;
    if (filled == n - 1 && pos == filled && label > 0) continue;
    p.X.row(filled) = x.transpose();
    p.y[filled] = label;
    pos += label > 0;
    ++filled;
  }
  return p;
}

/// Coarse-to-fine grid search for the minimum of a convex function of
/// (w_1 .. w_d, b): 41 points per axis, each round shrinking the box 4x
/// around the best point found.
inline double grid_minimum(const std::function<double(const Eigen::VectorXd&)>& f, int dims,
                           double half_width = 40.0, int rounds = 12) {
  constexpr int kPoints = 41;
  Eigen::VectorXd center = Eigen::VectorXd::Zero(dims);
  double best = f(center);
  Eigen::VectorXd best_at = center;
  std::vector<int> idx(static_cast<std::size_t>(dims));
  for (int r = 0; r < rounds; ++r) {
    const double step = 2.0 * half_width / (kPoints - 1);
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      Eigen::VectorXd at(dims);
      for (int k = 0; k < dims; ++k) at[k] = center[k] - half_width + step * idx[static_cast<std::size_t>(k)];
      const double v = f(at);
      if (v < best) {
        best = v;
        best_at = at;
      }
      int k = 0;
      while (k < dims && ++idx[static_cast<std::size_t>(k)] == kPoints) idx[static_cast<std::size_t>(k++)] = 0;
      if (k == dims) break;
    }
    center = best_at;
    half_width /= 4.0;
  }
  return best;
}

}  // namespace fixtures
