#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "talkgrade/autodiff.hpp"
#include "talkgrade/corpus.hpp"
#include "talkgrade/debias.hpp"

namespace talkgrade {

using Tensor = ad::Tensor<double>;
using Graph = ad::Graph<double>;
using Var = ad::Var<double>;

enum class ModelKind { WordSeq, DepTree, Svm, Lasso };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);
inline bool is_neural(ModelKind k) { return k == ModelKind::WordSeq || k == ModelKind::DepTree; }

// One gate: pre-activation = input_weight * x + recurrent_weight * h + bias.
struct GateParams {
  Tensor input_weight;      // hidden x input
  Tensor recurrent_weight;  // hidden x hidden
  Tensor bias;              // hidden x 1
};

/// Gate matrices of an LSTM cell plus the 14-way output layer. Shared by the
/// sequence model (input = word vector) and the tree model (input = word
/// vector ++ POS embedding ++ dependency embedding).
struct CellParams {
  int input_dim = 0;
  int hidden_dim = 0;
  GateParams input_gate, forget_gate, candidate, output_gate;
  Tensor output_weight;  // 14 x hidden
  Tensor output_bias;    // 14 x 1

  CellParams() = default;
  CellParams(int input_dim, int hidden_dim);

  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
  std::vector<const Tensor*> recurrent_weights() const;
};

/// Masks already scaled for inverted dropout (entries 0 or 1/(1-p)).
struct RecurrentMasks {
  Eigen::MatrixXd input_gate, forget_gate, candidate, output_gate;
};

struct ForwardOptions {
  const RecurrentMasks* recurrent = nullptr;  // weight-drop on the hidden-to-hidden matrices
  const Eigen::MatrixXd* pooled = nullptr;    // dropout mask on the pooled sentence vector
};

/// Gate tensors bound into one graph (with any weight-drop masks applied).
struct BoundCell {
  struct Gate {
    Var input_weight, recurrent_weight, bias;
  };
  Gate input_gate, forget_gate, candidate, output_gate;
  Var output_weight, output_bias;
  Var zero_hidden;
};

BoundCell bind_cell(Graph& g, const CellParams& p, const RecurrentMasks* masks = nullptr);

/// Runs the recurrence from zero cell and hidden state over `words` and
/// returns the last hidden state.
Var lstm_sentence(Graph& g, const BoundCell& cell, std::span<const Eigen::VectorXd* const> words);

struct TreeEmbeddings {
  Tensor pos;  // |pos tags| x pos_dim
  Tensor dep;  // |dep types| x dep_dim
};

/// Child-sum recursion from the leaves up; returns the root's hidden state.
/// Leaves see a single zero pseudo-child.
Var treelstm_sentence(Graph& g, const BoundCell& cell, Var pos_table,
                      Var dep_table, const Vocab& vocab, const DepTree& tree,
                      const WordVectors& words);

/// Mean-pools sentence vectors, applies the output layer and a sigmoid.
Var pool_and_classify(Graph& g, const BoundCell& cell, std::span<const Var> sentences,
                      const Eigen::MatrixXd* pooled_mask = nullptr);

struct TalkInput {
  const std::vector<Sentence>* sentences = nullptr;  // sequence model
  std::vector<const DepTree*> trees;                 // tree model, in sentence order
};

struct ArchitectureSpec {
  int word_dim = 300;
  int hidden_dim = 128;
  int pos_dim = 32;
  int dep_dim = 32;
};

class NeuralModel {
 public:
  virtual ~NeuralModel() = default;

  virtual ModelKind kind() const = 0;
  virtual std::vector<Tensor*> parameters() = 0;
  std::vector<const Tensor*> parameters() const;

  const CellParams& cell() const { return cell_; }
  CellParams& cell() { return cell_; }

  /// 14 x 1 rating probabilities as a graph node.
  virtual Var forward(Graph& g, const TalkInput& talk, const ForwardOptions& opts = {}) const = 0;

  /// Evaluation-mode prediction (no dropout).
  RatingVector predict(const TalkInput& talk) const;

 protected:
  NeuralModel(const WordVectors& words, CellParams cell) : words_(&words), cell_(std::move(cell)) {}

  const WordVectors* words_;
  CellParams cell_;
};

class WordSeqModel : public NeuralModel {
 public:
  WordSeqModel(const WordVectors& words, const ArchitectureSpec& arch);

  ModelKind kind() const override { return ModelKind::WordSeq; }
  using NeuralModel::parameters;
  std::vector<Tensor*> parameters() override { return cell_.tensors(); }
  Var forward(Graph& g, const TalkInput& talk, const ForwardOptions& opts = {}) const override;
};

class DepTreeModel : public NeuralModel {
 public:
  DepTreeModel(const WordVectors& words, Vocab vocab, const ArchitectureSpec& arch);

  ModelKind kind() const override { return ModelKind::DepTree; }
  using NeuralModel::parameters;
  std::vector<Tensor*> parameters() override;
  Var forward(Graph& g, const TalkInput& talk, const ForwardOptions& opts = {}) const override;

  const Vocab& vocab() const { return vocab_; }
  TreeEmbeddings& embeddings() { return emb_; }
  const TreeEmbeddings& embeddings() const { return emb_; }

 private:
  Vocab vocab_;
  TreeEmbeddings emb_;
};

/// Uniform(+-1/sqrt(fan_in)) weights, zero biases, Uniform(+-0.05) tag
/// embeddings. Deterministic per seed.
void init_params(NeuralModel& model, std::uint64_t seed);

}  // namespace talkgrade
