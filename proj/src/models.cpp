#include "talkgrade/models.hpp"

#include <cmath>
#include <random>

namespace talkgrade {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::WordSeq: return "word-seq";
    case ModelKind::DepTree: return "dep-tree";
    case ModelKind::Svm: return "svm";
    case ModelKind::Lasso: return "lasso";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "word-seq") return ModelKind::WordSeq;
  if (name == "dep-tree") return ModelKind::DepTree;
  if (name == "svm") return ModelKind::Svm;
  if (name == "lasso") return ModelKind::Lasso;
  throw Error("unknown model '" + name + "' (expected word-seq, dep-tree, svm or lasso)");
}

namespace {

GateParams make_gate(const std::string& name, int input_dim, int hidden_dim) {
  return GateParams{Tensor(name + ".input_weight", hidden_dim, input_dim),
                    Tensor(name + ".recurrent_weight", hidden_dim, hidden_dim),
                    Tensor(name + ".bias", hidden_dim, 1)};
}

}  // namespace

CellParams::CellParams(int in, int hidden)
    : input_dim(in),
      hidden_dim(hidden),
      input_gate(make_gate("input_gate", in, hidden)),
      forget_gate(make_gate("forget_gate", in, hidden)),
      candidate(make_gate("candidate", in, hidden)),
      output_gate(make_gate("output_gate", in, hidden)),
      output_weight("output.weight", static_cast<Eigen::Index>(kNumCategories), hidden),
      output_bias("output.bias", static_cast<Eigen::Index>(kNumCategories), 1) {
  if (in < 0 || hidden <= 0) throw Error("invalid cell dimensions");
}

std::vector<Tensor*> CellParams::tensors() {
  std::vector<Tensor*> out;
  for (GateParams* g : {&input_gate, &forget_gate, &candidate, &output_gate}) {
    out.push_back(&g->input_weight);
    out.push_back(&g->recurrent_weight);
    out.push_back(&g->bias);
  }
  out.push_back(&output_weight);
  out.push_back(&output_bias);
  return out;
}

std::vector<const Tensor*> CellParams::tensors() const {
  auto mut = const_cast<CellParams*>(this)->tensors();
  return {mut.begin(), mut.end()};
}

std::vector<const Tensor*> CellParams::recurrent_weights() const {
  return {&input_gate.recurrent_weight, &forget_gate.recurrent_weight, &candidate.recurrent_weight,
          &output_gate.recurrent_weight};
}

BoundCell bind_cell(Graph& g, const CellParams& p, const RecurrentMasks* masks) {
  auto gate = [&](const GateParams& gp, const Eigen::MatrixXd* mask) {
    Var rec = g.leaf(gp.recurrent_weight);
    if (mask) rec = ad::hadamard(rec, g.input(*mask));
    return BoundCell::Gate{g.leaf(gp.input_weight), rec, g.leaf(gp.bias)};
  };
  BoundCell b;
  b.input_gate = gate(p.input_gate, masks ? &masks->input_gate : nullptr);
  b.forget_gate = gate(p.forget_gate, masks ? &masks->forget_gate : nullptr);
  b.candidate = gate(p.candidate, masks ? &masks->candidate : nullptr);
  b.output_gate = gate(p.output_gate, masks ? &masks->output_gate : nullptr);
  b.output_weight = g.leaf(p.output_weight);
  b.output_bias = g.leaf(p.output_bias);
  b.zero_hidden = g.constant(Eigen::MatrixXd::Zero(p.hidden_dim, 1));
  return b;
}

namespace {

Var pre_activation(const BoundCell::Gate& gate, Var x, Var h) {
  using ad::matvec;
  return matvec(gate.input_weight, x) + matvec(gate.recurrent_weight, h) + gate.bias;
}

}  // namespace

Var lstm_sentence(Graph& g, const BoundCell& cell, std::span<const Eigen::VectorXd* const> words) {
  if (words.empty()) throw Error("lstm_sentence: empty sentence");
  using ad::hadamard;
  using ad::sigmoid;
  using ad::tanh;
  Var h = cell.zero_hidden;
  Var c = cell.zero_hidden;
  for (const Eigen::VectorXd* w : words) {
    Var x = g.constant(*w);
    Var i = sigmoid(pre_activation(cell.input_gate, x, h));
    Var f = sigmoid(pre_activation(cell.forget_gate, x, h));
    Var u = tanh(pre_activation(cell.candidate, x, h));
    Var o = sigmoid(pre_activation(cell.output_gate, x, h));
    c = hadamard(f, c) + hadamard(i, u);
    h = hadamard(o, tanh(c));
  }
  return h;
}

Var treelstm_sentence(Graph& g, const BoundCell& cell, Var pos_table,
                      Var dep_table, const Vocab& vocab, const DepTree& tree,
                      const WordVectors& words) {
  using ad::hadamard;
  using ad::matvec;
  using ad::sigmoid;
  using ad::tanh;
  if (tree.size() == 0) throw Error("treelstm_sentence: empty tree");

  std::vector<Var> h(tree.size()), c(tree.size());
  for (int t : tree.bottom_up_order()) {
    const DepNode& node = tree.nodes[static_cast<std::size_t>(t)];
    auto pos = vocab.pos_tags.find(node.pos_tag);
    auto dep = vocab.dep_types.find(node.dep_type);
    if (!pos) throw Error("unknown tag: POS '" + node.pos_tag + "'");
    if (!dep) throw Error("unknown tag: dependency type '" + node.dep_type + "'");

    Var x = g.concat({g.constant(words.lookup(node.token)),
                      g.row(pos_table, static_cast<Eigen::Index>(*pos)),
                      g.row(dep_table, static_cast<Eigen::Index>(*dep))});

    std::vector<Var> child_h, child_c;
    if (node.children.empty()) {
      child_h.push_back(cell.zero_hidden);
      child_c.push_back(cell.zero_hidden);
    } else {
      for (int k : node.children) {
        child_h.push_back(h[static_cast<std::size_t>(k)]);
        child_c.push_back(c[static_cast<std::size_t>(k)]);
      }
    }
    Var h_sum = g.sum(child_h);

    Var i = sigmoid(pre_activation(cell.input_gate, x, h_sum));
    Var u = tanh(pre_activation(cell.candidate, x, h_sum));
    Var o = sigmoid(pre_activation(cell.output_gate, x, h_sum));

    // One forget gate per child, each gating that child's memory cell.
    Var fx = matvec(cell.forget_gate.input_weight, x);
    std::vector<Var> kept;
    kept.reserve(child_c.size());
    for (std::size_t k = 0; k < child_c.size(); ++k) {
      Var f = sigmoid(fx + matvec(cell.forget_gate.recurrent_weight, child_h[k]) +
                      cell.forget_gate.bias);
      kept.push_back(hadamard(f, child_c[k]));
    }
    Var ct = g.sum(kept) + hadamard(i, u);
    c[static_cast<std::size_t>(t)] = ct;
    h[static_cast<std::size_t>(t)] = hadamard(o, tanh(ct));
  }
  return h[static_cast<std::size_t>(tree.root)];
}

Var pool_and_classify(Graph& g, const BoundCell& cell, std::span<const Var> sentences,
                      const Eigen::MatrixXd* pooled_mask) {
  if (sentences.empty()) throw Error("predict: talk has no sentences");
  Var pooled = g.mean(sentences);
  if (pooled_mask) pooled = ad::hadamard(pooled, g.input(*pooled_mask));
  return ad::sigmoid(ad::matvec(cell.output_weight, pooled) + cell.output_bias);
}

// ---------------------------------------------------------------------------

std::vector<const Tensor*> NeuralModel::parameters() const {
  auto mut = const_cast<NeuralModel*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

RatingVector NeuralModel::predict(const TalkInput& talk) const {
  Graph g;
  Var r = forward(g, talk);
  return g.value(r);
}

WordSeqModel::WordSeqModel(const WordVectors& words, const ArchitectureSpec& arch)
    : NeuralModel(words, CellParams(words.dim(), arch.hidden_dim)) {
  if (arch.word_dim != words.dim()) throw Error("word-vector dimension does not match architecture");
}

Var WordSeqModel::forward(Graph& g, const TalkInput& talk, const ForwardOptions& opts) const {
  if (!talk.sentences || talk.sentences->empty()) throw Error("predict: talk has no sentences");
  BoundCell cell = bind_cell(g, cell_, opts.recurrent);
  std::vector<Var> encoded;
  encoded.reserve(talk.sentences->size());
  std::vector<const Eigen::VectorXd*> vecs;
  for (const Sentence& s : *talk.sentences) {
    vecs.clear();
    for (const auto& tok : s) vecs.push_back(&words_->lookup(tok));
    encoded.push_back(lstm_sentence(g, cell, vecs));
  }
  return pool_and_classify(g, cell, encoded, opts.pooled);
}

DepTreeModel::DepTreeModel(const WordVectors& words, Vocab vocab, const ArchitectureSpec& arch)
    : NeuralModel(words, CellParams(words.dim() + arch.pos_dim + arch.dep_dim, arch.hidden_dim)),
      vocab_(std::move(vocab)),
      emb_{Tensor("pos_embedding", static_cast<Eigen::Index>(vocab_.pos_tags.size()), arch.pos_dim),
           Tensor("dep_embedding", static_cast<Eigen::Index>(vocab_.dep_types.size()), arch.dep_dim)} {
  if (arch.word_dim != words.dim()) throw Error("word-vector dimension does not match architecture");
  if (arch.pos_dim < 0 || arch.dep_dim < 0) throw Error("embedding widths must be non-negative");
}

std::vector<Tensor*> DepTreeModel::parameters() {
  auto out = cell_.tensors();
  out.push_back(&emb_.pos);
  out.push_back(&emb_.dep);
  return out;
}

Var DepTreeModel::forward(Graph& g, const TalkInput& talk, const ForwardOptions& opts) const {
  if (talk.trees.empty()) throw Error("predict: talk has no sentences");
  BoundCell cell = bind_cell(g, cell_, opts.recurrent);
  Var pos_table = g.leaf(emb_.pos);
  Var dep_table = g.leaf(emb_.dep);
  std::vector<Var> encoded;
  encoded.reserve(talk.trees.size());
  for (const DepTree* tree : talk.trees)
    encoded.push_back(treelstm_sentence(g, cell, pos_table, dep_table, vocab_, *tree, *words_));
  return pool_and_classify(g, cell, encoded, opts.pooled);
}

void init_params(NeuralModel& model, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto fill = [&](Tensor& t, double bound) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index k = 0; k < t.value.size(); ++k) t.value.data()[k] = dist(rng);
    t.zero_grad();
  };
  CellParams& p = model.cell();
  for (GateParams* gate : {&p.input_gate, &p.forget_gate, &p.candidate, &p.output_gate}) {
    fill(gate->input_weight, p.input_dim > 0 ? 1.0 / std::sqrt(double(p.input_dim)) : 0.0);
    fill(gate->recurrent_weight, 1.0 / std::sqrt(double(p.hidden_dim)));
    gate->bias.value.setZero();
    gate->bias.zero_grad();
  }
  fill(p.output_weight, 1.0 / std::sqrt(double(p.hidden_dim)));
  p.output_bias.value.setZero();
  p.output_bias.zero_grad();
  if (auto* tree = dynamic_cast<DepTreeModel*>(&model)) {
    fill(tree->embeddings().pos, 0.05);
    fill(tree->embeddings().dep, 0.05);
  }
}

}  // namespace talkgrade
