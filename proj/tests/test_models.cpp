#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "talkgrade/error.hpp"
#include "talkgrade/pipeline.hpp"

using namespace talkgrade;

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::VectorXd run_lstm(const CellParams& cell, const std::vector<Eigen::VectorXd>& words) {
  Graph g;
  BoundCell b = bind_cell(g, cell);
  std::vector<const Eigen::VectorXd*> ptrs;
  for (const auto& w : words) ptrs.push_back(&w);
  return g.value(lstm_sentence(g, b, ptrs));
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("lstm_sentence with zero parameters returns zero") {
  CellParams cell(3, 4);
  std::vector<Eigen::VectorXd> words = {Eigen::Vector3d(1, -2, 3), Eigen::Vector3d(0.5, 0.5, 0.5)};
  CHECK(run_lstm(cell, words).isZero(0.0));
  Graph g;
  BoundCell b = bind_cell(g, cell);
  CHECK_THROWS_AS(lstm_sentence(g, b, {}), Error);
}

TEST_CASE("lstm_sentence matches a hand trace in one dimension") {
  CellParams cell(1, 1);
  // (U, V, b) per gate
  const double Ui = 0.5, Vi = -0.3, bi = 0.1;
  const double Uf = -0.4, Vf = 0.8, bf = 0.2;
  const double Uu = 1.1, Vu = 0.6, bu = -0.05;
  const double Uo = 0.7, Vo = -0.9, bo = 0.3;
  auto set = [](GateParams& gp, double U, double V, double b) {
    gp.input_weight.value(0, 0) = U;
    gp.recurrent_weight.value(0, 0) = V;
    gp.bias.value(0, 0) = b;
  };
  set(cell.input_gate, Ui, Vi, bi);
  set(cell.forget_gate, Uf, Vf, bf);
  set(cell.candidate, Uu, Vu, bu);
  set(cell.output_gate, Uo, Vo, bo);

  double h = 0, c = 0;
  for (double x : {0.9, -1.3}) {
    double i = sig(Ui * x + Vi * h + bi);
    double f = sig(Uf * x + Vf * h + bf);
    double u = std::tanh(Uu * x + Vu * h + bu);
    double o = sig(Uo * x + Vo * h + bo);
    c = i * u + f * c;
    h = o * std::tanh(c);
  }
  Eigen::VectorXd a(1), b(1);
  a << 0.9;
  b << -1.3;
  CHECK(run_lstm(cell, {a, b})(0) == doctest::Approx(h).epsilon(1e-14));
}

TEST_CASE("lstm_sentence depends on word order") {
  std::mt19937_64 rng(12);
  CellParams cell = fixtures::random_cell(4, 3, rng);
  Eigen::Vector4d a(1, 0, -1, 0.5), b(-0.2, 0.9, 0.3, -1);
  CHECK(!run_lstm(cell, {a, b}).isApprox(run_lstm(cell, {b, a}), 1e-6));
}

TEST_CASE("treelstm_sentence") {
  std::mt19937_64 rng(3);
  WordVectors words = fixtures::random_words(4, 3, rng);
  Vocab vocab = fixtures::single_tag_vocab();

  SUBCASE("zero parameters give zero") {
    CellParams cell(3 + 2 + 2, 4);
    Tensor pos("pos", 1, 2), dep("dep", 1, 2);
    Graph g;
    BoundCell b = bind_cell(g, cell);
    DepTree tree = fixtures::chain_tree({"w0", "w1", "w2"});
    CHECK(g.value(treelstm_sentence(g, b, g.leaf(pos), g.leaf(dep), vocab, tree, words)).isZero(0.0));
  }
  SUBCASE("single node is one LSTM step") {
    CellParams cell = fixtures::random_cell(3, 4, rng);
    Tensor pos("pos", 1, 0), dep("dep", 1, 0);
    Graph g;
    BoundCell b = bind_cell(g, cell);
    DepTree tree = fixtures::chain_tree({"w2"});
    Eigen::VectorXd tree_h = g.value(treelstm_sentence(g, b, g.leaf(pos), g.leaf(dep), vocab, tree, words));
    CHECK(tree_h == run_lstm(cell, {words.lookup("w2")}));
  }
  SUBCASE("branching tree sums children") {
    // root w0 with two leaf children; compare against a scalar-free manual
    // composition of the same gates.
    CellParams cell = fixtures::random_cell(3, 2, rng);
    Tensor pos("pos", 1, 0), dep("dep", 1, 0);
    DepTree tree = make_dep_tree({DepNode{"w0", "X", "dep", -1, {}}, DepNode{"w1", "X", "dep", -1, {}},
                                  DepNode{"w2", "X", "dep", -1, {}}},
                                 {0, 1, 1});
    Graph g;
    BoundCell b = bind_cell(g, cell);
    Eigen::VectorXd got = g.value(treelstm_sentence(g, b, g.leaf(pos), g.leaf(dep), vocab, tree, words));

    auto gate = [&](const GateParams& p, const Eigen::VectorXd& x, const Eigen::VectorXd& h) {
      return Eigen::VectorXd(p.input_weight.value * x + p.recurrent_weight.value * h + p.bias.value);
    };
    auto sigm = [](Eigen::VectorXd v) { return Eigen::VectorXd(1.0 / (1.0 + (-v.array()).exp())); };
    auto th = [](Eigen::VectorXd v) { return Eigen::VectorXd(v.array().tanh()); };
    auto leaf = [&](const Eigen::VectorXd& x, Eigen::VectorXd& h, Eigen::VectorXd& c) {
      Eigen::VectorXd z = Eigen::VectorXd::Zero(2);
      c = (sigm(gate(cell.input_gate, x, z)).array() * th(gate(cell.candidate, x, z)).array()).matrix();
      h = (sigm(gate(cell.output_gate, x, z)).array() * c.array().tanh()).matrix();
    };
    Eigen::VectorXd h1, c1, h2, c2;
    leaf(words.lookup("w1"), h1, c1);
    leaf(words.lookup("w2"), h2, c2);
    const Eigen::VectorXd& x = words.lookup("w0");
    Eigen::VectorXd hs = h1 + h2;
    Eigen::VectorXd f1 = sigm(gate(cell.forget_gate, x, h1)), f2 = sigm(gate(cell.forget_gate, x, h2));
    Eigen::VectorXd c = (f1.array() * c1.array() + f2.array() * c2.array() +
                         sigm(gate(cell.input_gate, x, hs)).array() * th(gate(cell.candidate, x, hs)).array())
                            .matrix();
    Eigen::VectorXd h = (sigm(gate(cell.output_gate, x, hs)).array() * c.array().tanh()).matrix();
    CHECK(got.isApprox(h, 1e-13));
  }
  SUBCASE("unseen tag is an error") {
    CellParams cell(3, 2);
    Tensor pos("pos", 1, 0), dep("dep", 1, 0);
    Graph g;
    BoundCell b = bind_cell(g, cell);
    DepTree tree = fixtures::chain_tree({"w0"}, "NOUN");
    CHECK_THROWS_WITH_AS(treelstm_sentence(g, b, g.leaf(pos), g.leaf(dep), vocab, tree, words),
                         doctest::Contains("unknown tag"), Error);
  }
}

TEST_CASE("chain equivalence over seeds and lengths") {
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed)
    for (int len = 1; len <= 10; ++len) {
      auto pair = fixtures::chain_pair(seed, len);
      worst = std::max(worst, (pair.lstm - pair.tree).cwiseAbs().maxCoeff());
    }
  CHECK(worst <= 1e-12);
}

namespace {

struct ToyTalk {
  WordVectors words{5};
  std::vector<Sentence> sentences = {{"w0", "w1", "w2"}, {"w3", "w4"}, {"w1", "w5", "w0", "w2"}};
  std::vector<DepTree> trees;
  Vocab vocab{TagIndex({"N", "V"}), TagIndex({"dep", "root"})};

  explicit ToyTalk(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    words = fixtures::random_words(6, 5, rng);
    for (const auto& s : sentences) {
      std::vector<DepNode> nodes;
      std::vector<int> heads;
      for (std::size_t i = 0; i < s.size(); ++i) {
        nodes.push_back(DepNode{s[i], i % 2 ? "V" : "N", i == 0 ? "root" : "dep", -1, {}});
        heads.push_back(i == 0 ? 0 : static_cast<int>(i));
      }
      trees.push_back(make_dep_tree(std::move(nodes), heads));
    }
  }

  TalkInput input(const std::vector<std::size_t>& order) const {
    static thread_local std::vector<Sentence> storage;
    TalkInput in;
    storage.clear();
    for (auto i : order) {
      storage.push_back(sentences[i]);
      in.trees.push_back(&trees[i]);
    }
    in.sentences = &storage;
    return in;
  }
};

}  // namespace

TEST_CASE("predict") {
  ToyTalk toy(5);
  ArchitectureSpec arch{5, 4, 3, 2};
  WordSeqModel seq(toy.words, arch);
  DepTreeModel tree(toy.words, toy.vocab, arch);

  SUBCASE("zero parameters give one half everywhere") {
    CHECK((seq.predict(toy.input({0, 1, 2})).array() == 0.5).all());
    CHECK((tree.predict(toy.input({0, 1, 2})).array() == 0.5).all());
  }

  init_params(seq, 7);
  init_params(tree, 7);
  std::mt19937_64 rng(1);
  for (Tensor* t : seq.parameters()) fixtures::randomize(*t, rng, 0.7);
  for (Tensor* t : tree.parameters()) fixtures::randomize(*t, rng, 0.7);

  for (NeuralModel* m : std::initializer_list<NeuralModel*>{&seq, &tree}) {
    CAPTURE(to_string(m->kind()));
    RatingVector base = m->predict(toy.input({0, 1, 2}));
    SUBCASE("permutation invariance is exact") {
      CHECK((m->predict(toy.input({2, 0, 1})).array() == base.array()).all());
      CHECK((m->predict(toy.input({1, 2, 0})).array() == base.array()).all());
    }
    SUBCASE("duplicating every sentence leaves the output unchanged") {
      CHECK(m->predict(toy.input({0, 1, 2, 0, 1, 2})).isApprox(base, 1e-15));
      CHECK(m->predict(toy.input({0, 0, 1, 1, 2, 2})).isApprox(base, 1e-15));
    }
    SUBCASE("outputs lie strictly inside (0, 1)") {
      CHECK((base.array() > 0).all());
      CHECK((base.array() < 1).all());
    }
    SUBCASE("no sentences is an error") {
      TalkInput empty;
      std::vector<Sentence> none;
      empty.sentences = &none;
      CHECK_THROWS_AS(m->predict(empty), Error);
    }
  }
}

TEST_CASE("output range over many random parameter draws") {
  ToyTalk toy(9);
  ArchitectureSpec arch{5, 6, 2, 2};
  WordSeqModel seq(toy.words, arch);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    for (Tensor* t : seq.parameters()) fixtures::randomize(*t, rng, 3.0);
    RatingVector p = seq.predict(toy.input({0, 1, 2}));
    CHECK((p.array() > 0).all());
    CHECK((p.array() < 1).all());
  }
}

TEST_CASE("init_params") {
  WordVectors words(300);
  ArchitectureSpec arch;
  WordSeqModel a(words, arch), b(words, arch), c(words, arch);
  init_params(a, 11);
  init_params(b, 11);
  init_params(c, 12);
  auto pa = a.parameters(), pb = b.parameters(), pc = c.parameters();
  bool any_diff = false;
  for (std::size_t k = 0; k < pa.size(); ++k) {
    CHECK((pa[k]->value.array() == pb[k]->value.array()).all());
    any_diff = any_diff || (pa[k]->value.array() != pc[k]->value.array()).any();
  }
  CHECK(any_diff);

  const CellParams& cell = a.cell();
  CHECK(cell.input_gate.input_weight.rows() == 128);
  CHECK(cell.input_gate.input_weight.cols() == 300);
  CHECK(cell.forget_gate.recurrent_weight.rows() == 128);
  CHECK(cell.forget_gate.recurrent_weight.cols() == 128);
  CHECK(cell.output_weight.rows() == 14);
  CHECK(cell.output_weight.cols() == 128);
  CHECK(cell.output_bias.rows() == 14);
  for (const GateParams* gp : {&cell.input_gate, &cell.forget_gate, &cell.candidate, &cell.output_gate}) {
    CHECK(gp->input_weight.value.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(300.0));
    CHECK(gp->recurrent_weight.value.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(128.0));
    CHECK(gp->bias.value.isZero(0.0));
  }

  DepTreeModel t(words, Vocab{TagIndex({"A", "B"}), TagIndex({"x"})}, arch);
  init_params(t, 3);
  CHECK(t.cell().input_gate.input_weight.cols() == 300 + 32 + 32);
  CHECK(t.embeddings().pos.value.cwiseAbs().maxCoeff() <= 0.05);
  CHECK(t.embeddings().dep.value.cwiseAbs().maxCoeff() <= 0.05);
  CHECK(t.embeddings().pos.rows() == 2);
}

TEST_CASE("full-model gradcheck at toy size") {
  for (ModelKind kind : {ModelKind::WordSeq, ModelKind::DepTree}) {
    CAPTURE(to_string(kind));
    auto rep = toy_gradcheck(kind, 1);
    CHECK(rep.passed);
    CHECK(rep.max_rel_error < 1e-5);
    CHECK(rep.per_tensor.size() == (kind == ModelKind::DepTree ? 16u : 14u));
  }
}

}  // TEST_SUITE
