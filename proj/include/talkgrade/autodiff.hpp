#pragma once

// Reverse-mode automatic differentiation over dense Eigen matrices.
//
// A Graph is a tape: every primitive appends one node holding its forward
// value, and backward() walks the tape in reverse creation order. Vectors
// are n x 1 matrices; there is no broadcasting, so every shape mismatch is
// an error. Learnable parameters live in Tensor objects owned by the caller;
// the graph borrows their values and reports gradients back through a sink.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "talkgrade/error.hpp"

namespace talkgrade::ad {

using Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct Tensor {
  std::string name;
  MatrixX<Scalar> value;
  // Gradient accumulator. Mutable so that forward passes can take parameters
  // by const reference while backward() still reports into them.
  mutable MatrixX<Scalar> grad;
  bool requires_grad = true;

  Tensor() = default;
  Tensor(std::string n, Index rows, Index cols, bool learnable = true)
      : name(std::move(n)),
        value(MatrixX<Scalar>::Zero(rows, cols)),
        grad(MatrixX<Scalar>::Zero(rows, cols)),
        requires_grad(learnable) {}

  Index rows() const { return value.rows(); }
  Index cols() const { return value.cols(); }
  Index size() const { return value.size(); }

  void zero_grad() const { grad.setZero(value.rows(), value.cols()); }
};

template <typename Scalar>
class Graph;

template <typename Scalar>
struct Var {
  Graph<Scalar>* graph = nullptr;
  int id = -1;

  const MatrixX<Scalar>& value() const { return graph->value(*this); }
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
};

namespace detail {

template <typename Scalar>
std::string shape(const MatrixX<Scalar>& m) {
  return "(" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ")";
}

}  // namespace detail

template <typename Scalar>
class Graph {
 public:
  using Matrix = MatrixX<Scalar>;
  using V = Var<Scalar>;

  enum class Op {
    Leaf, Input, MatVec, Add, Sub, Hadamard, Sigmoid, Tanh, Log, Affine,
    Concat, SumList, MeanList, SumElements, Row, Custom
  };

  /// Reverse rule for custom(): given the output adjoint, returns one
  /// adjoint per input (same shapes as the inputs).
  using ReverseRule = std::function<std::vector<Matrix>(const Matrix& dy)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Learnable (or frozen) parameter; the value is borrowed, not copied.
  V leaf(const Tensor<Scalar>& t) {
    Node n{Op::Leaf};
    n.ref = &t.value;
    n.tensor = &t;
    n.needs_grad = t.requires_grad;
    return push(std::move(n));
  }

  /// Constant input; the value is borrowed and must outlive the graph.
  V input(const Matrix& m) {
    Node n{Op::Input};
    n.ref = &m;
    return push(std::move(n));
  }

  /// Constant input owned by the graph.
  V constant(Matrix m) {
    Node n{Op::Input};
    n.value = std::move(m);
    return push(std::move(n));
  }

  const Matrix& value(V v) const {
    const Node& n = nodes_.at(static_cast<std::size_t>(v.id));
    return n.ref ? *n.ref : n.value;
  }

  std::size_t size() const { return nodes_.size(); }

  V matvec(V m, V v) {
    const Matrix& M = value(m);
    const Matrix& x = value(v);
    if (x.cols() != 1 || M.cols() != x.rows())
      throw Error("matvec: shape mismatch " + detail::shape(M) + " vs " + detail::shape(x));
    return unary_or_binary(Op::MatVec, {m, v}, M * x);
  }

  V add(V a, V b) {
    same_shape("add", a, b);
    return unary_or_binary(Op::Add, {a, b}, value(a) + value(b));
  }

  V sub(V a, V b) {
    same_shape("sub", a, b);
    return unary_or_binary(Op::Sub, {a, b}, value(a) - value(b));
  }

  V hadamard(V a, V b) {
    same_shape("hadamard", a, b);
    return unary_or_binary(Op::Hadamard, {a, b}, value(a).cwiseProduct(value(b)));
  }

  V sigmoid(V a) {
    Matrix y = value(a).unaryExpr([](Scalar x) { return logistic(x); });
    return unary_or_binary(Op::Sigmoid, {a}, std::move(y));
  }

  V tanh(V a) {
    Matrix y = value(a).array().tanh().matrix();
    return unary_or_binary(Op::Tanh, {a}, std::move(y));
  }

  V log(V a) {
    const Matrix& x = value(a);
    if (!(x.array() > Scalar(0)).all()) throw Error("log: non-positive entry");
    return unary_or_binary(Op::Log, {a}, x.array().log().matrix());
  }

  /// alpha * a + beta, element-wise; used for mixing terms such as 1 - r.
  V affine(V a, Scalar alpha, Scalar beta) {
    Matrix y = (alpha * value(a).array() + beta).matrix();
    V out = unary_or_binary(Op::Affine, {a}, std::move(y));
    nodes_.back().alpha = alpha;
    return out;
  }

  /// Vertical concatenation of column vectors.
  V concat(std::span<const V> parts) {
    if (parts.empty()) throw Error("concat: no inputs");
    Index rows = 0;
    for (V p : parts) {
      if (value(p).cols() != 1)
        throw Error("concat: shape mismatch " + detail::shape(value(parts[0])) + " vs " +
                    detail::shape(value(p)));
      rows += value(p).rows();
    }
    Matrix y(rows, 1);
    Index at = 0;
    for (V p : parts) {
      y.middleRows(at, value(p).rows()) = value(p);
      at += value(p).rows();
    }
    return list_op(Op::Concat, parts, std::move(y));
  }

  V concat(std::initializer_list<V> parts) { return concat(std::span<const V>(parts.begin(), parts.size())); }

  V sum(std::span<const V> parts) { return list_op(Op::SumList, parts, sum_values("sum_of_vectors", parts)); }

  /// Each coordinate is summed in sorted order, so the result does not
  /// depend on the order of `parts` (bitwise).
  V mean(std::span<const V> parts) {
    Matrix y = sum_values("mean_of_vectors", parts);
    std::vector<Scalar> column(parts.size());
    for (Index k = 0; k < y.size(); ++k) {
      for (std::size_t j = 0; j < parts.size(); ++j) column[j] = value(parts[j]).data()[k];
      std::sort(column.begin(), column.end());
      Scalar acc(0);
      for (Scalar v : column) acc += v;
      y.data()[k] = acc;
    }
    y /= static_cast<Scalar>(parts.size());
    return list_op(Op::MeanList, parts, std::move(y));
  }

  /// 1 x 1 sum of all entries.
  V sum_elements(V a) {
    Matrix y(1, 1);
    y(0, 0) = value(a).sum();
    return unary_or_binary(Op::SumElements, {a}, std::move(y));
  }

  /// Row `r` of a matrix as a column vector (embedding lookup).
  V row(V m, Index r) {
    const Matrix& M = value(m);
    if (r < 0 || r >= M.rows())
      throw Error("row: index " + std::to_string(r) + " out of range for " + detail::shape(M));
    V out = unary_or_binary(Op::Row, {m}, M.row(r).transpose());
    nodes_.back().aux = r;
    return out;
  }

  /// User-defined primitive with an explicit forward value and reverse rule.
  V custom(std::span<const V> ins, Matrix y, ReverseRule rule) {
    V out = list_op(Op::Custom, ins, std::move(y));
    nodes_.back().rule = std::move(rule);
    return out;
  }

  /// Runs the reverse sweep from a 1 x 1 node and hands each learnable
  /// leaf's gradient to `sink(tensor, grad)`. A tensor bound more than once
  /// is reported once per binding; sinks must add.
  template <typename Sink>
  void backward(V loss, Sink&& sink) {
    const Matrix& L = value(loss);
    if (L.rows() != 1 || L.cols() != 1)
      throw Error("backward: loss must be a scalar, got " + detail::shape(L));
    std::vector<Matrix> adj(nodes_.size());
    adj[static_cast<std::size_t>(loss.id)] = Matrix::Ones(1, 1);

    for (int i = loss.id; i >= 0; --i) {
      Node& n = nodes_[static_cast<std::size_t>(i)];
      Matrix& dy = adj[static_cast<std::size_t>(i)];
      if (dy.size() == 0 || !n.needs_grad) continue;
      reverse(n, i, dy, adj);
    }
    for (std::size_t i = 0; i <= static_cast<std::size_t>(loss.id); ++i) {
      const Node& n = nodes_[i];
      if (n.op == Op::Leaf && n.needs_grad && adj[i].size() != 0) sink(*n.tensor, adj[i]);
    }
  }

  /// Accumulates into each bound tensor's own `grad`.
  void backward(V loss) {
    backward(loss, [](const Tensor<Scalar>& t, const Matrix& g) {
      if (t.grad.rows() != g.rows() || t.grad.cols() != g.cols()) t.zero_grad();
      t.grad += g;
    });
  }

  static Scalar logistic(Scalar x) {
    // Split on sign so neither branch overflows.
    if (x >= 0) return Scalar(1) / (Scalar(1) + std::exp(-x));
    Scalar e = std::exp(x);
    return e / (Scalar(1) + e);
  }

 private:
  struct Node {
    Op op;
    std::vector<int> in{};
    Matrix value{};
    const Matrix* ref = nullptr;
    const Tensor<Scalar>* tensor = nullptr;
    bool needs_grad = false;
    Scalar alpha{};
    Index aux = 0;
    ReverseRule rule{};
  };

  V push(Node n) {
    nodes_.push_back(std::move(n));
    return V{this, static_cast<int>(nodes_.size() - 1)};
  }

  void check_owner(V v) const {
    if (v.graph != this || v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size())
      throw Error("variable does not belong to this graph");
  }

  void same_shape(const char* op, V a, V b) const {
    check_owner(a);
    check_owner(b);
    const Matrix& x = value(a);
    const Matrix& y = value(b);
    if (x.rows() != y.rows() || x.cols() != y.cols())
      throw Error(std::string(op) + ": shape mismatch " + detail::shape(x) + " vs " + detail::shape(y));
  }

  V unary_or_binary(Op op, std::initializer_list<V> ins, Matrix y) {
    Node n{op};
    for (V v : ins) {
      check_owner(v);
      n.in.push_back(v.id);
      n.needs_grad = n.needs_grad || nodes_[static_cast<std::size_t>(v.id)].needs_grad;
    }
    n.value = std::move(y);
    return push(std::move(n));
  }

  V list_op(Op op, std::span<const V> ins, Matrix y) {
    Node n{op};
    for (V v : ins) {
      check_owner(v);
      n.in.push_back(v.id);
      n.needs_grad = n.needs_grad || nodes_[static_cast<std::size_t>(v.id)].needs_grad;
    }
    n.value = std::move(y);
    return push(std::move(n));
  }

  Matrix sum_values(const char* op, std::span<const V> parts) const {
    if (parts.empty()) throw Error(std::string(op) + ": no inputs");
    for (V p : parts) check_owner(p);
    Matrix y = value(parts[0]);
    for (std::size_t k = 1; k < parts.size(); ++k) {
      const Matrix& x = value(parts[k]);
      if (x.rows() != y.rows() || x.cols() != y.cols())
        throw Error(std::string(op) + ": shape mismatch " + detail::shape(y) + " vs " +
                    detail::shape(x));
      y += x;
    }
    return y;
  }

  template <typename Expr>
  void accum(std::vector<Matrix>& adj, int j, const Expr& g) {
    if (!nodes_[static_cast<std::size_t>(j)].needs_grad) return;
    Matrix& a = adj[static_cast<std::size_t>(j)];
    if (a.size() == 0)
      a = g;
    else
      a += g;
  }

  void reverse(const Node& n, int self, const Matrix& dy, std::vector<Matrix>& adj) {
    const Matrix& y = value(V{this, self});
    auto in = [&](std::size_t k) -> const Matrix& { return value(V{this, n.in[k]}); };
    switch (n.op) {
      case Op::Leaf:
      case Op::Input:
        break;
      case Op::MatVec:
        accum(adj, n.in[0], dy * in(1).transpose());
        accum(adj, n.in[1], in(0).transpose() * dy);
        break;
      case Op::Add:
        accum(adj, n.in[0], dy);
        accum(adj, n.in[1], dy);
        break;
      case Op::Sub:
        accum(adj, n.in[0], dy);
        accum(adj, n.in[1], -dy);
        break;
      case Op::Hadamard:
        accum(adj, n.in[0], dy.cwiseProduct(in(1)));
        accum(adj, n.in[1], dy.cwiseProduct(in(0)));
        break;
      case Op::Sigmoid:
        accum(adj, n.in[0], (dy.array() * y.array() * (Scalar(1) - y.array())).matrix());
        break;
      case Op::Tanh:
        accum(adj, n.in[0], (dy.array() * (Scalar(1) - y.array().square())).matrix());
        break;
      case Op::Log:
        accum(adj, n.in[0], (dy.array() / in(0).array()).matrix());
        break;
      case Op::Affine:
        accum(adj, n.in[0], n.alpha * dy);
        break;
      case Op::Concat: {
        Index at = 0;
        for (std::size_t k = 0; k < n.in.size(); ++k) {
          Index r = in(k).rows();
          accum(adj, n.in[k], dy.middleRows(at, r));
          at += r;
        }
        break;
      }
      case Op::SumList:
        for (int j : n.in) accum(adj, j, dy);
        break;
      case Op::MeanList: {
        Matrix share = dy / static_cast<Scalar>(n.in.size());
        for (int j : n.in) accum(adj, j, share);
        break;
      }
      case Op::SumElements:
        accum(adj, n.in[0], Matrix::Constant(in(0).rows(), in(0).cols(), dy(0, 0)));
        break;
      case Op::Row: {
        if (!nodes_[static_cast<std::size_t>(n.in[0])].needs_grad) break;
        Matrix& a = adj[static_cast<std::size_t>(n.in[0])];
        if (a.size() == 0) a = Matrix::Zero(in(0).rows(), in(0).cols());
        a.row(n.aux) += dy.transpose();
        break;
      }
      case Op::Custom: {
        std::vector<Matrix> grads = n.rule(dy);
        if (grads.size() != n.in.size()) throw Error("custom: reverse rule returned wrong arity");
        for (std::size_t k = 0; k < grads.size(); ++k) {
          if (grads[k].rows() != in(k).rows() || grads[k].cols() != in(k).cols())
            throw Error("custom: shape mismatch " + detail::shape(grads[k]) + " vs " +
                        detail::shape(in(k)));
          accum(adj, n.in[k], grads[k]);
        }
        break;
      }
    }
  }

  std::vector<Node> nodes_;
};

// Free-function spellings, so model code reads like the cell equations.

template <typename S> Var<S> matvec(Var<S> m, Var<S> v) { return m.graph->matvec(m, v); }
template <typename S> Var<S> add(Var<S> a, Var<S> b) { return a.graph->add(a, b); }
template <typename S> Var<S> sub(Var<S> a, Var<S> b) { return a.graph->sub(a, b); }
template <typename S> Var<S> hadamard(Var<S> a, Var<S> b) { return a.graph->hadamard(a, b); }
template <typename S> Var<S> sigmoid(Var<S> a) { return a.graph->sigmoid(a); }
template <typename S> Var<S> tanh(Var<S> a) { return a.graph->tanh(a); }
template <typename S> Var<S> log(Var<S> a) { return a.graph->log(a); }
template <typename S> Var<S> affine(Var<S> a, S alpha, S beta) { return a.graph->affine(a, alpha, beta); }
template <typename S> Var<S> sum_elements(Var<S> a) { return a.graph->sum_elements(a); }

template <typename S> Var<S> operator+(Var<S> a, Var<S> b) { return add(a, b); }
template <typename S> Var<S> operator-(Var<S> a, Var<S> b) { return sub(a, b); }

// ---------------------------------------------------------------------------
// Finite-difference verification.

template <typename Scalar>
struct GradCheckReport {
  struct Worst {
    std::string tensor;
    Index index = -1;
    Scalar analytic{}, numeric{}, rel_error{};
  };
  std::vector<Worst> per_tensor;  // worst coordinate of each tensor
  Scalar max_rel_error{};
  std::size_t coordinates = 0;
  bool passed = false;
};

/// Relative error with a floor on the denominator: |a - n| / max(|a|, |n|, floor).
template <typename Scalar>
Scalar relative_error(Scalar analytic, Scalar numeric, Scalar floor) {
  Scalar denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

/// Compares reverse-mode gradients of `build` (which must return a 1 x 1
/// node) against central differences for every coordinate of every tensor
/// in `params`. Tensor values are restored afterwards.
template <typename Scalar>
GradCheckReport<Scalar> gradcheck(const std::function<Var<Scalar>(Graph<Scalar>&)>& build,
                                  std::span<Tensor<Scalar>* const> params, Scalar eps, Scalar tol,
                                  Scalar floor = Scalar(1e-4)) {
  if (!(eps > 0)) throw Error("gradcheck: eps must be positive");
  auto finite = [](Scalar v) {
    if (!std::isfinite(v)) throw Error("gradcheck: non-finite value encountered");
    return v;
  };
  for (auto* p : params) p->zero_grad();
  {
    Graph<Scalar> g;
    auto loss = build(g);
    finite(g.value(loss)(0, 0));
    g.backward(loss);
  }
  auto eval = [&]() {
    Graph<Scalar> g;
    auto loss = build(g);
    return finite(g.value(loss)(0, 0));
  };

  GradCheckReport<Scalar> rep;
  for (auto* p : params) {
    typename GradCheckReport<Scalar>::Worst worst{p->name};
    for (Index k = 0; k < p->value.size(); ++k) {
      Scalar& w = p->value.data()[k];
      const Scalar saved = w;
      w = saved + eps;
      Scalar up = eval();
      w = saved - eps;
      Scalar down = eval();
      w = saved;
      Scalar numeric = (up - down) / (Scalar(2) * eps);
      Scalar analytic = finite(p->grad.data()[k]);
      Scalar rel = relative_error(analytic, numeric, floor);
      if (worst.index < 0 || rel > worst.rel_error) worst = {p->name, k, analytic, numeric, rel};
      ++rep.coordinates;
    }
    rep.max_rel_error = std::max(rep.max_rel_error, worst.rel_error);
    rep.per_tensor.push_back(std::move(worst));
  }
  rep.passed = rep.max_rel_error < tol;
  return rep;
}

/// Single-tensor convenience form: `f` maps the bound tensor to a scalar.
template <typename Scalar>
GradCheckReport<Scalar> gradcheck(const std::function<Var<Scalar>(Graph<Scalar>&, Var<Scalar>)>& f,
                                  Tensor<Scalar>& x, Scalar eps, Scalar tol,
                                  Scalar floor = Scalar(1e-4)) {
  std::function<Var<Scalar>(Graph<Scalar>&)> build = [&](Graph<Scalar>& g) { return f(g, g.leaf(x)); };
  Tensor<Scalar>* one[] = {&x};
  return gradcheck<Scalar>(build, std::span<Tensor<Scalar>* const>(one), eps, tol, floor);
}

}  // namespace talkgrade::ad
