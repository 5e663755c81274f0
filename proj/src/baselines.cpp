#include "talkgrade/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "talkgrade/error.hpp"

namespace talkgrade {

Lexicon::Lexicon(std::vector<Category> categories) : categories_(std::move(categories)) {
  std::set<std::string> names;
  for (const auto& c : categories_) {
    if (c.name.empty()) throw Error("lexicon category with empty name");
    if (!names.insert(c.name).second) throw Error("duplicate lexicon category '" + c.name + "'");
    if (c.patterns.empty()) throw Error("lexicon category '" + c.name + "' has no patterns");
    for (const auto& p : c.patterns)
      if (p.empty() || p == "*") throw Error("empty pattern in lexicon category '" + c.name + "'");
  }
}

Lexicon Lexicon::parse(std::string_view text) {
  std::vector<Category> cats;
  std::istringstream is{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto colon = line.find(':');
    if (colon == std::string::npos)
      throw Error("lexicon line " + std::to_string(line_no) + ": expected 'category: words...'");
    Category c;
    std::istringstream name(line.substr(0, colon));
    name >> c.name;
    std::istringstream words(line.substr(colon + 1));
    for (std::string w; words >> w;) c.patterns.push_back(w);
    cats.push_back(std::move(c));
  }
  return Lexicon(std::move(cats));
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string Lexicon::to_text() const {
  std::string out;
  for (const auto& c : categories_) {
    out += c.name + ":";
    for (const auto& p : c.patterns) out += " " + p;
    out += "\n";
  }
  return out;
}

bool Lexicon::matches(std::size_t category, std::string_view token) const {
  for (const auto& p : categories_.at(category).patterns) {
    if (p.back() == '*') {
      std::string_view prefix(p.data(), p.size() - 1);
      if (token.substr(0, prefix.size()) == prefix) return true;
    } else if (token == p) {
      return true;
    }
  }
  return false;
}

Eigen::VectorXd extract_features(std::span<const Sentence> sentences, const Lexicon& lex) {
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lex.size()));
  std::size_t total = 0;
  for (const auto& s : sentences)
    for (const auto& tok : s) {
      ++total;
      for (std::size_t c = 0; c < lex.size(); ++c)
        if (lex.matches(c, tok)) counts[static_cast<Eigen::Index>(c)] += 1;
    }
  if (total == 0) throw Error("extract_features: talk has no tokens");
  return counts / static_cast<double>(total);
}

Eigen::VectorXd extract_features(const Talk& talk, const Lexicon& lex) {
  return extract_features(std::span<const Sentence>(talk.sentences), lex);
}

// ---------------------------------------------------------------------------

namespace {

void check_problem(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double C) {
  if (X.rows() != y.size()) throw Error("baseline: feature/label count mismatch");
  if (X.rows() < 2) throw Error("baseline: need at least two examples");
  if (!(C >= 0)) throw Error("baseline: C must be non-negative");
  bool pos = false, neg = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] == 1.0)
      pos = true;
    else if (y[i] == -1.0)
      neg = true;
    else
      throw Error("baseline: labels must be +1 or -1");
  }
  if (!pos || !neg) throw Error("baseline: single-class input");
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double svm_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double C,
                     const Eigen::VectorXd& w, double b) {
  Eigen::ArrayXd margins = y.array() * ((X * w).array() - b);
  return 0.5 * w.squaredNorm() + C * (1.0 - margins).max(0.0).sum();
}

LinearModel train_svm(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double C,
                      const SolverOptions& opts) {
  check_problem(X, y, C);
  const Eigen::Index d = X.cols();
  LinearModel best{Eigen::VectorXd::Zero(d), 0.0, 0.0};
  best.objective = svm_objective(X, y, C, best.w, best.b);
  if (C == 0) return best;

  // Polyak steps towards a target level delta below the best objective. After
  // 50 steps without improvement, delta halves and we restart from the best point.
  Eigen::VectorXd w = best.w;
  double b = 0;
  double delta = 0.5 * best.objective;
  double level_start = best.objective;
  int stall = 0;
  for (int t = 1; t <= opts.iterations; ++t) {
    Eigen::VectorXd xw = X * w;
    Eigen::ArrayXd margins = y.array() * (xw.array() - b);
    const double obj = 0.5 * w.squaredNorm() + C * (1.0 - margins).max(0.0).sum();
    if (obj < best.objective) {
      best = LinearModel{w, b, obj};
      stall = 0;
    } else {
      ++stall;
    }
    if (best.objective <= level_start - 0.5 * delta) {
      level_start = best.objective;
    } else if (stall > 0 && stall % 50 == 0) {
      delta *= 0.5;
      level_start = best.objective;
      w = best.w;
      b = best.b;
      continue;
    }
    Eigen::VectorXd coef = (margins < 1.0).cast<double>() * y.array();
    Eigen::VectorXd gw = w - C * (X.transpose() * coef);
    double gb = C * coef.sum();
    const double gnorm2 = gw.squaredNorm() + gb * gb;
    if (gnorm2 == 0) break;
    const double step = (obj - (best.objective - delta)) / gnorm2;
    w -= step * gw;
    b -= step * gb;
  }
  return best;
}

double lasso_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double C,
                       const Eigen::VectorXd& w, double b) {
  Eigen::ArrayXd margins = y.array() * ((X * w).array() + b);
  double loss = 0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) loss += softplus(-margins[i]);
  return w.lpNorm<1>() + C * loss;
}

LinearModel train_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double C,
                        const SolverOptions& opts) {
  check_problem(X, y, C);
  const Eigen::Index n = X.rows(), d = X.cols();
  LinearModel best{Eigen::VectorXd::Zero(d), 0.0, 0.0};
  best.objective = lasso_objective(X, y, C, best.w, best.b);
  if (C == 0) return best;

  Eigen::MatrixXd Xb(n, d + 1);
  Xb << X, Eigen::VectorXd::Ones(n);
  const double sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(Xb).singularValues()(0);
  const double lipschitz = C * sigma * sigma / 4.0;
  const double step = 1.0 / lipschitz;

  auto gradient = [&](const Eigen::VectorXd& theta) {
    Eigen::ArrayXd z = (Xb * theta).array();
    Eigen::VectorXd s(n);
    for (Eigen::Index i = 0; i < n; ++i) s[i] = -y[i] * logistic(-y[i] * z[i]);
    return Eigen::VectorXd(C * (Xb.transpose() * s));
  };
  auto prox = [&](Eigen::VectorXd theta) {
    for (Eigen::Index j = 0; j < d; ++j) {
      double v = theta[j];
      theta[j] = v > step ? v - step : (v < -step ? v + step : 0.0);
    }
    return theta;
  };
  auto objective = [&](const Eigen::VectorXd& theta) {
    return lasso_objective(X, y, C, theta.head(d), theta[d]);
  };

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1), prev = theta, look = theta;
  double momentum = 1.0, last_obj = best.objective;
  for (int t = 0; t < opts.iterations; ++t) {
    Eigen::VectorXd next = prox(look - step * gradient(look));
    double obj = objective(next);
    if (obj < best.objective) best = LinearModel{next.head(d), next[d], obj};
    if (obj > last_obj) {
      // Adaptive restart: drop the momentum and retry from the last iterate.
      momentum = 1.0;
      look = theta;
      continue;
    }
    double m_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    prev = theta;
    theta = next;
    look = theta + ((momentum - 1.0) / m_next) * (theta - prev);
    momentum = m_next;
    last_obj = obj;
  }
  return best;
}

int predict_linear(const LinearModel& m, const Eigen::VectorXd& x, Margin margin) {
  if (x.size() != m.w.size()) throw Error("predict_linear: feature size mismatch");
  double score = m.w.dot(x) + (margin == Margin::Svm ? -m.b : m.b);
  return score >= 0 ? 1 : 0;
}

}  // namespace talkgrade
