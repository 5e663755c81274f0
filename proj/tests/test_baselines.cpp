#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "talkgrade/baselines.hpp"
#include "talkgrade/error.hpp"

using namespace talkgrade;

namespace {

const char* kSampleLexicon =
    "# sample\n"
    "posemo: glad joy* love\n"
    "negemo: sad hate*\n"
    "\n"
    "func: the a an\n"
    "none: zzz\n";

std::vector<Sentence> sample_transcript() {
  return {{"i", "am", "glad", "and", "joyful"},
          {"the", "joy", "of", "hateful", "love"},
          {"sad", "the", "end"}};
}

double training_accuracy(const LinearModel& m, const fixtures::LinearProblem& p, Margin margin) {
  int right = 0;
  for (Eigen::Index i = 0; i < p.X.rows(); ++i) {
    int label = predict_linear(m, p.X.row(i).transpose(), margin);
    right += (label == 1) == (p.y[i] > 0);
  }
  return static_cast<double>(right) / static_cast<double>(p.X.rows());
}

double svm_oracle(const fixtures::LinearProblem& p, double C) {
  return fixtures::grid_minimum(
      [&](const Eigen::VectorXd& t) { return svm_objective(p.X, p.y, C, t.head(2), t[2]); }, 3,
      60.0, 14);
}

double lasso_oracle(const fixtures::LinearProblem& p, double C) {
  return fixtures::grid_minimum(
      [&](const Eigen::VectorXd& t) { return lasso_objective(p.X, p.y, C, t.head(2), t[2]); }, 3,
      60.0, 14);
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("prefix patterns match by prefix, literals exactly") {
  Lexicon lex = Lexicon::parse("posemo: glad joy*\n");
  std::vector<Sentence> s{{"glad", "joyful", "joy", "sad"}};
  Eigen::VectorXd f = extract_features(s, lex);
  REQUIRE(f.size() == 1);
  CHECK(f[0] == 0.75);
  CHECK_FALSE(lex.matches(0, "gladly"));
  CHECK(lex.matches(0, "joystick"));
}

TEST_CASE("category without matches is zero") {
  Lexicon lex = Lexicon::parse(kSampleLexicon);
  Eigen::VectorXd f = extract_features(sample_transcript(), lex);
  CHECK(f[3] == 0.0);
}

TEST_CASE("sample transcript against counting script") {
  // python: tokens matched per category / 13 tokens
  Lexicon lex = Lexicon::parse(kSampleLexicon);
  Eigen::VectorXd f = extract_features(sample_transcript(), lex);
  REQUIRE(f.size() == 4);
  CHECK(f[0] == doctest::Approx(0.3076923076923077).epsilon(1e-15));
  CHECK(f[1] == doctest::Approx(0.15384615384615385).epsilon(1e-15));
  CHECK(f[2] == doctest::Approx(0.15384615384615385).epsilon(1e-15));
}

TEST_CASE("features are ratios: a doubled transcript gives the same vector") {
  Lexicon lex = Lexicon::parse(kSampleLexicon);
  auto once = sample_transcript();
  auto twice = once;
  twice.insert(twice.end(), once.begin(), once.end());
  CHECK(extract_features(once, lex) == extract_features(twice, lex));
}

TEST_CASE("lexicon parse errors and round trip") {
  CHECK_THROWS_AS(Lexicon::parse("no colon here\n"), Error);
  CHECK_THROWS_AS(Lexicon::parse("a: x\na: y\n"), Error);
  CHECK_THROWS_AS(Lexicon::parse("a:\n"), Error);
  CHECK_THROWS_AS(extract_features(std::vector<Sentence>{}, Lexicon::parse("a: x\n")), Error);
  Lexicon lex = Lexicon::parse(kSampleLexicon);
  CHECK(Lexicon::parse(lex.to_text()).to_text() == lex.to_text());
}

TEST_CASE("svm on a separable pair") {
  Eigen::MatrixXd X(2, 1);
  X << 1, -1;
  Eigen::VectorXd y(2);
  y << 1, -1;
  LinearModel m = train_svm(X, y, 1000.0);
  fixtures::LinearProblem p{X, y};
  CHECK(training_accuracy(m, p, Margin::Svm) == 1.0);
  double hinge = (1.0 - (y.array() * ((X * m.w).array() - m.b))).max(0.0).sum();
  CHECK(hinge < 1e-6);
  CHECK(m.w[0] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("C = 0 gives the zero model") {
  auto p = fixtures::separable_problem(4);
  LinearModel s = train_svm(p.X, p.y, 0.0);
  LinearModel l = train_lasso(p.X, p.y, 0.0);
  CHECK(s.w.isZero(0.0));
  CHECK(l.w.isZero(0.0));
}

TEST_CASE("lasso with tiny C keeps every weight exactly zero") {
  auto p = fixtures::separable_problem(7);
  LinearModel l = train_lasso(p.X, p.y, 1e-6);
  CHECK(l.w.isZero(0.0));
}

TEST_CASE("solver input validation") {
  auto p = fixtures::separable_problem(1);
  CHECK_THROWS_AS(train_svm(p.X, p.y, -1.0), Error);
  CHECK_THROWS_AS(train_svm(p.X, p.y.head(5), 1.0), Error);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(p.y.size());
  CHECK_THROWS_WITH_AS(train_lasso(p.X, ones, 1.0), "baseline: single-class input", Error);
  Eigen::VectorXd bad = p.y;
  bad[0] = 0.5;
  CHECK_THROWS_AS(train_svm(p.X, bad, 1.0), Error);
}

TEST_CASE("separable fixtures: accuracy 1 and objective within 1% of the grid oracle") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    auto p = fixtures::separable_problem(seed);
    for (double C : {1.0, 10.0}) {
      CAPTURE(seed);
      CAPTURE(C);
      LinearModel s = train_svm(p.X, p.y, C);
      LinearModel l = train_lasso(p.X, p.y, C);
      CHECK(training_accuracy(s, p, Margin::Svm) == 1.0);
      CHECK(training_accuracy(l, p, Margin::Lasso) == 1.0);
      CHECK(s.objective <= 1.01 * svm_oracle(p, C));
      CHECK(l.objective <= 1.01 * lasso_oracle(p, C));
      CHECK(s.objective == doctest::Approx(svm_objective(p.X, p.y, C, s.w, s.b)).epsilon(1e-12));
      CHECK(l.objective == doctest::Approx(lasso_objective(p.X, p.y, C, l.w, l.b)).epsilon(1e-12));
    }
  }
}

TEST_CASE("best objective never grows with the iteration budget") {
  auto p = fixtures::separable_problem(3);
  double prev_s = INFINITY, prev_l = INFINITY;
  for (int budget : {1, 10, 100, 1000, 5000}) {
    CAPTURE(budget);
    double s = train_svm(p.X, p.y, 10.0, {budget}).objective;
    double l = train_lasso(p.X, p.y, 10.0, {budget}).objective;
    CHECK(s <= prev_s);
    CHECK(l <= prev_l);
    prev_s = s;
    prev_l = l;
  }
}

TEST_CASE("l1 zero-weight fraction shrinks as C grows") {
  // one informative feature plus noise columns
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0, 1);
  const int n = 60, d = 8;
  Eigen::MatrixXd X(n, d);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = i % 2 ? 1.0 : -1.0;
    X(i, 0) = y[i] + 0.8 * noise(rng);
    for (int j = 1; j < d; ++j) X(i, j) = noise(rng);
  }
  double prev = 1.1;
  for (double C : {0.001, 0.01, 0.1, 1.0, 10.0, 100.0}) {
    LinearModel l = train_lasso(X, y, C);
    double zeros = (l.w.array() == 0.0).cast<double>().mean();
    CAPTURE(C);
    CHECK(zeros <= prev);
    prev = zeros;
  }
  CHECK(prev < 1.0);
  CHECK(train_lasso(X, y, 0.001).w.isZero(0.0));
}

TEST_CASE("predict sign conventions") {
  LinearModel zero{Eigen::VectorXd::Zero(3), 0.0, 0.0};
  Eigen::VectorXd x = Eigen::VectorXd::Ones(3);
  CHECK(predict_linear(zero, x, Margin::Svm) == 1);
  CHECK(predict_linear(zero, x, Margin::Lasso) == 1);

  LinearModel m{Eigen::VectorXd::Zero(3), 0.5, 0.0};
  CHECK(predict_linear(m, x, Margin::Svm) == 0);
  CHECK(predict_linear(m, x, Margin::Lasso) == 1);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 500; ++trial) {
    LinearModel r{Eigen::VectorXd(4), u(rng), 0.0};
    Eigen::VectorXd v(4);
    double dot = 0;
    for (int k = 0; k < 4; ++k) {
      r.w[k] = u(rng);
      v[k] = u(rng);
      dot += r.w[k] * v[k];
    }
    CHECK(predict_linear(r, v, Margin::Svm) == (dot - r.b >= 0 ? 1 : 0));
    CHECK(predict_linear(r, v, Margin::Lasso) == (dot + r.b >= 0 ? 1 : 0));
  }
}

}  // TEST_SUITE
