#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "talkgrade/corpus.hpp"

namespace talkgrade {

/// Word-category dictionary. File format, one category per line:
///
///   category: word1 word2 prefix*
///
/// Blank lines and lines starting with '#' are ignored.
class Lexicon {
 public:
  struct Category {
    std::string name;
    std::vector<std::string> patterns;  // literal, or prefix when ending in '*'
  };

  Lexicon() = default;
  explicit Lexicon(std::vector<Category> categories);

  static Lexicon parse(std::string_view text);
  static Lexicon load(const std::filesystem::path& path);
  std::string to_text() const;

  std::size_t size() const { return categories_.size(); }
  const std::vector<Category>& categories() const { return categories_; }

  bool matches(std::size_t category, std::string_view token) const;

 private:
  std::vector<Category> categories_;
};

/// Fraction of tokens matching each category. A token may count toward
/// several categories.
Eigen::VectorXd extract_features(std::span<const Sentence> sentences, const Lexicon& lex);
Eigen::VectorXd extract_features(const Talk& talk, const Lexicon& lex);

struct LinearModel {
  Eigen::VectorXd w;
  double b = 0;
  double objective = 0;
};

struct SolverOptions {
  int iterations = 20000;
};

/// ½‖w‖² + C Σ max(0, 1 − y_i(w·x_i − b)) by full-batch subgradient descent
/// with Polyak steps; returns the best iterate seen. Labels are ±1.
LinearModel train_svm(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double C,
                      const SolverOptions& opts = {});
double svm_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double C,
                     const Eigen::VectorXd& w, double b);

/// ‖w‖₁ + C Σ log(1 + exp(−y_i(w·x_i + b))) by accelerated proximal gradient
/// (soft-thresholding on w, b unpenalized); returns the best iterate.
LinearModel train_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double C,
                        const SolverOptions& opts = {});
double lasso_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double C,
                       const Eigen::VectorXd& w, double b);

enum class Margin { Svm, Lasso };

/// SVM: 1 iff w·x − b ≥ 0. LASSO: 1 iff w·x + b ≥ 0.
int predict_linear(const LinearModel& m, const Eigen::VectorXd& x, Margin margin);

}  // namespace talkgrade
