#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fpe::ml {

enum class Algorithm : std::uint8_t {
  DecisionTree = 1,
  RandomForest = 2,
  Knn = 3,
  LogisticRegression = 4,
  LinearSvmSgd = 5,
  Mlp = 6,
};

inline constexpr Algorithm kAllAlgorithms[] = {
    Algorithm::DecisionTree,       Algorithm::RandomForest, Algorithm::Knn,
    Algorithm::LogisticRegression, Algorithm::LinearSvmSgd, Algorithm::Mlp};

/// Short stable names: tree, forest, knn, logreg, svm, mlp.
std::string_view to_string(Algorithm algorithm) noexcept;
/// Accepts the short names plus a few aliases (c45, dt, rf, lr, ...).
/// Throws Error{InvalidHyperparams}.
Algorithm parse_algorithm(std::string_view name);

enum class SplitCriterion : std::uint8_t { Gini = 0, GainRatio = 1 };
enum class KRounding : std::uint8_t { Round = 0, Floor = 1 };

struct TreeParams {
  SplitCriterion criterion = SplitCriterion::Gini;
  std::size_t max_depth = 0;  // 0 = grow until pure
  std::size_t min_samples_split = 2;
};

struct ForestParams {
  std::size_t tree_count = 128;
  bool bootstrap = true;
  std::size_t features_per_split = 38;  // floor(sqrt(1500))
  TreeParams tree;
};

struct KnnParams {
  std::size_t k = 0;  // 0 = choose_k(|train|)
  KRounding rounding = KRounding::Round;
};

struct LogisticParams {
  std::size_t max_iterations = 10000;
  double tolerance = 1e-6;
  double l2 = 1.0;
  std::size_t history = 10;  // L-BFGS correction pairs
};

struct SvmParams {
  double tolerance = 1e-8;
  std::size_t max_epochs = 1000;
  double eta0 = 0.01;
  double power_t = 0.5;
  double alpha = 1e-4;
  std::size_t n_iter_no_change = 5;
};

struct MlpParams {
  std::vector<std::size_t> hidden_sizes = {64, 64};
  double tolerance = 1e-9;
  std::size_t max_epochs = 200;
  std::size_t batch_size = 128;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double alpha = 1e-4;  // L2 penalty
  std::size_t n_iter_no_change = 10;
};

struct Hyperparams {
  Algorithm algorithm = Algorithm::DecisionTree;
  TreeParams tree;
  ForestParams forest;
  KnnParams knn;
  LogisticParams logistic;
  SvmParams svm;
  MlpParams mlp;
  std::size_t threads = 1;  // forest training and batch prediction

  static Hyperparams defaults(Algorithm algorithm);

  /// Applies one "section.key=value" override, e.g. "tree.max_depth=12",
  /// "mlp.hidden=950x950x950", "knn.k=5". Throws Error{InvalidHyperparams}.
  void set(std::string_view key, std::string_view value);

  /// Checks counts >= 1, tolerances > 0 and k <= train_size.
  void validate(std::size_t train_size) const;
};

/// round(sqrt(train_size)) (or floor), clamped to [1, train_size].
std::size_t choose_k(std::size_t train_size, KRounding rounding = KRounding::Round);

}  // namespace fpe::ml
