#include "fpe/ml/hyperparams.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fpe/error.hpp"

namespace fpe::ml {

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(Errc::InvalidHyperparams, what); }

std::size_t parse_count(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    const std::string s(value);
    const long long v = std::stoll(s, &used);
    if (used != s.size() || v < 0) invalid(std::string(key) + " expects a nonnegative integer");
    return static_cast<std::size_t>(v);
  } catch (const std::logic_error&) {
    invalid(std::string(key) + " expects a nonnegative integer, got '" + std::string(value) + "'");
  }
}

double parse_real(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    const std::string s(value);
    const double v = std::stod(s, &used);
    if (used != s.size()) invalid(std::string(key) + " expects a number");
    return v;
  } catch (const std::logic_error&) {
    invalid(std::string(key) + " expects a number, got '" + std::string(value) + "'");
  }
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  invalid(std::string(key) + " expects true/false");
}

std::vector<std::size_t> parse_sizes(std::string_view key, std::string_view value) {
  std::vector<std::size_t> sizes;
  std::size_t start = 0;
  while (start <= value.size()) {
    std::size_t sep = value.find_first_of("x,", start);
    if (sep == std::string_view::npos) sep = value.size();
    sizes.push_back(parse_count(key, value.substr(start, sep - start)));
    start = sep + 1;
  }
  return sizes;
}

void set_tree(TreeParams& tree, std::string_view name, std::string_view key, std::string_view value) {
  if (name == "criterion") {
    if (value == "gini") {
      tree.criterion = SplitCriterion::Gini;
    } else if (value == "gain_ratio" || value == "gain-ratio") {
      tree.criterion = SplitCriterion::GainRatio;
    } else {
      invalid("unknown split criterion '" + std::string(value) + "'");
    }
  } else if (name == "max_depth") {
    tree.max_depth = parse_count(key, value);
  } else if (name == "min_samples_split") {
    tree.min_samples_split = parse_count(key, value);
  } else {
    invalid("unknown hyperparameter " + std::string(key));
  }
}

}  // namespace

std::string_view to_string(Algorithm algorithm) noexcept {
  switch (algorithm) {
    case Algorithm::DecisionTree: return "tree";
    case Algorithm::RandomForest: return "forest";
    case Algorithm::Knn: return "knn";
    case Algorithm::LogisticRegression: return "logreg";
    case Algorithm::LinearSvmSgd: return "svm";
    case Algorithm::Mlp: return "mlp";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "tree" || name == "dt" || name == "c45" || name == "decision-tree") return Algorithm::DecisionTree;
  if (name == "forest" || name == "rf" || name == "random-forest") return Algorithm::RandomForest;
  if (name == "knn" || name == "k-nn") return Algorithm::Knn;
  if (name == "logreg" || name == "lr" || name == "logistic") return Algorithm::LogisticRegression;
  if (name == "svm" || name == "linear-svm") return Algorithm::LinearSvmSgd;
  if (name == "mlp") return Algorithm::Mlp;
  invalid("unknown algorithm '" + std::string(name) + "'");
}

Hyperparams Hyperparams::defaults(Algorithm algorithm) {
  Hyperparams hp;
  hp.algorithm = algorithm;
  return hp;
}

void Hyperparams::set(std::string_view key, std::string_view value) {
  const auto dot = key.find('.');
  if (dot == std::string_view::npos) {
    if (key == "threads") {
      threads = parse_count(key, value);
      return;
    }
    invalid("hyperparameter key must look like section.name: " + std::string(key));
  }
  const std::string_view section = key.substr(0, dot);
  const std::string_view name = key.substr(dot + 1);
  if (section == "tree") {
    set_tree(tree, name, key, value);
  } else if (section == "forest") {
    if (name == "tree_count" || name == "trees") {
      forest.tree_count = parse_count(key, value);
    } else if (name == "bootstrap") {
      forest.bootstrap = parse_bool(key, value);
    } else if (name == "features_per_split") {
      forest.features_per_split = parse_count(key, value);
    } else {
      set_tree(forest.tree, name, key, value);
    }
  } else if (section == "knn") {
    if (name == "k") {
      knn.k = parse_count(key, value);
    } else if (name == "rounding") {
      if (value == "round") {
        knn.rounding = KRounding::Round;
      } else if (value == "floor") {
        knn.rounding = KRounding::Floor;
      } else {
        invalid("knn.rounding expects round or floor");
      }
    } else {
      invalid("unknown hyperparameter " + std::string(key));
    }
  } else if (section == "logreg") {
    if (name == "max_iterations") {
      logistic.max_iterations = parse_count(key, value);
    } else if (name == "tolerance") {
      logistic.tolerance = parse_real(key, value);
    } else if (name == "l2") {
      logistic.l2 = parse_real(key, value);
    } else if (name == "history") {
      logistic.history = parse_count(key, value);
    } else {
      invalid("unknown hyperparameter " + std::string(key));
    }
  } else if (section == "svm") {
    if (name == "tolerance") {
      svm.tolerance = parse_real(key, value);
    } else if (name == "max_epochs") {
      svm.max_epochs = parse_count(key, value);
    } else if (name == "eta0") {
      svm.eta0 = parse_real(key, value);
    } else if (name == "power_t") {
      svm.power_t = parse_real(key, value);
    } else if (name == "alpha") {
      svm.alpha = parse_real(key, value);
    } else if (name == "n_iter_no_change") {
      svm.n_iter_no_change = parse_count(key, value);
    } else {
      invalid("unknown hyperparameter " + std::string(key));
    }
  } else if (section == "mlp") {
    if (name == "hidden" || name == "hidden_sizes") {
      mlp.hidden_sizes = parse_sizes(key, value);
    } else if (name == "tolerance") {
      mlp.tolerance = parse_real(key, value);
    } else if (name == "max_epochs") {
      mlp.max_epochs = parse_count(key, value);
    } else if (name == "batch_size") {
      mlp.batch_size = parse_count(key, value);
    } else if (name == "learning_rate") {
      mlp.learning_rate = parse_real(key, value);
    } else if (name == "alpha") {
      mlp.alpha = parse_real(key, value);
    } else if (name == "n_iter_no_change") {
      mlp.n_iter_no_change = parse_count(key, value);
    } else {
      invalid("unknown hyperparameter " + std::string(key));
    }
  } else {
    invalid("unknown hyperparameter section '" + std::string(section) + "'");
  }
}

void Hyperparams::validate(std::size_t train_size) const {
  auto positive_count = [](std::size_t v, const char* what) {
    if (v < 1) invalid(std::string(what) + " must be at least 1");
  };
  auto positive_real = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) invalid(std::string(what) + " must be positive");
  };
  if (threads < 1) invalid("threads must be at least 1");
  switch (algorithm) {
    case Algorithm::DecisionTree:
      if (tree.min_samples_split < 2) invalid("tree.min_samples_split must be at least 2");
      break;
    case Algorithm::RandomForest:
      positive_count(forest.tree_count, "forest.tree_count");
      positive_count(forest.features_per_split, "forest.features_per_split");
      if (forest.tree.min_samples_split < 2) invalid("forest.min_samples_split must be at least 2");
      break;
    case Algorithm::Knn:
      if (knn.k > train_size) {
        invalid("knn.k = " + std::to_string(knn.k) + " exceeds the training size " + std::to_string(train_size));
      }
      break;
    case Algorithm::LogisticRegression:
      positive_count(logistic.max_iterations, "logreg.max_iterations");
      positive_count(logistic.history, "logreg.history");
      positive_real(logistic.tolerance, "logreg.tolerance");
      if (!(logistic.l2 >= 0.0)) invalid("logreg.l2 must be nonnegative");
      break;
    case Algorithm::LinearSvmSgd:
      positive_count(svm.max_epochs, "svm.max_epochs");
      positive_count(svm.n_iter_no_change, "svm.n_iter_no_change");
      positive_real(svm.tolerance, "svm.tolerance");
      positive_real(svm.eta0, "svm.eta0");
      if (!(svm.alpha >= 0.0)) invalid("svm.alpha must be nonnegative");
      break;
    case Algorithm::Mlp:
      if (mlp.hidden_sizes.empty()) invalid("mlp.hidden needs at least one layer");
      for (auto h : mlp.hidden_sizes) positive_count(h, "mlp hidden layer size");
      positive_count(mlp.max_epochs, "mlp.max_epochs");
      positive_count(mlp.batch_size, "mlp.batch_size");
      positive_count(mlp.n_iter_no_change, "mlp.n_iter_no_change");
      positive_real(mlp.tolerance, "mlp.tolerance");
      positive_real(mlp.learning_rate, "mlp.learning_rate");
      if (!(mlp.alpha >= 0.0)) invalid("mlp.alpha must be nonnegative");
      break;
  }
}

std::size_t choose_k(std::size_t train_size, KRounding rounding) {
  if (train_size == 0) return 1;
  const double root = std::sqrt(static_cast<double>(train_size));
  auto k = static_cast<std::size_t>(rounding == KRounding::Round ? std::llround(root) : std::floor(root));
  return std::clamp<std::size_t>(k, 1, train_size);
}

}  // namespace fpe::ml
