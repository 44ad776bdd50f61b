#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>

#include "fpe/dataset/dataset.hpp"
#include "fpe/ml/blob.hpp"
#include "fpe/ml/hyperparams.hpp"
#include "fpe/random.hpp"

namespace fpe::ml {

/// Scales a byte vector to [0, 1] (x / 255).
Eigen::VectorXd scaled_features(dataset::FeatureView x);
/// Rows = samples, columns = scaled features.
Eigen::MatrixXd scaled_matrix(std::span<const dataset::LabeledVector> records);

/// Regularised mean log-loss
///   (1/n) sum log(1 + exp(-s_i z_i)) + (l2 / 2n) |w|^2,  z_i = w.x_i + b,
/// with s_i = +-1. theta holds w followed by the (unpenalised) bias. When
/// `grad` is non-null it receives the analytic gradient.
double logistic_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double l2,
                          const Eigen::VectorXd& theta, Eigen::VectorXd* grad);

struct LinearFit {
  std::size_t iterations = 0;
  double final_loss = 0.0;
};

/// Linear score w.x/255 + b. Label 1 when the score maps to >= 0.5 (sigmoid
/// for logistic regression, score >= 0 for the SVM).
class LinearModel {
 public:
  LinearModel() = default;
  LinearModel(Eigen::VectorXd weights, double bias) : w_(std::move(weights)), b_(bias) {}

  double decision(dataset::FeatureView x) const;
  std::uint8_t predict(dataset::FeatureView x) const { return decision(x) >= 0.0 ? 1 : 0; }

  const Eigen::VectorXd& weights() const { return w_; }
  double bias() const { return b_; }

  void write(BlobWriter& out) const;
  static LinearModel read(BlobReader& in);

 private:
  Eigen::VectorXd w_ = Eigen::VectorXd::Zero(dataset::kFeatureLength);
  double b_ = 0.0;
};

/// L-BFGS on logistic_objective; stops when the objective improves by less
/// than params.tolerance or after max_iterations.
LinearModel train_logistic(std::span<const dataset::LabeledVector> records,
                           const LogisticParams& params, LinearFit* fit = nullptr);

/// Plain SGD on hinge loss with L2 penalty and step eta0 / t^power_t. The
/// sample order is reshuffled each epoch from `rng`.
LinearModel train_linear_svm(std::span<const dataset::LabeledVector> records, const SvmParams& params,
                             RandomSource& rng, LinearFit* fit = nullptr);

}  // namespace fpe::ml
