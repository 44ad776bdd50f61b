#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "fpe/dataset/dataset.hpp"
#include "fpe/ml/blob.hpp"
#include "fpe/ml/hyperparams.hpp"
#include "fpe/random.hpp"

namespace fpe::ml {

/// Fully connected ReLU network with one sigmoid output unit. All weights
/// and biases live in one flat parameter vector: per layer, the weight
/// matrix (column-major, out x in) followed by its bias.
template <typename Scalar>
class MlpNetwork {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  MlpNetwork() = default;
  /// Glorot-uniform initialisation from `rng`.
  MlpNetwork(std::size_t inputs, const std::vector<std::size_t>& hidden, RandomSource& rng);
  /// Wraps existing parameters; sizes must match the layer layout.
  MlpNetwork(std::vector<std::size_t> layer_sizes, Vector params);

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  const Vector& params() const { return params_; }
  Vector& params() { return params_; }

  /// Output logit for each column of X (features x batch).
  Vector logits(const Matrix& X) const;
  Scalar logit(const Vector& x) const;

  /// Mean binary cross-entropy over the batch plus (alpha / 2B) |W|^2 over
  /// weight matrices (not biases). Fills `grad` (same layout as params).
  Scalar loss(const Matrix& X, const Vector& y, Scalar alpha, Vector* grad) const;

 private:
  std::size_t layer_offset(std::size_t layer) const;

  std::vector<std::size_t> sizes_;  // inputs, hidden..., 1
  Vector params_;
};

extern template class MlpNetwork<float>;
extern template class MlpNetwork<double>;

struct MlpFit {
  std::size_t epochs = 0;
  double final_loss = 0.0;
};

class MlpModel {
 public:
  MlpModel() = default;
  explicit MlpModel(MlpNetwork<float> net) : net_(std::move(net)) {}

  /// Adam over shuffled mini-batches of scaled features. Stops once the
  /// epoch loss fails to improve by `tolerance` for more than
  /// n_iter_no_change epochs, or at max_epochs.
  static MlpModel train(std::span<const dataset::LabeledVector> records, const MlpParams& params,
                        RandomSource& rng, MlpFit* fit = nullptr);

  std::uint8_t predict(dataset::FeatureView x) const;
  const MlpNetwork<float>& network() const { return net_; }

  void write(BlobWriter& out) const;
  static MlpModel read(BlobReader& in);

 private:
  MlpNetwork<float> net_;
};

}  // namespace fpe::ml
