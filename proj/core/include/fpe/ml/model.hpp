#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "fpe/dataset/dataset.hpp"
#include "fpe/ml/decision_tree.hpp"
#include "fpe/ml/hyperparams.hpp"
#include "fpe/ml/knn.hpp"
#include "fpe/ml/linear.hpp"
#include "fpe/ml/mlp.hpp"

namespace fpe::ml {

/// Predicts one label for every input; used when training data has a
/// single class.
struct ConstantModel {
  std::uint8_t label = 0;
};

struct TrainingMeta {
  std::uint64_t seed = 0;
  std::uint64_t train_size = 0;
  std::uint64_t iterations = 0;  // epochs / optimizer iterations; 0 where not applicable
  double final_loss = 0.0;       // 0 where not applicable
};

class TrainedModel {
 public:
  using Params = std::variant<ConstantModel, DecisionTree, RandomForest, KnnModel, LinearModel, MlpModel>;

  TrainedModel(Algorithm algorithm, Params params, TrainingMeta meta)
      : algorithm_(algorithm), params_(std::move(params)), meta_(meta) {}

  Algorithm algorithm() const { return algorithm_; }
  const TrainingMeta& meta() const { return meta_; }
  const Params& params() const { return params_; }
  bool is_constant() const { return std::holds_alternative<ConstantModel>(params_); }

  std::uint8_t predict(dataset::FeatureView x) const;
  /// Elementwise equal to predict(); splits the batch over `threads`.
  std::vector<std::uint8_t> predict_batch(std::span<const dataset::LabeledVector> batch,
                                          std::size_t threads = 1) const;

 private:
  Algorithm algorithm_;
  Params params_;
  TrainingMeta meta_;
};

/// Deterministic in (hp, train_set, seed). A single-label training set
/// gives a constant model for every algorithm except the tree family and
/// k-NN, which reach the same behaviour naturally.
/// Throws Error{EmptyTrainingSet} or Error{InvalidHyperparams}.
TrainedModel train(const Hyperparams& hp, std::span<const dataset::LabeledVector> train_set,
                   std::uint64_t seed);
inline TrainedModel train(const Hyperparams& hp, const dataset::Dataset& train_set, std::uint64_t seed) {
  return train(hp, std::span<const dataset::LabeledVector>(train_set.records), seed);
}

/// "FPM1" | u32 version | u8 algorithm | u8 kind | meta | parameter blob.
Bytes serialize_model(const TrainedModel& model);
TrainedModel deserialize_model(ByteView bytes);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace fpe::ml
