#include "fpe/ml/model.hpp"

#include <algorithm>
#include <thread>

#include "fpe/error.hpp"

namespace fpe::ml {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::uint8_t TrainedModel::predict(dataset::FeatureView x) const {
  return std::visit(Overloaded{[](const ConstantModel& m) { return m.label; },
                               [&](const auto& m) { return m.predict(x); }},
                    params_);
}

std::vector<std::uint8_t> TrainedModel::predict_batch(std::span<const dataset::LabeledVector> batch,
                                                      std::size_t threads) const {
  std::vector<std::uint8_t> out(batch.size());
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(batch.size(), 1));
  auto run = [&](std::size_t lo, std::size_t hi) {
    if (const auto* knn = std::get_if<KnnModel>(&params_)) {
      const auto labels = knn->predict_batch(batch.subspan(lo, hi - lo));
      std::copy(labels.begin(), labels.end(), out.begin() + static_cast<std::ptrdiff_t>(lo));
      return;
    }
    for (std::size_t i = lo; i < hi; ++i) out[i] = predict(batch[i].features);
  };
  if (threads == 1) {
    run(0, batch.size());
    return out;
  }
  std::vector<std::thread> pool;
  const std::size_t per = (batch.size() + threads - 1) / threads;
  for (std::size_t lo = 0; lo < batch.size(); lo += per)
    pool.emplace_back(run, lo, std::min(batch.size(), lo + per));
  for (auto& t : pool) t.join();
  return out;
}

TrainedModel train(const Hyperparams& hp, std::span<const dataset::LabeledVector> train_set,
                   std::uint64_t seed) {
  if (train_set.empty()) throw Error(Errc::EmptyTrainingSet, "training set is empty");
  hp.validate(train_set.size());
  TrainingMeta meta{seed, train_set.size(), 0, 0.0};
  std::size_t positives = 0;
  for (const auto& r : train_set) positives += r.label;
  const bool single_class = positives == 0 || positives == train_set.size();

  switch (hp.algorithm) {
    case Algorithm::DecisionTree: {
      ColumnStore data(train_set);
      std::vector<std::uint32_t> all(train_set.size());
      for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
      return {hp.algorithm,
              DecisionTree::grow(data, std::move(all), hp.tree, dataset::kFeatureLength, nullptr), meta};
    }
    case Algorithm::RandomForest:
      return {hp.algorithm, RandomForest::grow(train_set, hp.forest, seed, hp.threads), meta};
    case Algorithm::Knn: {
      const std::size_t k = hp.knn.k != 0 ? hp.knn.k : choose_k(train_set.size(), hp.knn.rounding);
      return {hp.algorithm, KnnModel(train_set, k), meta};
    }
    default:
      break;
  }

  if (single_class) return {hp.algorithm, ConstantModel{static_cast<std::uint8_t>(positives != 0)}, meta};

  switch (hp.algorithm) {
    case Algorithm::LogisticRegression: {
      LinearFit fit;
      LinearModel m = train_logistic(train_set, hp.logistic, &fit);
      meta.iterations = fit.iterations;
      meta.final_loss = fit.final_loss;
      return {hp.algorithm, std::move(m), meta};
    }
    case Algorithm::LinearSvmSgd: {
      Prng rng(seed);
      LinearFit fit;
      LinearModel m = train_linear_svm(train_set, hp.svm, rng, &fit);
      meta.iterations = fit.iterations;
      meta.final_loss = fit.final_loss;
      return {hp.algorithm, std::move(m), meta};
    }
    case Algorithm::Mlp: {
      Prng rng(seed);
      MlpFit fit;
      MlpModel m = MlpModel::train(train_set, hp.mlp, rng, &fit);
      meta.iterations = fit.epochs;
      meta.final_loss = fit.final_loss;
      return {hp.algorithm, std::move(m), meta};
    }
    default:
      throw Error(Errc::InvalidHyperparams, "unknown algorithm");
  }
}

}  // namespace fpe::ml
