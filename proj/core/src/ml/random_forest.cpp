#include <algorithm>
#include <atomic>
#include <numeric>
#include <thread>

#include "fpe/ml/decision_tree.hpp"

namespace fpe::ml {

RandomForest RandomForest::grow(std::span<const dataset::LabeledVector> records,
                                const ForestParams& params, std::uint64_t seed, std::size_t threads) {
  if (records.empty()) throw Error(Errc::EmptyTrainingSet, "random forest needs at least one sample");
  if (params.tree_count == 0) throw Error(Errc::InvalidHyperparams, "tree_count must be >= 1");
  const ColumnStore data(records);
  const std::size_t n = records.size();

  std::vector<std::uint64_t> tree_seeds(params.tree_count);
  Prng seeder(seed);
  for (auto& s : tree_seeds) s = seeder.next_u64();

  RandomForest forest;
  forest.trees_.resize(params.tree_count);
  auto grow_one = [&](std::size_t t) {
    Prng rng(tree_seeds[t]);
    std::vector<std::uint32_t> samples(n);
    if (params.bootstrap) {
      for (auto& s : samples) s = static_cast<std::uint32_t>(rng.uniform_below(n));
      std::sort(samples.begin(), samples.end());
    } else {
      std::iota(samples.begin(), samples.end(), 0u);
    }
    forest.trees_[t] =
        DecisionTree::grow(data, std::move(samples), params.tree, params.features_per_split, &rng);
  };

  threads = std::clamp<std::size_t>(threads, 1, params.tree_count);
  if (threads == 1) {
    for (std::size_t t = 0; t < params.tree_count; ++t) grow_one(t);
    return forest;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t t; (t = next.fetch_add(1)) < params.tree_count;) grow_one(t);
      } catch (...) {
        errors[w] = std::current_exception();
        next = params.tree_count;
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return forest;
}

std::uint8_t RandomForest::predict(dataset::FeatureView x) const {
  std::size_t ones = 0;
  for (const DecisionTree& t : trees_) ones += t.predict(x);
  return 2 * ones > trees_.size() ? 1 : 0;
}

void RandomForest::write(BlobWriter& out) const {
  out.u32(static_cast<std::uint32_t>(trees_.size()));
  for (const auto& t : trees_) t.write(out);
}

RandomForest RandomForest::read(BlobReader& in) {
  const std::uint32_t count = in.u32();
  if (count == 0 || count > in.remaining()) throw Error(Errc::BadModel, "bad tree count");
  RandomForest forest;
  forest.trees_.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) forest.trees_.push_back(DecisionTree::read(in));
  return forest;
}

}  // namespace fpe::ml
