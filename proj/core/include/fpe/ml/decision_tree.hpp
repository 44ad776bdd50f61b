#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "fpe/dataset/dataset.hpp"
#include "fpe/ml/blob.hpp"
#include "fpe/ml/hyperparams.hpp"
#include "fpe/random.hpp"

namespace fpe::ml {

/// Training vectors stored feature-major, so split search walks one
/// contiguous column per candidate feature.
class ColumnStore {
 public:
  explicit ColumnStore(std::span<const dataset::LabeledVector> records);

  std::size_t rows() const { return rows_; }
  const std::uint8_t* column(std::size_t feature) const { return data_.data() + feature * rows_; }
  std::span<const std::uint8_t> labels() const { return labels_; }

 private:
  std::size_t rows_ = 0;
  std::vector<std::uint8_t> data_;
  std::vector<std::uint8_t> labels_;
};

struct TreeNode {
  static constexpr std::uint16_t kLeaf = std::numeric_limits<std::uint16_t>::max();

  std::uint32_t left = 0;
  std::uint32_t right = 0;
  std::uint16_t feature = kLeaf;
  std::uint8_t threshold = 0;  // go left when x[feature] <= threshold
  std::uint8_t label = 0;

  bool is_leaf() const { return feature == kLeaf; }
  bool operator==(const TreeNode&) const = default;
};

/// Binary CART tree over byte features with "x[f] <= t" splits. Leaves
/// predict their majority label; ties go to label 0.
class DecisionTree {
 public:
  DecisionTree() = default;

  /// Grows a tree on the rows listed in `samples` (duplicates allowed, as in
  /// a bootstrap resample). features_per_split >= 1500 evaluates every
  /// feature in index order; otherwise candidates are drawn from `rng`
  /// until that many non-constant features have been scored.
  static DecisionTree grow(const ColumnStore& data, std::vector<std::uint32_t> samples,
                           const TreeParams& params, std::size_t features_per_split,
                           RandomSource* rng);

  std::uint8_t predict(dataset::FeatureView x) const {
    std::uint32_t n = 0;
    while (!nodes_[n].is_leaf()) {
      const TreeNode& node = nodes_[n];
      n = x[node.feature] <= node.threshold ? node.left : node.right;
    }
    return nodes_[n].label;
  }

  std::span<const TreeNode> nodes() const { return nodes_; }
  std::size_t leaf_count() const;
  std::size_t depth() const;

  void write(BlobWriter& out) const;
  static DecisionTree read(BlobReader& in);

  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
};

class RandomForest {
 public:
  RandomForest() = default;

  /// Trees are seeded from `seed` in index order, so the result does not
  /// depend on `threads`.
  static RandomForest grow(std::span<const dataset::LabeledVector> records, const ForestParams& params,
                           std::uint64_t seed, std::size_t threads);

  /// Majority vote; an even split goes to label 0.
  std::uint8_t predict(dataset::FeatureView x) const;

  std::span<const DecisionTree> trees() const { return trees_; }

  void write(BlobWriter& out) const;
  static RandomForest read(BlobReader& in);

 private:
  std::vector<DecisionTree> trees_;
};

}  // namespace fpe::ml
