#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fpe/dataset/dataset.hpp"
#include "fpe/ml/blob.hpp"

namespace fpe::ml {

/// k-nearest-neighbour vote under Euclidean distance on raw byte values.
/// Distances are exact integers; equal distances rank the lower training
/// index first and an even vote goes to label 0.
class KnnModel {
 public:
  KnnModel() = default;
  KnnModel(std::span<const dataset::LabeledVector> train, std::size_t k);

  std::uint8_t predict(dataset::FeatureView x) const;
  /// Same labels as predict(); distances come from blocked float GEMMs that
  /// stay exact because each partial dot product is below 2^24.
  std::vector<std::uint8_t> predict_batch(std::span<const dataset::LabeledVector> queries) const;

  /// Training indices of the k nearest neighbours, nearest first.
  std::vector<std::uint32_t> neighbours(dataset::FeatureView x) const;

  std::size_t k() const { return k_; }
  std::size_t size() const { return labels_.size(); }

  void write(BlobWriter& out) const;
  static KnnModel read(BlobReader& in);

 private:
  std::uint8_t vote(std::vector<std::pair<std::uint64_t, std::uint32_t>>& scored) const;

  std::size_t k_ = 1;
  std::vector<std::uint8_t> rows_;  // size() x 1500, row-major
  std::vector<std::uint8_t> labels_;
  std::vector<std::uint64_t> norms_;  // squared L2 norm per row
};

}  // namespace fpe::ml
