#include "fpe/ml/decision_tree.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numeric>

namespace fpe::ml {

using dataset::kFeatureLength;

ColumnStore::ColumnStore(std::span<const dataset::LabeledVector> records)
    : rows_(records.size()), data_(records.size() * kFeatureLength), labels_(records.size()) {
  // Blocked transpose keeps both sides cache friendly.
  constexpr std::size_t kBlock = 64;
  for (std::size_t r0 = 0; r0 < rows_; r0 += kBlock) {
    const std::size_t r1 = std::min(rows_, r0 + kBlock);
    for (std::size_t f0 = 0; f0 < kFeatureLength; f0 += kBlock) {
      const std::size_t f1 = std::min(kFeatureLength, f0 + kBlock);
      for (std::size_t r = r0; r < r1; ++r) {
        const auto& x = records[r].features;
        for (std::size_t f = f0; f < f1; ++f) data_[f * rows_ + r] = x[f];
      }
    }
  }
  for (std::size_t r = 0; r < rows_; ++r) labels_[r] = records[r].label;
}

namespace {

double entropy2(double a, double b) {
  const double n = a + b;
  double h = 0.0;
  if (a > 0) h -= (a / n) * std::log2(a / n);
  if (b > 0) h -= (b / n) * std::log2(b / n);
  return h;
}

struct Split {
  double score = -1.0;
  std::uint16_t feature = TreeNode::kLeaf;
  std::uint8_t threshold = 0;
};

class Builder {
 public:
  Builder(const ColumnStore& data, const TreeParams& params, std::size_t mtry, RandomSource* rng)
      : data_(data), params_(params), mtry_(mtry), rng_(rng) {
    std::iota(order_.begin(), order_.end(), std::uint16_t{0});
  }

  std::vector<TreeNode> run(std::vector<std::uint32_t> samples) {
    idx_ = std::move(samples);
    nodes_.emplace_back();
    struct Task {
      std::uint32_t node;
      std::size_t lo, hi, depth;
    };
    std::vector<Task> stack{{0, 0, idx_.size(), 0}};
    const auto labels = data_.labels();
    while (!stack.empty()) {
      const Task t = stack.back();
      stack.pop_back();
      std::size_t c1 = 0;
      for (std::size_t i = t.lo; i < t.hi; ++i) c1 += labels[idx_[i]];
      const std::size_t n = t.hi - t.lo;
      const std::size_t c0 = n - c1;
      nodes_[t.node].label = c1 > c0 ? 1 : 0;
      if (c0 == 0 || c1 == 0 || n < params_.min_samples_split ||
          (params_.max_depth != 0 && t.depth >= params_.max_depth))
        continue;
      const Split best = find_split(t.lo, t.hi, c0, c1);
      if (best.feature == TreeNode::kLeaf) continue;

      const std::uint8_t* col = data_.column(best.feature);
      std::size_t i = t.lo, j = t.hi;
      while (i < j) {
        if (col[idx_[i]] <= best.threshold) {
          ++i;
        } else {
          --j;
          std::swap(idx_[i], idx_[j]);
        }
      }
      const auto left = static_cast<std::uint32_t>(nodes_.size());
      nodes_.emplace_back();
      nodes_.emplace_back();
      TreeNode& node = nodes_[t.node];
      node.feature = best.feature;
      node.threshold = best.threshold;
      node.left = left;
      node.right = left + 1;
      stack.push_back({left + 1, i, t.hi, t.depth + 1});
      stack.push_back({left, t.lo, i, t.depth + 1});
    }
    return std::move(nodes_);
  }

 private:
  Split find_split(std::size_t lo, std::size_t hi, std::size_t c0, std::size_t c1) {
    const auto labels = data_.labels();
    node_labels_.resize(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) node_labels_[i - lo] = labels[idx_[i]];

    Split best;
    if (mtry_ >= kFeatureLength) {
      for (std::size_t f = 0; f < kFeatureLength; ++f)
        score_feature(static_cast<std::uint16_t>(f), lo, hi, c0, c1, best);
      return best;
    }
    std::size_t scored = 0;
    for (std::size_t j = 0; j < kFeatureLength && scored < mtry_; ++j) {
      const std::size_t pick = j + static_cast<std::size_t>(rng_->uniform_below(kFeatureLength - j));
      std::swap(order_[j], order_[pick]);
      if (score_feature(order_[j], lo, hi, c0, c1, best)) ++scored;
    }
    return best;
  }

  // Returns false when the feature is constant over the node.
  bool score_feature(std::uint16_t f, std::size_t lo, std::size_t hi, std::size_t c0,
                     std::size_t c1, Split& best) {
    const std::uint8_t* col = data_.column(f);
    std::array<std::uint64_t, 4> seen{};
    for (std::size_t i = lo; i < hi; ++i) {
      const std::uint8_t v = col[idx_[i]];
      ++counts_[v][node_labels_[i - lo]];
      seen[v >> 6] |= std::uint64_t{1} << (v & 63);
    }
    const int distinct = std::popcount(seen[0]) + std::popcount(seen[1]) +
                         std::popcount(seen[2]) + std::popcount(seen[3]);
    const double n = static_cast<double>(hi - lo);
    const double parent_h =
        params_.criterion == SplitCriterion::GainRatio ? entropy2(double(c0), double(c1)) : 0.0;

    std::size_t l0 = 0, l1 = 0;
    int prev = -1;
    for (int w = 0; w < 4; ++w) {
      std::uint64_t bits = seen[w];
      while (bits != 0) {
        const int v = w * 64 + std::countr_zero(bits);
        bits &= bits - 1;
        if (prev >= 0) {
          const double a0 = double(l0), a1 = double(l1);
          const double b0 = double(c0 - l0), b1 = double(c1 - l1);
          const double nl = a0 + a1, nr = b0 + b1;
          double score;
          if (params_.criterion == SplitCriterion::Gini) {
            score = (a0 * a0 + a1 * a1) / nl + (b0 * b0 + b1 * b1) / nr;
          } else {
            const double gain = parent_h - (nl / n) * entropy2(a0, a1) - (nr / n) * entropy2(b0, b1);
            score = gain / entropy2(nl, nr);
          }
          if (score > best.score) {
            best.score = score;
            best.feature = f;
            best.threshold = static_cast<std::uint8_t>(prev);
          }
        }
        l0 += counts_[v][0];
        l1 += counts_[v][1];
        counts_[v] = {0, 0};
        prev = v;
      }
    }
    return distinct > 1;
  }

  const ColumnStore& data_;
  const TreeParams& params_;
  std::size_t mtry_;
  RandomSource* rng_;
  std::vector<std::uint32_t> idx_;
  std::vector<std::uint8_t> node_labels_;
  std::vector<TreeNode> nodes_;
  std::array<std::uint16_t, kFeatureLength> order_{};
  std::array<std::array<std::uint32_t, 2>, 256> counts_{};
};

}  // namespace

DecisionTree DecisionTree::grow(const ColumnStore& data, std::vector<std::uint32_t> samples,
                                const TreeParams& params, std::size_t features_per_split,
                                RandomSource* rng) {
  if (samples.empty()) throw Error(Errc::EmptyTrainingSet, "decision tree needs at least one sample");
  if (features_per_split < kFeatureLength && rng == nullptr)
    throw Error(Errc::InvalidHyperparams, "feature subsampling needs a random source");
  DecisionTree tree;
  tree.nodes_ = Builder(data, params, std::max<std::size_t>(features_per_split, 1), rng)
                    .run(std::move(samples));
  return tree;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::size_t DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    auto [n, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes_[n].is_leaf()) {
      stack.push_back({nodes_[n].left, d + 1});
      stack.push_back({nodes_[n].right, d + 1});
    }
  }
  return deepest;
}

void DecisionTree::write(BlobWriter& out) const {
  out.u32(static_cast<std::uint32_t>(nodes_.size()));
  for (const TreeNode& n : nodes_) {
    out.u16(n.feature);
    out.u8(n.threshold);
    out.u8(n.label);
    out.u32(n.left);
    out.u32(n.right);
  }
}

DecisionTree DecisionTree::read(BlobReader& in) {
  const std::uint32_t count = in.u32();
  if (count == 0 || count > in.remaining() / 12) throw Error(Errc::BadModel, "bad tree node count");
  DecisionTree tree;
  tree.nodes_.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    TreeNode& n = tree.nodes_[i];
    n.feature = in.u16();
    n.threshold = in.u8();
    n.label = in.u8();
    n.left = in.u32();
    n.right = in.u32();
    if (n.label > 1) throw Error(Errc::BadModel, "tree leaf label out of range");
    if (!n.is_leaf() && (n.feature >= kFeatureLength || n.left <= i || n.right <= i ||
                         n.left >= count || n.right >= count))
      throw Error(Errc::BadModel, "tree node links out of range");
  }
  return tree;
}

}  // namespace fpe::ml
