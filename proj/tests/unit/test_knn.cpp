#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "fpe/ml/knn.hpp"
#include "toy_data.hpp"

using namespace fpe;
using namespace fpe::ml;
using fpe::dataset::LabeledVector;
using testing_support::noise;

namespace {

// Independent O(n^2) oracle: double distances, stable sort keeps the lower
// training index first on ties.
std::uint8_t oracle(const std::vector<LabeledVector>& train, const LabeledVector& q, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < train.size(); ++i) {
    double s = 0;
    for (std::size_t f = 0; f < dataset::kFeatureLength; ++f) {
      const double diff = double(train[i].features[f]) - double(q.features[f]);
      s += diff * diff;
    }
    d.emplace_back(s, i);
  }
  std::stable_sort(d.begin(), d.end(), [](auto& a, auto& b) { return a.first < b.first; });
  std::size_t ones = 0;
  for (std::size_t j = 0; j < k; ++j) ones += train[d[j].second].label;
  return 2 * ones > k ? 1 : 0;
}

// Few distinct byte values so exact distance ties are common.
std::vector<LabeledVector> coarse(std::size_t n, std::uint64_t seed) {
  Prng rng(seed);
  std::vector<LabeledVector> out(n);
  for (auto& r : out) {
    for (std::size_t f = 0; f < 6; ++f) r.features[f] = static_cast<std::uint8_t>(rng.uniform_below(3) * 10);
    r.label = static_cast<std::uint8_t>(rng.uniform_below(2));
    r.original_length = 6;
  }
  return out;
}

}  // namespace

TEST(Knn, MatchesBruteForceOracle) {
  for (std::uint64_t seed : {1u, 2u}) {
    const auto train = noise(400, seed);
    const auto queries = noise(100, seed + 50);
    for (std::size_t k : {1u, 4u, 7u, 20u}) {
      KnnModel m(train, k);
      const auto batch = m.predict_batch(queries);
      for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto want = oracle(train, queries[i], k);
        ASSERT_EQ(m.predict(queries[i].features), want);
        ASSERT_EQ(batch[i], want);
      }
    }
  }
}

TEST(Knn, TiesBreakOnLowerIndex) {
  const auto train = coarse(500, 3);
  const auto queries = coarse(200, 4);
  for (std::size_t k : {1u, 2u, 5u, 22u}) {
    KnnModel m(train, k);
    const auto batch = m.predict_batch(queries);
    for (std::size_t i = 0; i < queries.size(); ++i) {
      const auto want = oracle(train, queries[i], k);
      ASSERT_EQ(m.predict(queries[i].features), want) << k;
      ASSERT_EQ(batch[i], want) << k;
    }
  }
}

TEST(Knn, NeighboursNearestFirst) {
  std::vector<LabeledVector> train(4);
  for (int i = 0; i < 4; ++i) train[i].features[0] = static_cast<std::uint8_t>(40 - 10 * i);
  train[3].features[0] = 30;  // same distance as index 1
  KnnModel m(train, 3);
  LabeledVector q;
  q.features[0] = 29;
  EXPECT_EQ(m.neighbours(q.features), (std::vector<std::uint32_t>{1, 3, 2}));
}

TEST(Knn, SelfLabelWithKOne) {
  const auto train = noise(300, 5, 100);
  KnnModel m(train, 1);
  for (const auto& r : train) ASSERT_EQ(m.predict(r.features), r.label);
}

TEST(Knn, EvenVoteIsZero) {
  std::vector<LabeledVector> train(2);
  train[0].features[0] = 1;
  train[1].label = 1;
  KnnModel m(train, 2);
  EXPECT_EQ(m.predict(train[1].features), 0);
}

TEST(Knn, BatchHandlesFullRangeBytes) {
  // All-255 against all-0 vectors: the largest possible distances.
  std::vector<LabeledVector> train(3);
  train[0].features.fill(255);
  train[0].label = 1;
  train[1].features.fill(254);
  train[1].label = 1;
  train[2].label = 0;
  KnnModel m(train, 1);
  std::vector<LabeledVector> q(2);
  q[0].features.fill(200);
  q[1].features.fill(100);
  const auto b = m.predict_batch(q);
  EXPECT_EQ(b[0], m.predict(q[0].features));
  EXPECT_EQ(b[1], m.predict(q[1].features));
  EXPECT_EQ(b[0], 1);
  EXPECT_EQ(b[1], 0);
}

TEST(Knn, BlobRoundTrip) {
  const auto train = noise(50, 6, 40);
  KnnModel m(train, 5);
  Bytes blob;
  BlobWriter w(blob);
  m.write(w);
  BlobReader r(blob);
  const auto back = KnnModel::read(r);
  EXPECT_EQ(back.k(), 5u);
  EXPECT_EQ(back.size(), 50u);
  for (const auto& q : noise(100, 7, 40)) EXPECT_EQ(back.predict(q.features), m.predict(q.features));
}
