#include "fpe/ml/knn.hpp"

#include <Eigen/Dense>
#include <algorithm>

#include "fpe/error.hpp"

namespace fpe::ml {

using dataset::kFeatureLength;

namespace {

// 250 * 255^2 < 2^24, so float GEMM partial sums over one chunk are exact.
constexpr std::size_t kChunk = 250;
constexpr std::size_t kQueryBlock = 128;

std::uint64_t squared_norm(const std::uint8_t* x) {
  std::uint64_t s = 0;
  for (std::size_t f = 0; f < kFeatureLength; ++f) s += std::uint32_t{x[f]} * x[f];
  return s;
}

using Scored = std::vector<std::pair<std::uint64_t, std::uint32_t>>;

}  // namespace

KnnModel::KnnModel(std::span<const dataset::LabeledVector> train, std::size_t k) : k_(k) {
  if (train.empty()) throw Error(Errc::EmptyTrainingSet, "k-NN needs at least one sample");
  if (k == 0 || k > train.size()) throw Error(Errc::InvalidHyperparams, "k must be in [1, |train|]");
  rows_.resize(train.size() * kFeatureLength);
  labels_.resize(train.size());
  norms_.resize(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    std::copy(train[i].features.begin(), train[i].features.end(), rows_.begin() + i * kFeatureLength);
    labels_[i] = train[i].label;
    norms_[i] = squared_norm(train[i].features.data());
  }
}

std::uint8_t KnnModel::vote(Scored& scored) const {
  auto kth = scored.begin() + static_cast<std::ptrdiff_t>(k_);
  if (kth != scored.end()) std::nth_element(scored.begin(), kth - 1, scored.end());
  std::size_t ones = 0;
  for (auto it = scored.begin(); it != kth; ++it) ones += labels_[it->second];
  return 2 * ones > k_ ? 1 : 0;
}

std::uint8_t KnnModel::predict(dataset::FeatureView x) const {
  Scored scored(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const std::uint8_t* t = rows_.data() + i * kFeatureLength;
    std::uint64_t d = 0;
    for (std::size_t f = 0; f < kFeatureLength; ++f) {
      const int diff = int{x[f]} - int{t[f]};
      d += static_cast<std::uint32_t>(diff * diff);
    }
    scored[i] = {d, static_cast<std::uint32_t>(i)};
  }
  return vote(scored);
}

std::vector<std::uint32_t> KnnModel::neighbours(dataset::FeatureView x) const {
  Scored scored(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const std::uint8_t* t = rows_.data() + i * kFeatureLength;
    std::uint64_t d = 0;
    for (std::size_t f = 0; f < kFeatureLength; ++f) {
      const int diff = int{x[f]} - int{t[f]};
      d += static_cast<std::uint32_t>(diff * diff);
    }
    scored[i] = {d, static_cast<std::uint32_t>(i)};
  }
  const auto kth = scored.begin() + static_cast<std::ptrdiff_t>(k_);
  std::partial_sort(scored.begin(), kth, scored.end());
  std::vector<std::uint32_t> out;
  for (auto it = scored.begin(); it != kth; ++it) out.push_back(it->second);
  return out;
}

std::vector<std::uint8_t> KnnModel::predict_batch(std::span<const dataset::LabeledVector> queries) const {
  using MatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const std::size_t n = labels_.size();
  std::vector<std::uint8_t> out(queries.size());
  if (queries.empty()) return out;

  const MatrixF train =
      Eigen::Map<const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          rows_.data(), static_cast<Eigen::Index>(n), kFeatureLength)
          .cast<float>();

  MatrixF q(kQueryBlock, kFeatureLength);
  Eigen::MatrixXf partial(kQueryBlock, n);
  Eigen::MatrixXd dot(kQueryBlock, n);
  Scored scored(n);
  for (std::size_t q0 = 0; q0 < queries.size(); q0 += kQueryBlock) {
    const std::size_t rows = std::min(kQueryBlock, queries.size() - q0);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t f = 0; f < kFeatureLength; ++f) q(r, f) = queries[q0 + r].features[f];
    const auto qb = q.topRows(rows);
    auto pb = partial.topRows(rows);
    auto db = dot.topRows(rows);
    db.setZero();
    for (std::size_t c = 0; c < kFeatureLength; c += kChunk) {
      pb.noalias() = qb.middleCols(c, kChunk) * train.middleCols(c, kChunk).transpose();
      db += pb.cast<double>();
    }
    for (std::size_t r = 0; r < rows; ++r) {
      const std::uint64_t qn = squared_norm(queries[q0 + r].features.data());
      for (std::size_t i = 0; i < n; ++i) {
        const auto twice = static_cast<std::uint64_t>(db(r, i)) * 2;
        scored[i] = {qn + norms_[i] - twice, static_cast<std::uint32_t>(i)};
      }
      out[q0 + r] = vote(scored);
    }
  }
  return out;
}

void KnnModel::write(BlobWriter& out) const {
  out.u32(static_cast<std::uint32_t>(k_));
  out.u32(static_cast<std::uint32_t>(labels_.size()));
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    out.u8(labels_[i]);
    out.bytes(ByteView(rows_).subspan(i * kFeatureLength, kFeatureLength));
  }
}

KnnModel KnnModel::read(BlobReader& in) {
  KnnModel m;
  m.k_ = in.u32();
  const std::uint32_t n = in.u32();
  if (n == 0 || m.k_ == 0 || m.k_ > n || n > in.remaining() / (kFeatureLength + 1))
    throw Error(Errc::BadModel, "bad k-NN header");
  m.rows_.resize(std::size_t{n} * kFeatureLength);
  m.labels_.resize(n);
  m.norms_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.labels_[i] = in.u8();
    if (m.labels_[i] > 1) throw Error(Errc::BadModel, "k-NN label out of range");
    const ByteView row = in.take(kFeatureLength);
    std::copy(row.begin(), row.end(), m.rows_.begin() + i * kFeatureLength);
    m.norms_[i] = squared_norm(row.data());
  }
  return m;
}

}  // namespace fpe::ml
