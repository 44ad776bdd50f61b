#include "fpe/ml/mlp.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "fpe/error.hpp"

namespace fpe::ml {

using dataset::kFeatureLength;

namespace {

std::size_t parameter_count(const std::vector<std::size_t>& sizes) {
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) total += sizes[l + 1] * sizes[l] + sizes[l + 1];
  return total;
}

}  // namespace

template <typename Scalar>
MlpNetwork<Scalar>::MlpNetwork(std::size_t inputs, const std::vector<std::size_t>& hidden,
                               RandomSource& rng) {
  sizes_.push_back(inputs);
  sizes_.insert(sizes_.end(), hidden.begin(), hidden.end());
  sizes_.push_back(1);
  params_.resize(static_cast<Eigen::Index>(parameter_count(sizes_)));
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const double bound = std::sqrt(6.0 / static_cast<double>(sizes_[l] + sizes_[l + 1]));
    const std::size_t count = sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
    for (std::size_t i = 0; i < count; ++i)
      params_[pos++] = static_cast<Scalar>((2.0 * rng.uniform01() - 1.0) * bound);
  }
}

template <typename Scalar>
MlpNetwork<Scalar>::MlpNetwork(std::vector<std::size_t> layer_sizes, Vector params)
    : sizes_(std::move(layer_sizes)), params_(std::move(params)) {
  if (sizes_.size() < 2 || sizes_.back() != 1 ||
      static_cast<std::size_t>(params_.size()) != parameter_count(sizes_))
    throw Error(Errc::BadModel, "MLP layout does not match parameter count");
}

template <typename Scalar>
std::size_t MlpNetwork<Scalar>::layer_offset(std::size_t layer) const {
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer; ++l) off += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
  return off;
}

template <typename Scalar>
typename MlpNetwork<Scalar>::Vector MlpNetwork<Scalar>::logits(const Matrix& X) const {
  Matrix a = X;
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const auto out = static_cast<Eigen::Index>(sizes_[l + 1]);
    const auto in = static_cast<Eigen::Index>(sizes_[l]);
    Eigen::Map<const Matrix> W(params_.data() + off, out, in);
    Eigen::Map<const Vector> b(params_.data() + off + out * in, out);
    off += static_cast<std::size_t>(out * in + out);
    Matrix z = W * a;
    z.colwise() += b;
    if (l + 2 < sizes_.size()) z = z.cwiseMax(Scalar(0));
    a = std::move(z);
  }
  return a.row(0).transpose();
}

template <typename Scalar>
Scalar MlpNetwork<Scalar>::logit(const Vector& x) const {
  Vector a = x;
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const auto out = static_cast<Eigen::Index>(sizes_[l + 1]);
    const auto in = static_cast<Eigen::Index>(sizes_[l]);
    Eigen::Map<const Matrix> W(params_.data() + off, out, in);
    Eigen::Map<const Vector> b(params_.data() + off + out * in, out);
    off += static_cast<std::size_t>(out * in + out);
    Vector z = W * a + b;
    if (l + 2 < sizes_.size()) z = z.cwiseMax(Scalar(0));
    a = std::move(z);
  }
  return a[0];
}

template <typename Scalar>
Scalar MlpNetwork<Scalar>::loss(const Matrix& X, const Vector& y, Scalar alpha, Vector* grad) const {
  const std::size_t layers = sizes_.size() - 1;
  const auto batch = X.cols();
  const Scalar inv_b = Scalar(1) / static_cast<Scalar>(batch);
  std::vector<Matrix> acts{X};  // acts[l] = input of layer l
  std::vector<std::size_t> offsets(layers);
  Scalar penalty = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offsets[l] = layer_offset(l);
    const auto out = static_cast<Eigen::Index>(sizes_[l + 1]);
    const auto in = static_cast<Eigen::Index>(sizes_[l]);
    Eigen::Map<const Matrix> W(params_.data() + offsets[l], out, in);
    Eigen::Map<const Vector> b(params_.data() + offsets[l] + out * in, out);
    penalty += W.squaredNorm();
    Matrix z = W * acts.back();
    z.colwise() += b;
    if (l + 1 < layers) z = z.cwiseMax(Scalar(0));
    acts.push_back(std::move(z));
  }
  const auto z = acts.back().row(0);
  Scalar total = 0;
  Matrix delta(1, batch);
  for (Eigen::Index i = 0; i < batch; ++i) {
    const Scalar t = z[i];
    // softplus(t) - y t
    const Scalar sp = t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
    total += sp - y[i] * t;
    const Scalar sig = t >= 0 ? Scalar(1) / (Scalar(1) + std::exp(-t)) : std::exp(t) / (Scalar(1) + std::exp(t));
    delta(0, i) = (sig - y[i]) * inv_b;
  }
  const Scalar value = total * inv_b + Scalar(0.5) * alpha * inv_b * penalty;
  if (grad == nullptr) return value;

  grad->resize(params_.size());
  for (std::size_t l = layers; l-- > 0;) {
    const auto out = static_cast<Eigen::Index>(sizes_[l + 1]);
    const auto in = static_cast<Eigen::Index>(sizes_[l]);
    Eigen::Map<const Matrix> W(params_.data() + offsets[l], out, in);
    Eigen::Map<Matrix> dW(grad->data() + offsets[l], out, in);
    Eigen::Map<Vector> db(grad->data() + offsets[l] + out * in, out);
    dW.noalias() = delta * acts[l].transpose();
    dW += alpha * inv_b * W;
    db = delta.rowwise().sum();
    if (l > 0) {
      Matrix prev = W.transpose() * delta;
      prev = prev.cwiseProduct((acts[l].array() > Scalar(0)).template cast<Scalar>().matrix());
      delta = std::move(prev);
    }
  }
  return value;
}

template class MlpNetwork<float>;
template class MlpNetwork<double>;

MlpModel MlpModel::train(std::span<const dataset::LabeledVector> records, const MlpParams& params,
                         RandomSource& rng, MlpFit* fit) {
  using Matrix = MlpNetwork<float>::Matrix;
  using Vector = MlpNetwork<float>::Vector;
  if (records.empty()) throw Error(Errc::EmptyTrainingSet, "MLP needs samples");
  const std::size_t n = records.size();
  MlpNetwork<float> net(kFeatureLength, params.hidden_sizes, rng);

  Matrix all(kFeatureLength, static_cast<Eigen::Index>(n));
  Vector labels(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < kFeatureLength; ++f)
      all(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(i)) = records[i].features[f] / 255.0f;
    labels[static_cast<Eigen::Index>(i)] = records[i].label;
  }

  Vector& theta = net.params();
  Vector m = Vector::Zero(theta.size()), v = Vector::Zero(theta.size()), grad;
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  const std::size_t batch = std::min(params.batch_size, n);
  Matrix X(kFeatureLength, static_cast<Eigen::Index>(batch));
  Vector y(static_cast<Eigen::Index>(batch));

  double best = std::numeric_limits<double>::infinity();
  double epoch_loss = 0.0;
  std::size_t stale = 0, step = 0, epoch = 0;
  while (epoch < params.max_epochs) {
    ++epoch;
    shuffle(std::span(order), rng);
    epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const auto cols = static_cast<Eigen::Index>(std::min(batch, n - start));
      if (X.cols() != cols) {
        X.resize(Eigen::NoChange, cols);
        y.resize(cols);
      }
      for (Eigen::Index c = 0; c < cols; ++c) {
        X.col(c) = all.col(order[start + static_cast<std::size_t>(c)]);
        y[c] = labels[order[start + static_cast<std::size_t>(c)]];
      }
      const float l = net.loss(X, y, static_cast<float>(params.alpha), &grad);
      epoch_loss += static_cast<double>(l) * static_cast<double>(cols);
      ++step;
      const double lr = params.learning_rate * std::sqrt(1.0 - std::pow(params.beta2, double(step))) /
                        (1.0 - std::pow(params.beta1, double(step)));
      m = float(params.beta1) * m + float(1.0 - params.beta1) * grad;
      v = float(params.beta2) * v + float(1.0 - params.beta2) * grad.cwiseAbs2();
      theta.array() -= float(lr) * m.array() / (v.array().sqrt() + float(params.epsilon));
      if (batch != static_cast<std::size_t>(cols)) {
        X.resize(Eigen::NoChange, static_cast<Eigen::Index>(batch));
        y.resize(static_cast<Eigen::Index>(batch));
      }
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) throw Error(Errc::InvalidHyperparams, "MLP training diverged");
    if (epoch_loss > best - params.tolerance) {
      ++stale;
    } else {
      stale = 0;
    }
    best = std::min(best, epoch_loss);
    if (stale > params.n_iter_no_change) break;
  }
  if (fit != nullptr) *fit = {epoch, epoch_loss};
  return MlpModel(std::move(net));
}

std::uint8_t MlpModel::predict(dataset::FeatureView x) const {
  MlpNetwork<float>::Vector v(static_cast<Eigen::Index>(kFeatureLength));
  for (std::size_t f = 0; f < kFeatureLength; ++f) v[static_cast<Eigen::Index>(f)] = x[f] / 255.0f;
  return net_.logit(v) >= 0.0f ? 1 : 0;
}

void MlpModel::write(BlobWriter& out) const {
  const auto& sizes = net_.layer_sizes();
  out.u32(static_cast<std::uint32_t>(sizes.size()));
  for (std::size_t s : sizes) out.u32(static_cast<std::uint32_t>(s));
  const auto& p = net_.params();
  for (Eigen::Index i = 0; i < p.size(); ++i) out.f32(p[i]);
}

MlpModel MlpModel::read(BlobReader& in) {
  const std::uint32_t layers = in.u32();
  if (layers < 2 || layers > 64) throw Error(Errc::BadModel, "bad MLP layer count");
  std::vector<std::size_t> sizes(layers);
  for (auto& s : sizes) {
    s = in.u32();
    if (s == 0 || s > 1u << 16) throw Error(Errc::BadModel, "bad MLP layer size");
  }
  if (sizes.front() != kFeatureLength) throw Error(Errc::BadModel, "MLP input width mismatch");
  const std::size_t count = parameter_count(sizes);
  if (count > in.remaining() / 4) throw Error(Errc::BadModel, "MLP parameters truncated");
  MlpNetwork<float>::Vector p(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) p[static_cast<Eigen::Index>(i)] = in.f32();
  if (!p.allFinite()) throw Error(Errc::BadModel, "non-finite MLP parameters");
  return MlpModel(MlpNetwork<float>(std::move(sizes), std::move(p)));
}

}  // namespace fpe::ml
