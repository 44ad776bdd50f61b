#include <cmath>
#include <deque>
#include <limits>

#include "fpe/error.hpp"
#include "fpe/ml/linear.hpp"

namespace fpe::ml {

using dataset::kFeatureLength;

Eigen::VectorXd scaled_features(dataset::FeatureView x) {
  Eigen::VectorXd v(kFeatureLength);
  for (std::size_t f = 0; f < kFeatureLength; ++f) v[f] = x[f] / 255.0;
  return v;
}

Eigen::MatrixXd scaled_matrix(std::span<const dataset::LabeledVector> records) {
  Eigen::MatrixXd X(records.size(), kFeatureLength);
  for (std::size_t i = 0; i < records.size(); ++i)
    for (std::size_t f = 0; f < kFeatureLength; ++f) X(i, f) = records[i].features[f] / 255.0;
  return X;
}

double LinearModel::decision(dataset::FeatureView x) const {
  double s = 0.0;
  for (std::size_t f = 0; f < kFeatureLength; ++f) s += w_[f] * x[f];
  return s / 255.0 + b_;
}

void LinearModel::write(BlobWriter& out) const {
  out.u32(static_cast<std::uint32_t>(w_.size()));
  for (Eigen::Index i = 0; i < w_.size(); ++i) out.f64(w_[i]);
  out.f64(b_);
}

LinearModel LinearModel::read(BlobReader& in) {
  if (in.u32() != kFeatureLength) throw Error(Errc::BadModel, "linear model width mismatch");
  Eigen::VectorXd w(kFeatureLength);
  for (std::size_t i = 0; i < kFeatureLength; ++i) w[i] = in.f64();
  const double b = in.f64();
  if (!w.allFinite() || !std::isfinite(b)) throw Error(Errc::BadModel, "non-finite linear weights");
  return LinearModel(std::move(w), b);
}

namespace {

// log(1 + exp(t)) without overflow.
double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

double logistic_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double l2,
                          const Eigen::VectorXd& theta, Eigen::VectorXd* grad) {
  const Eigen::Index n = X.rows(), d = X.cols();
  const auto w = theta.head(d);
  const double b = theta[d];
  const Eigen::VectorXd z = (X * w).array() + b;
  double loss = 0.0;
  Eigen::VectorXd r(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = y[i] > 0.5 ? 1.0 : -1.0;
    loss += softplus(-s * z[i]);
    r[i] = sigmoid(z[i]) - (y[i] > 0.5 ? 1.0 : 0.0);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  loss = loss * inv_n + 0.5 * l2 * inv_n * w.squaredNorm();
  if (grad != nullptr) {
    grad->resize(d + 1);
    grad->head(d).noalias() = X.transpose() * r;
    grad->head(d) = grad->head(d) * inv_n + l2 * inv_n * w;
    (*grad)[d] = r.sum() * inv_n;
  }
  return loss;
}

LinearModel train_logistic(std::span<const dataset::LabeledVector> records, const LogisticParams& params,
                           LinearFit* fit) {
  if (records.empty()) throw Error(Errc::EmptyTrainingSet, "logistic regression needs samples");
  const Eigen::MatrixXd X = scaled_matrix(records);
  Eigen::VectorXd y(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) y[i] = records[i].label;

  const Eigen::Index dim = kFeatureLength + 1;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd g;
  double f = logistic_objective(X, y, params.l2, theta, &g);

  struct Pair {
    Eigen::VectorXd s, y;
    double rho;
  };
  std::deque<Pair> history;
  std::size_t it = 0;
  while (it < params.max_iterations) {
    ++it;
    // Two-loop recursion for the search direction.
    Eigen::VectorXd q = g;
    std::vector<double> alpha(history.size());
    for (std::size_t j = history.size(); j-- > 0;) {
      alpha[j] = history[j].rho * history[j].s.dot(q);
      q -= alpha[j] * history[j].y;
    }
    if (!history.empty()) q *= history.back().s.dot(history.back().y) / history.back().y.squaredNorm();
    for (std::size_t j = 0; j < history.size(); ++j) {
      const double beta = history[j].rho * history[j].y.dot(q);
      q += (alpha[j] - beta) * history[j].s;
    }
    Eigen::VectorXd dir = -q;
    double slope = g.dot(dir);
    if (!(slope < 0)) {
      history.clear();
      dir = -g;
      slope = -g.squaredNorm();
    }
    if (slope == 0) break;

    // Armijo backtracking.
    double step = history.empty() ? std::min(1.0, 1.0 / g.lpNorm<Eigen::Infinity>()) : 1.0;
    Eigen::VectorXd next, g_next;
    double f_next = std::numeric_limits<double>::infinity();
    for (int tries = 0; tries < 40; ++tries) {
      next = theta + step * dir;
      f_next = logistic_objective(X, y, params.l2, next, &g_next);
      if (f_next <= f + 1e-4 * step * slope) break;
      step *= 0.5;
    }
    if (!(f_next <= f)) break;

    Pair p{next - theta, g_next - g, 0.0};
    const double sy = p.s.dot(p.y);
    if (sy > 1e-12) {
      p.rho = 1.0 / sy;
      history.push_back(std::move(p));
      if (history.size() > params.history) history.pop_front();
    }
    const double improvement = f - f_next;
    theta = std::move(next);
    g = std::move(g_next);
    f = f_next;
    if (improvement < params.tolerance) break;
  }
  if (fit != nullptr) *fit = {it, f};
  return LinearModel(theta.head(kFeatureLength), theta[kFeatureLength]);
}

}  // namespace fpe::ml
