#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fpe/error.hpp"
#include "fpe/ml/linear.hpp"

namespace fpe::ml {

using dataset::kFeatureLength;

LinearModel train_linear_svm(std::span<const dataset::LabeledVector> records, const SvmParams& params,
                             RandomSource& rng, LinearFit* fit) {
  if (records.empty()) throw Error(Errc::EmptyTrainingSet, "linear SVM needs samples");
  const std::size_t n = records.size();
  // w = wscale * v keeps the L2 shrink O(1) per step.
  std::vector<double> v(kFeatureLength, 0.0);
  double wscale = 1.0;
  double b = 0.0;
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);

  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t no_improvement = 0;
  std::size_t t = 1;
  std::size_t epoch = 0;
  double epoch_loss = 0.0;
  while (epoch < params.max_epochs) {
    ++epoch;
    shuffle(std::span(order), rng);
    epoch_loss = 0.0;
    for (const std::uint32_t i : order) {
      const auto& x = records[i].features;
      const double s = records[i].label == 1 ? 1.0 : -1.0;
      double dot = 0.0;
      for (std::size_t f = 0; f < kFeatureLength; ++f) dot += v[f] * x[f];
      const double margin = s * (wscale * dot / 255.0 + b);
      const double eta = params.eta0 / std::pow(static_cast<double>(t), params.power_t);
      epoch_loss += std::max(0.0, 1.0 - margin);
      wscale *= std::max(0.0, 1.0 - eta * params.alpha);
      if (wscale < 1e-9) {
        for (double& c : v) c *= wscale;
        wscale = 1.0;
      }
      if (margin < 1.0) {
        const double step = eta * s / (wscale * 255.0);
        for (std::size_t f = 0; f < kFeatureLength; ++f) v[f] += step * x[f];
        b += eta * s;
      }
      ++t;
    }
    if (epoch_loss > best_loss - params.tolerance * static_cast<double>(n)) {
      ++no_improvement;
    } else {
      no_improvement = 0;
    }
    best_loss = std::min(best_loss, epoch_loss);
    if (no_improvement >= params.n_iter_no_change) break;
  }
  Eigen::VectorXd w(kFeatureLength);
  for (std::size_t f = 0; f < kFeatureLength; ++f) w[f] = v[f] * wscale;
  if (fit != nullptr) *fit = {epoch, epoch_loss / static_cast<double>(n)};
  return LinearModel(std::move(w), b);
}

}  // namespace fpe::ml
