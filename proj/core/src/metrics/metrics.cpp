#include "fpe/metrics/metrics.hpp"

#include <fmt/format.h>

#include "fpe/error.hpp"

namespace fpe::metrics {

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  return *this;
}

ConfusionCounts confusion(std::span<const std::uint8_t> predictions, std::span<const std::uint8_t> truth) {
  if (predictions.size() != truth.size())
    throw Error(Errc::LengthMismatch,
                fmt::format("{} predictions for {} labels", predictions.size(), truth.size()));
  if (truth.empty()) throw Error(Errc::Empty, "no predictions to score");
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = predictions[i] != 0, t = truth[i] != 0;
    if (p && t) ++c.tp;
    else if (p) ++c.fp;
    else if (t) ++c.fn;
    else ++c.tn;
  }
  return c;
}

namespace {

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::optional<double> f1_from_counts(const ConfusionCounts& c) {
  return ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
}

std::optional<double> f1_harmonic(std::optional<double> precision, std::optional<double> recall) {
  if (!precision || !recall || *precision <= 0 || *recall <= 0) return std::nullopt;
  return 2.0 / (1.0 / *recall + 1.0 / *precision);
}

MetricsReport compute_metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw Error(Errc::EmptyCounts, "confusion table is empty");
  MetricsReport m;
  m.counts = c;
  m.accuracy = ratio(c.tp + c.tn, c.total());
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.collateral = ratio(c.fp, c.fp + c.tn);
  m.f1 = f1_from_counts(c);
  if (m.f1 && m.collateral) m.effective = is_effective(*m.f1, *m.collateral);
  return m;
}

bool is_effective(double f1, double collateral) {
  return f1 > kF1Threshold && collateral < kCollateralThreshold;
}

bool is_effective(const MetricsReport& m) {
  if (!m.f1 || !m.collateral) throw Error(Errc::UndefinedMetric, "F1 or collateral damage undefined");
  return is_effective(*m.f1, *m.collateral);
}

std::string format_metric(std::optional<double> value, std::string_view missing) {
  if (!value) return std::string(missing);
  return fmt::format("{}", *value);
}

std::string csv_header() { return "algorithm,A,P,R,C,F1,effective,tp,fp,tn,fn,seed"; }

std::string csv_row(std::string_view algorithm, const MetricsReport& m, std::uint64_t seed) {
  const std::string eff = m.effective ? (*m.effective ? "true" : "false") : "";
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}", algorithm, format_metric(m.accuracy),
                     format_metric(m.precision), format_metric(m.recall), format_metric(m.collateral),
                     format_metric(m.f1), eff, m.counts.tp, m.counts.fp, m.counts.tn, m.counts.fn, seed);
}

std::string table_header() {
  return fmt::format("{:<10} {:>8} {:>8} {:>8} {:>8} {:>8} {:>9}", "algorithm", "A", "P", "R", "C", "F1",
                     "effective");
}

std::string table_row(std::string_view algorithm, const MetricsReport& m) {
  auto cell = [](std::optional<double> v) { return v ? fmt::format("{:.4f}", *v) : std::string("n/a"); };
  const std::string eff = m.effective ? (*m.effective ? "yes" : "no") : "n/a";
  return fmt::format("{:<10} {:>8} {:>8} {:>8} {:>8} {:>8} {:>9}", algorithm, cell(m.accuracy),
                     cell(m.precision), cell(m.recall), cell(m.collateral), cell(m.f1), eff);
}

}  // namespace fpe::metrics
