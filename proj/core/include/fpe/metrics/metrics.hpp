#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "fpe/bytes.hpp"

namespace fpe::metrics {

/// Positive class is label 1 (ACC).
struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o);
  bool operator==(const ConfusionCounts&) const = default;
};

/// Throws Error{LengthMismatch} or Error{Empty}.
ConfusionCounts confusion(std::span<const std::uint8_t> predictions, std::span<const std::uint8_t> truth);

/// Ratios with a zero denominator are left empty rather than set to zero.
struct MetricsReport {
  std::optional<double> accuracy;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> collateral;  // FP / (FP + TN)
  std::optional<double> f1;
  std::optional<bool> effective;  // empty unless both f1 and collateral are defined
  ConfusionCounts counts;
};

/// Throws Error{EmptyCounts} when every count is zero.
MetricsReport compute_metrics(const ConfusionCounts& c);

/// 2TP / (2TP + FP + FN).
std::optional<double> f1_from_counts(const ConfusionCounts& c);
/// 2 / (1/R + 1/P); empty unless P and R are both positive.
std::optional<double> f1_harmonic(std::optional<double> precision, std::optional<double> recall);

inline constexpr double kF1Threshold = 0.95;
inline constexpr double kCollateralThreshold = 0.01;

/// F1 > 0.95 and C < 0.01. Throws Error{UndefinedMetric}.
bool is_effective(const MetricsReport& m);
bool is_effective(double f1, double collateral);

struct PopcountThresholds {
  double low = 3.4;
  double high = 4.6;
  bool inclusive = true;
};

struct PopcountVerdict {
  double avg_popcount = 0.0;
  bool blocked = false;
  PopcountThresholds thresholds;
};

/// Mean set bits per byte. Throws Error{Empty}.
double avg_popcount(ByteView packet);
PopcountVerdict popcount_block(ByteView packet, const PopcountThresholds& thresholds = {});

/// "algorithm,A,P,R,C,F1,effective,tp,fp,tn,fn,seed"
std::string csv_header();
/// Undefined values are written as empty fields.
std::string csv_row(std::string_view algorithm, const MetricsReport& m, std::uint64_t seed);
/// Fixed-width text table row; undefined values print as "n/a".
std::string table_header();
std::string table_row(std::string_view algorithm, const MetricsReport& m);
/// Shortest round-trip decimal form used in every report.
std::string format_metric(std::optional<double> value, std::string_view missing = "");

}  // namespace fpe::metrics
