#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fpe/dataset/dataset.hpp"
#include "fpe/ml/model.hpp"

namespace fpe::experiment {

inline constexpr std::size_t kMinBenchVectors = 10000;
inline constexpr std::size_t kMinBenchRepetitions = 3;

struct ThroughputResult {
  std::size_t vectors = 0;
  std::size_t threads = 1;
  std::vector<double> single_rates;  // vectors per second, one per repetition
  std::vector<double> parallel_rates;
  double single_median = 0.0;
  double parallel_median = 0.0;
};

/// Times predict_batch over `vectors` `repetitions` times on one thread and
/// on `threads` threads. Only classification is timed.
/// Throws Error{InsufficientData} below 10 000 vectors or 3 repetitions.
ThroughputResult bench_throughput(const ml::TrainedModel& model,
                                  std::span<const dataset::LabeledVector> vectors,
                                  std::size_t repetitions, std::size_t threads);

double median(std::vector<double> values);

}  // namespace fpe::experiment
