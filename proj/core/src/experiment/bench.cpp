#include "fpe/experiment/bench.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>

#include "fpe/error.hpp"

namespace fpe::experiment {

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

ThroughputResult bench_throughput(const ml::TrainedModel& model, std::span<const dataset::LabeledVector> vectors,
                                  std::size_t repetitions, std::size_t threads) {
  if (vectors.size() < kMinBenchVectors)
    throw Error(Errc::InsufficientData,
                fmt::format("{} vectors given; the benchmark needs at least {}", vectors.size(), kMinBenchVectors));
  if (repetitions < kMinBenchRepetitions)
    throw Error(Errc::InsufficientData,
                fmt::format("{} repetitions given; the benchmark needs at least {}", repetitions,
                            kMinBenchRepetitions));
  ThroughputResult r;
  r.vectors = vectors.size();
  r.threads = std::max<std::size_t>(threads, 1);
  auto time_once = [&](std::size_t t) {
    const auto start = std::chrono::steady_clock::now();
    const auto labels = model.predict_batch(vectors, t);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (labels.size() != vectors.size()) throw Error(Errc::InsufficientData, "prediction count mismatch");
    return static_cast<double>(vectors.size()) / std::max(secs, 1e-9);
  };
  for (std::size_t i = 0; i < repetitions; ++i) r.single_rates.push_back(time_once(1));
  for (std::size_t i = 0; i < repetitions; ++i) r.parallel_rates.push_back(time_once(r.threads));
  r.single_median = median(r.single_rates);
  r.parallel_median = median(r.parallel_rates);
  return r;
}

}  // namespace fpe::experiment
