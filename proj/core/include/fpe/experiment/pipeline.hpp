#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fpe/bytes.hpp"
#include "fpe/codec/aes_gcm_siv.hpp"
#include "fpe/dataset/dataset.hpp"
#include "fpe/experiment/config.hpp"
#include "fpe/metrics/metrics.hpp"
#include "fpe/ml/model.hpp"
#include "fpe/traffic/capture.hpp"

namespace fpe::experiment {

/// Per-stage seeds expanded from the master seed.
struct StageSeeds {
  std::uint64_t traffic;
  std::uint64_t downsample;
  std::uint64_t shuffle;
  std::uint64_t split;
  std::uint64_t master;

  explicit StageSeeds(std::uint64_t master_seed);
  std::uint64_t model(ml::Algorithm algorithm) const;
};

struct CorpusSummary {
  std::size_t count = 0;
  std::size_t min_length = 0;
  std::size_t max_length = 0;
  double mean_length = 0.0;
  double mean_popcount = 0.0;  // set bits per byte over the whole corpus

  bool operator==(const CorpusSummary&) const = default;
};

CorpusSummary summarize(std::span<const Bytes> packets);

struct AlgorithmResult {
  ml::Algorithm algorithm = ml::Algorithm::DecisionTree;
  metrics::MetricsReport metrics;
  std::uint64_t model_seed = 0;
  std::uint64_t iterations = 0;
  double final_loss = 0.0;
  double train_seconds = 0.0;  // wall clock; excluded from deterministic outputs
  double predict_seconds = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  CorpusSummary positives;
  CorpusSummary negatives;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::vector<AlgorithmResult> results;
  double total_seconds = 0.0;
};

/// Intermediate artefacts of one run. When a stage directory is given the
/// pipeline writes them as FPD1 / FPM1 files:
///   traffic.fpd, acc.fpd, negatives.fpd, dataset.fpd, train.fpd, test.fpd,
///   models/<algorithm>.fpm
struct RunOptions {
  std::optional<std::filesystem::path> stage_dir;
  bool verbose = false;
};

/// Raw traffic corpus: the capture file after filtering and downsampling,
/// or synthetic traffic. At most cfg.corpus_size packets.
std::vector<Bytes> collect_traffic(const ExperimentConfig& cfg, const StageSeeds& seeds);

codec::SessionKey session_key(std::uint64_t master_seed);

/// ACC wire packets for each input, with padding and nonces drawn from
/// their own streams.
std::vector<Bytes> encapsulate_corpus(std::span<const Bytes> packets, std::uint64_t master_seed,
                                      std::uint32_t header_epoch);

/// Trains every configured algorithm on `split.train` and scores it on
/// `split.test`.
std::vector<AlgorithmResult> evaluate_algorithms(const ExperimentConfig& cfg, const StageSeeds& seeds,
                                                 const dataset::TrainTest& split, const RunOptions& opts);

/// Random packets with sizes drawn from the ACC corpus (label 0) against
/// the ACC corpus (label 1). Errors are rethrown tagged with the failing stage.
ExperimentReport run_acc_vs_random(const ExperimentConfig& cfg, const RunOptions& opts = {});
/// Header-stripped traffic payloads (label 0) against ACC encapsulations of
/// the same packets before stripping (label 1).
ExperimentReport run_acc_vs_network(const ExperimentConfig& cfg, const RunOptions& opts = {});
/// Dispatches on cfg.experiment.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

}  // namespace fpe::experiment
