#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fpe/ml/hyperparams.hpp"
#include "fpe/traffic/synthetic.hpp"

namespace fpe::experiment {

enum class ExperimentKind { AccVsRandom, AccVsNetwork };

std::string_view to_string(ExperimentKind kind) noexcept;  // acc-vs-random, acc-vs-network
ExperimentKind parse_experiment(std::string_view name);

/// Flat key=value settings. Keys with a '.' (e.g. "forest.tree_count") are
/// classifier overrides passed through to Hyperparams::set.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::AccVsRandom;
  std::string capture;  // pcap/pcapng path; empty = synthetic traffic
  traffic::TrafficMix mix;
  std::size_t corpus_size = 20000;  // packets per class
  double keep_fraction = 1.0;
  double test_fraction = 0.2;
  std::vector<ml::Algorithm> algorithms{std::begin(ml::kAllAlgorithms), std::end(ml::kAllAlgorithms)};
  std::map<std::string, std::string> overrides;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  std::uint32_t header_epoch = 1700000000;  // "t" value in every inner header
  std::size_t max_ip_length = 1280;
  std::size_t threads = 1;

  /// Throws Error{BadConfig}.
  void set(std::string_view key, std::string_view value);
  /// Lines of "key = value"; '#' starts a comment. Throws Error{BadConfig}.
  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::filesystem::path& path);
  /// Canonical form; parse(to_text()) reproduces the config.
  std::string to_text() const;
  /// Sizes >= 100, fractions in range, at least one algorithm, overrides valid.
  void validate() const;

  ml::Hyperparams hyperparams(ml::Algorithm algorithm) const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Environment variable holding the default master seed for the CLI.
inline constexpr const char* kSeedEnvVar = "FPE_SEED";

}  // namespace fpe::experiment
