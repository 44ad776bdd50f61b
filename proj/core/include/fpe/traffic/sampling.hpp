#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fpe/bytes.hpp"
#include "fpe/random.hpp"

namespace fpe::traffic {

/// Indices of the packets that survive independent Bernoulli(keep_fraction)
/// trials, in ascending order. keep_fraction must lie in (0, 1].
std::vector<std::size_t> downsample_indices(std::size_t count, double keep_fraction,
                                            RandomSource& rng);

std::vector<Bytes> downsample(std::span<const Bytes> packets, double keep_fraction,
                              RandomSource& rng);

/// Exact multiset of packet lengths; sampling draws uniformly from it.
class SizeDistribution {
 public:
  // Throws Error{EmptyInput} for an empty multiset or a zero length.
  explicit SizeDistribution(std::vector<std::uint32_t> lengths);

  std::size_t sample(RandomSource& rng) const;

  std::span<const std::uint32_t> lengths() const { return lengths_; }
  std::size_t size() const { return lengths_.size(); }
  std::uint64_t total_bytes() const { return total_; }
  double mean() const { return static_cast<double>(total_) / static_cast<double>(size()); }

 private:
  std::vector<std::uint32_t> lengths_;
  std::uint64_t total_ = 0;
};

SizeDistribution build_size_distribution(std::span<const Bytes> packets);

/// `count` packets with lengths drawn from `dist` and contents from `rng`,
/// which should be a SecureRng.
std::vector<Bytes> gen_random_packets(const SizeDistribution& dist, std::size_t count,
                                      RandomSource& rng);

}  // namespace fpe::traffic
