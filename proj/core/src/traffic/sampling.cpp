#include "fpe/traffic/sampling.hpp"

#include <algorithm>
#include <stdexcept>

#include "fpe/error.hpp"

namespace fpe::traffic {

std::vector<std::size_t> downsample_indices(std::size_t count, double keep_fraction,
                                            RandomSource& rng) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw std::invalid_argument("keep_fraction must lie in (0, 1]");
  }
  std::vector<std::size_t> kept;
  kept.reserve(static_cast<std::size_t>(static_cast<double>(count) * keep_fraction) + 16);
  for (std::size_t i = 0; i < count; ++i) {
    // Draw for every packet, including keep_fraction == 1, so the stream
    // consumption does not depend on the fraction.
    if (rng.uniform01() < keep_fraction) kept.push_back(i);
  }
  return kept;
}

std::vector<Bytes> downsample(std::span<const Bytes> packets, double keep_fraction,
                              RandomSource& rng) {
  std::vector<Bytes> out;
  for (const std::size_t i : downsample_indices(packets.size(), keep_fraction, rng)) {
    out.push_back(packets[i]);
  }
  return out;
}

SizeDistribution::SizeDistribution(std::vector<std::uint32_t> lengths)
    : lengths_(std::move(lengths)) {
  if (lengths_.empty()) throw Error(Errc::EmptyInput, "size distribution needs at least one packet");
  for (const auto len : lengths_) {
    if (len == 0) throw Error(Errc::EmptyInput, "zero-length packet in size distribution");
    total_ += len;
  }
}

std::size_t SizeDistribution::sample(RandomSource& rng) const {
  return lengths_[rng.uniform_below(lengths_.size())];
}

SizeDistribution build_size_distribution(std::span<const Bytes> packets) {
  std::vector<std::uint32_t> lengths;
  lengths.reserve(packets.size());
  for (const auto& p : packets) lengths.push_back(static_cast<std::uint32_t>(p.size()));
  return SizeDistribution(std::move(lengths));
}

std::vector<Bytes> gen_random_packets(const SizeDistribution& dist, std::size_t count,
                                      RandomSource& rng) {
  if (count == 0) throw Error(Errc::EmptyInput, "random packet count must be at least 1");
  std::vector<Bytes> packets;
  packets.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Bytes p(dist.sample(rng));
    rng.fill(p);
    packets.push_back(std::move(p));
  }
  return packets;
}

}  // namespace fpe::traffic
