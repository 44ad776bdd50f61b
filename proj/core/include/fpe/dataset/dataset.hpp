#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fpe/bytes.hpp"
#include "fpe/random.hpp"

namespace fpe::dataset {

inline constexpr std::size_t kFeatureLength = 1500;
inline constexpr std::size_t kHeaderSize = 16;
inline constexpr std::size_t kRecordSize = 1 + 2 + kFeatureLength;

using FeatureVector = std::array<std::uint8_t, kFeatureLength>;
using FeatureView = std::span<const std::uint8_t, kFeatureLength>;

/// One packet as a fixed-width byte vector: bytes [0, original_length) are
/// the packet, the rest are zero. label 1 = ACC, 0 = anything else.
struct LabeledVector {
  FeatureVector features{};
  std::uint8_t label = 0;
  std::uint16_t original_length = 0;

  bool operator==(const LabeledVector&) const = default;
  ByteView packet() const { return ByteView(features).first(original_length); }
};

/// Throws Error{Empty} for an empty packet, Error{TooLong} beyond 1500 bytes.
LabeledVector vectorize(ByteView packet, std::uint8_t label = 0);

struct Dataset {
  std::vector<LabeledVector> records;
  std::string provenance;  // in-memory only; not part of the file format
  std::uint64_t seed = 0;  // in-memory only

  std::size_t size() const { return records.size(); }
  std::size_t positives() const;
  std::vector<std::uint8_t> labels() const;
  /// Record contents only; provenance and seed are not compared.
  bool same_records(const Dataset& other) const { return records == other.records; }
};

/// Unshuffled corpus of packets sharing one label.
Dataset from_packets(std::span<const Bytes> packets, std::uint8_t label, std::string provenance = {});
std::vector<Bytes> packets_of(const Dataset& ds);

/// Vectorises both classes (positives labelled 1) and interleaves them with
/// a Fisher-Yates shuffle seeded by `seed`.
Dataset build_dataset(std::span<const Bytes> positives, std::span<const Bytes> negatives,
                      std::uint64_t seed);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified split: each label contributes round(count * test_fraction)
/// records to the test side. Indices are returned in ascending order.
/// Throws Error{DegenerateSplit}.
SplitIndices split_indices(std::span<const std::uint8_t> labels, double test_fraction,
                           RandomSource& rng);

struct TrainTest {
  Dataset train;
  Dataset test;
};

TrainTest split(const Dataset& ds, double test_fraction, RandomSource& rng);

/// "FPD1" | u32 version | u64 count | count x (u8 label, u16 length, 1500 bytes),
/// all little-endian.
Bytes serialize(const Dataset& ds);
Dataset deserialize(ByteView file_bytes);

void save(const Dataset& ds, const std::filesystem::path& path);
Dataset load(const std::filesystem::path& path);

}  // namespace fpe::dataset
