#include "fpe/dataset/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "fpe/error.hpp"

namespace fpe::dataset {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'F', 'P', 'D', '1'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

LabeledVector vectorize(ByteView packet, std::uint8_t label) {
  if (packet.empty()) throw Error(Errc::Empty, "cannot vectorize an empty packet");
  if (packet.size() > kFeatureLength) {
    throw Error(Errc::TooLong, "packet of " + std::to_string(packet.size()) + " bytes exceeds 1500");
  }
  LabeledVector v;
  std::memcpy(v.features.data(), packet.data(), packet.size());
  v.label = label;
  v.original_length = static_cast<std::uint16_t>(packet.size());
  return v;
}

std::size_t Dataset::positives() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const auto& r) { return r.label == 1; }));
}

std::vector<std::uint8_t> Dataset::labels() const {
  std::vector<std::uint8_t> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.label);
  return out;
}

Dataset from_packets(std::span<const Bytes> packets, std::uint8_t label, std::string provenance) {
  Dataset ds;
  ds.provenance = std::move(provenance);
  ds.records.reserve(packets.size());
  for (std::size_t i = 0; i < packets.size(); ++i) {
    try {
      ds.records.push_back(vectorize(packets[i], label));
    } catch (const Error& e) {
      throw Error(e.code(), "packet #" + std::to_string(i) + ": " + e.what());
    }
  }
  return ds;
}

std::vector<Bytes> packets_of(const Dataset& ds) {
  std::vector<Bytes> out;
  out.reserve(ds.size());
  for (const auto& r : ds.records) out.emplace_back(r.packet().begin(), r.packet().end());
  return out;
}

Dataset build_dataset(std::span<const Bytes> positives, std::span<const Bytes> negatives,
                      std::uint64_t seed) {
  if (positives.empty() || negatives.empty()) {
    throw Error(Errc::EmptyInput, "both classes need at least one packet");
  }
  Dataset ds;
  ds.seed = seed;
  ds.records.reserve(positives.size() + negatives.size());
  auto add = [&](std::span<const Bytes> packets, std::uint8_t label, const char* side) {
    for (std::size_t i = 0; i < packets.size(); ++i) {
      try {
        ds.records.push_back(vectorize(packets[i], label));
      } catch (const Error& e) {
        throw Error(e.code(), std::string(side) + " packet #" + std::to_string(i) + ": " + e.what());
      }
    }
  };
  add(positives, 1, "positive");
  add(negatives, 0, "negative");
  Prng rng(seed);
  shuffle(std::span<LabeledVector>(ds.records), rng);
  return ds;
}

SplitIndices split_indices(std::span<const std::uint8_t> labels, double test_fraction,
                           RandomSource& rng) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(Errc::DegenerateSplit, "test_fraction must lie strictly between 0 and 1");
  }
  std::array<std::vector<std::size_t>, 2> by_label;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 1) throw Error(Errc::DegenerateSplit, "label outside {0, 1}");
    by_label[labels[i]].push_back(i);
  }
  SplitIndices out;
  for (auto& group : by_label) {
    shuffle(std::span<std::size_t>(group), rng);
    const auto n_test = static_cast<std::size_t>(
        std::llround(static_cast<double>(group.size()) * test_fraction));
    out.test.insert(out.test.end(), group.begin(), group.begin() + static_cast<std::ptrdiff_t>(n_test));
    out.train.insert(out.train.end(), group.begin() + static_cast<std::ptrdiff_t>(n_test), group.end());
  }
  if (out.train.empty() || out.test.empty()) {
    throw Error(Errc::DegenerateSplit, "split leaves one side empty (train " +
                                           std::to_string(out.train.size()) + ", test " +
                                           std::to_string(out.test.size()) + ")");
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

TrainTest split(const Dataset& ds, double test_fraction, RandomSource& rng) {
  const auto labels = ds.labels();
  const SplitIndices idx = split_indices(labels, test_fraction, rng);
  TrainTest out;
  out.train.provenance = ds.provenance + " [train]";
  out.test.provenance = ds.provenance + " [test]";
  out.train.seed = out.test.seed = ds.seed;
  out.train.records.reserve(idx.train.size());
  out.test.records.reserve(idx.test.size());
  for (auto i : idx.train) out.train.records.push_back(ds.records[i]);
  for (auto i : idx.test) out.test.records.push_back(ds.records[i]);
  return out;
}

Bytes serialize(const Dataset& ds) {
  Bytes out;
  out.reserve(kHeaderSize + kRecordSize * ds.size());
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  put_le32(out, kVersion);
  put_le64(out, ds.size());
  for (const auto& r : ds.records) {
    out.push_back(r.label);
    put_le16(out, r.original_length);
    out.insert(out.end(), r.features.begin(), r.features.end());
  }
  return out;
}

Dataset deserialize(ByteView bytes) {
  if (bytes.size() < kHeaderSize) throw Error(Errc::BadMagic, "file shorter than the FPD1 header");
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(Errc::BadMagic, "missing FPD1 magic");
  }
  const std::uint32_t version = get_le32(bytes.data() + 4);
  if (version != kVersion) throw Error(Errc::BadMagic, "unsupported FPD1 version " + std::to_string(version));
  const std::uint64_t count = get_le64(bytes.data() + 8);
  const std::size_t body = bytes.size() - kHeaderSize;
  if (body % kRecordSize != 0) {
    throw Error(Errc::TruncatedRecord, "file ends inside a record");
  }
  if (body / kRecordSize != count) {
    throw Error(Errc::CountMismatch, "header declares " + std::to_string(count) + " records, file holds " +
                                         std::to_string(body / kRecordSize));
  }
  Dataset ds;
  ds.records.resize(count);
  const std::uint8_t* p = bytes.data() + kHeaderSize;
  for (std::size_t i = 0; i < count; ++i, p += kRecordSize) {
    auto& r = ds.records[i];
    r.label = p[0];
    r.original_length = get_le16(p + 1);
    std::memcpy(r.features.data(), p + 3, kFeatureLength);
    const bool tail_zero = std::all_of(r.features.begin() + r.original_length, r.features.end(),
                                       [](std::uint8_t b) { return b == 0; });
    if (r.label > 1 || r.original_length == 0 || r.original_length > kFeatureLength || !tail_zero) {
      throw Error(Errc::ParseError, "record #" + std::to_string(i) + " violates the vector invariants");
    }
  }
  return ds;
}

void save(const Dataset& ds, const std::filesystem::path& path) {
  const Bytes bytes = serialize(ds);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

Dataset load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  const Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Dataset ds = deserialize(bytes);
  ds.provenance = path.filename().string();
  return ds;
}

}  // namespace fpe::dataset
