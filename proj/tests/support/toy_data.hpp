#pragma once

// Small labelled data sets for classifier tests.

#include <cstdint>
#include <vector>

#include "fpe/dataset/dataset.hpp"
#include "fpe/random.hpp"

namespace testing_support {

using fpe::dataset::LabeledVector;

/// Feature 0 in [200, 255] for positives and [0, 50] for negatives; the rest
/// of the first `width` features are uniform noise.
inline std::vector<LabeledVector> separable(std::size_t n, std::uint64_t seed, std::size_t width = 32) {
  fpe::Prng rng(seed);
  std::vector<LabeledVector> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = out[i];
    r.label = static_cast<std::uint8_t>(i % 2);
    r.features[0] = static_cast<std::uint8_t>(r.label ? 200 + rng.uniform_below(56) : rng.uniform_below(51));
    for (std::size_t f = 1; f < width; ++f) r.features[f] = static_cast<std::uint8_t>(rng.uniform_below(256));
    r.original_length = static_cast<std::uint16_t>(width);
  }
  return out;
}

/// XOR on features (0, 1): each feature is 0 or 255, label = f0 xor f1.
/// `copies` repetitions of the four cells.
inline std::vector<LabeledVector> xor_cells(std::size_t copies) {
  std::vector<LabeledVector> out;
  for (std::size_t c = 0; c < copies; ++c) {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        LabeledVector r;
        r.features[0] = static_cast<std::uint8_t>(a * 255);
        r.features[1] = static_cast<std::uint8_t>(b * 255);
        r.label = static_cast<std::uint8_t>(a ^ b);
        r.original_length = 2;
        out.push_back(r);
      }
    }
  }
  return out;
}

/// Uniform random vectors with random labels.
inline std::vector<LabeledVector> noise(std::size_t n, std::uint64_t seed, std::size_t width = 1500) {
  fpe::Prng rng(seed);
  std::vector<LabeledVector> out(n);
  for (auto& r : out) {
    for (std::size_t f = 0; f < width; ++f) r.features[f] = static_cast<std::uint8_t>(rng.uniform_below(256));
    r.label = static_cast<std::uint8_t>(rng.uniform_below(2));
    r.original_length = static_cast<std::uint16_t>(width);
  }
  return out;
}

}  // namespace testing_support
