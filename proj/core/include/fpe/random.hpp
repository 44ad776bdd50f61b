#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string_view>

namespace fpe {

/// Source of uniformly distributed 64-bit words. Every randomized operation
/// in the library draws through this interface so that a single master seed
/// can fix an entire run. Instances are not thread-safe; give each thread
/// its own stream.
class RandomSource {
 public:
  virtual ~RandomSource() = default;

  virtual std::uint64_t next_u64() = 0;
  virtual void fill(std::span<std::uint8_t> out);

  // Unbiased integer in [0, bound). bound must be >= 1.
  std::uint64_t uniform_below(std::uint64_t bound);
  // Double in [0, 1) with 53 random bits.
  double uniform01();
  bool bernoulli(double p) { return uniform01() < p; }
};

/// Fast deterministic generator (MT19937-64) for shuffles, sampling and
/// model initialisation. Not suitable where unpredictability matters.
class Prng final : public RandomSource {
 public:
  explicit Prng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() override { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// AES-256-CTR keystream generator. Deterministic when constructed from a
/// key or seed; from_entropy() keys it from the operating system.
class SecureRng final : public RandomSource {
 public:
  explicit SecureRng(std::span<const std::uint8_t, 32> key);
  SecureRng(std::uint64_t seed, std::string_view stream_label);
  ~SecureRng() override;

  SecureRng(SecureRng&&) noexcept;
  SecureRng& operator=(SecureRng&&) noexcept;
  SecureRng(const SecureRng&) = delete;
  SecureRng& operator=(const SecureRng&) = delete;

  static SecureRng from_entropy();

  std::uint64_t next_u64() override;
  void fill(std::span<std::uint8_t> out) override;

 private:
  void refill();

  struct Cipher;
  std::unique_ptr<Cipher> cipher_;
  std::array<std::uint8_t, 4096> buffer_{};
  std::size_t pos_ = 4096;
};

/// Expands a master seed into an independent 256-bit key per named stream:
/// SHA-256(le64(master_seed) || label).
std::array<std::uint8_t, 32> derive_stream_key(std::uint64_t master_seed,
                                               std::string_view stream_label);
std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::string_view stream_label);

/// Fisher-Yates shuffle driven by a RandomSource (std::shuffle's draw
/// pattern is implementation-defined).
template <typename T>
void shuffle(std::span<T> items, RandomSource& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace fpe
