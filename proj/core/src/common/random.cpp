#include "fpe/random.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>
#include <openssl/sha.h>

#include <cstring>
#include <stdexcept>

#include "fpe/bytes.hpp"

namespace fpe {

void RandomSource::fill(std::span<std::uint8_t> out) {
  std::size_t i = 0;
  while (i < out.size()) {
    std::uint64_t word = next_u64();
    for (int b = 0; b < 8 && i < out.size(); ++b, ++i) {
      out[i] = static_cast<std::uint8_t>(word);
      word >>= 8;
    }
  }
}

std::uint64_t RandomSource::uniform_below(std::uint64_t bound) {
  if (bound <= 1) return 0;
  // Reject the low (2^64 mod bound) values so every residue is equally likely.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x >= threshold) return x % bound;
  }
}

double RandomSource::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

struct SecureRng::Cipher {
  EVP_CIPHER_CTX* ctx = nullptr;
  ~Cipher() { EVP_CIPHER_CTX_free(ctx); }
};

SecureRng::SecureRng(std::span<const std::uint8_t, 32> key) : cipher_(std::make_unique<Cipher>()) {
  cipher_->ctx = EVP_CIPHER_CTX_new();
  const std::array<std::uint8_t, 16> iv{};
  if (cipher_->ctx == nullptr ||
      EVP_EncryptInit_ex(cipher_->ctx, EVP_aes_256_ctr(), nullptr, key.data(), iv.data()) != 1) {
    throw std::runtime_error("SecureRng: AES-256-CTR initialisation failed");
  }
}

SecureRng::SecureRng(std::uint64_t seed, std::string_view stream_label)
    : SecureRng(std::span<const std::uint8_t, 32>(derive_stream_key(seed, stream_label))) {}

SecureRng::~SecureRng() = default;
SecureRng::SecureRng(SecureRng&&) noexcept = default;
SecureRng& SecureRng::operator=(SecureRng&&) noexcept = default;

SecureRng SecureRng::from_entropy() {
  std::array<std::uint8_t, 32> key{};
  if (RAND_bytes(key.data(), static_cast<int>(key.size())) != 1) {
    throw std::runtime_error("SecureRng: RAND_bytes failed");
  }
  return SecureRng(std::span<const std::uint8_t, 32>(key));
}

void SecureRng::refill() {
  std::array<std::uint8_t, 4096> zeros{};
  int out_len = 0;
  if (EVP_EncryptUpdate(cipher_->ctx, buffer_.data(), &out_len, zeros.data(),
                        static_cast<int>(zeros.size())) != 1 ||
      out_len != static_cast<int>(buffer_.size())) {
    throw std::runtime_error("SecureRng: keystream generation failed");
  }
  pos_ = 0;
}

std::uint64_t SecureRng::next_u64() {
  if (pos_ + 8 > buffer_.size()) refill();
  const std::uint64_t v = get_le64(buffer_.data() + pos_);
  pos_ += 8;
  return v;
}

void SecureRng::fill(std::span<std::uint8_t> out) {
  std::size_t written = 0;
  while (written < out.size()) {
    if (pos_ == buffer_.size()) refill();
    const std::size_t n = std::min(out.size() - written, buffer_.size() - pos_);
    std::memcpy(out.data() + written, buffer_.data() + pos_, n);
    pos_ += n;
    written += n;
  }
}

std::array<std::uint8_t, 32> derive_stream_key(std::uint64_t master_seed,
                                               std::string_view stream_label) {
  Bytes material;
  put_le64(material, master_seed);
  material.insert(material.end(), stream_label.begin(), stream_label.end());
  std::array<std::uint8_t, 32> key{};
  SHA256(material.data(), material.size(), key.data());
  return key;
}

std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::string_view stream_label) {
  const auto key = derive_stream_key(master_seed, stream_label);
  return get_le64(key.data());
}

}  // namespace fpe
