#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "fpe/bytes.hpp"
#include "fpe/random.hpp"

namespace fpe::codec {

inline constexpr std::size_t kKeySize = 32;
inline constexpr std::size_t kNonceSize = 12;
inline constexpr std::size_t kTagSize = 16;

using Nonce = std::array<std::uint8_t, kNonceSize>;
using Block = std::array<std::uint8_t, 16>;

/// 256-bit AES key. Immutable once constructed.
class SessionKey {
 public:
  // Throws Error{KeyInvalid} unless key_bytes.size() == 32.
  explicit SessionKey(ByteView key_bytes);

  static SessionKey generate(RandomSource& rng);

  std::span<const std::uint8_t, kKeySize> bytes() const { return key_; }

  bool operator==(const SessionKey&) const = default;

 private:
  std::array<std::uint8_t, kKeySize> key_{};
};

/// POLYVAL over GF(2^128) with the little-endian field representation.
/// `blocks` must be a multiple of 16 bytes.
Block polyval(std::span<const std::uint8_t, 16> hash_key, ByteView blocks);

/// AES-256-GCM-SIV sealing: returns ciphertext || 16-byte tag.
Bytes gcm_siv_seal(const SessionKey& key, std::span<const std::uint8_t, kNonceSize> nonce,
                   ByteView plaintext, ByteView associated_data = {});

/// Inverse of gcm_siv_seal. Throws Error{AuthFailure} when the tag does not
/// verify and Error{TooShort} when the input lacks a full tag.
Bytes gcm_siv_open(const SessionKey& key, std::span<const std::uint8_t, kNonceSize> nonce,
                   ByteView sealed, ByteView associated_data = {});

}  // namespace fpe::codec
