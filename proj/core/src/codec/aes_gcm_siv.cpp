#include "fpe/codec/aes_gcm_siv.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>

#include <cstring>
#include <stdexcept>

#include "fpe/error.hpp"

namespace fpe::codec {

namespace {

class Aes256Ecb {
 public:
  explicit Aes256Ecb(const std::uint8_t* key) : ctx_(EVP_CIPHER_CTX_new()) {
    if (ctx_ == nullptr ||
        EVP_EncryptInit_ex(ctx_, EVP_aes_256_ecb(), nullptr, key, nullptr) != 1) {
      EVP_CIPHER_CTX_free(ctx_);
      throw std::runtime_error("AES-256 key setup failed");
    }
    EVP_CIPHER_CTX_set_padding(ctx_, 0);
  }
  ~Aes256Ecb() { EVP_CIPHER_CTX_free(ctx_); }
  Aes256Ecb(const Aes256Ecb&) = delete;
  Aes256Ecb& operator=(const Aes256Ecb&) = delete;

  // in and out hold n_blocks * 16 bytes.
  void encrypt(const std::uint8_t* in, std::uint8_t* out, std::size_t n_blocks) const {
    int len = 0;
    if (EVP_EncryptUpdate(ctx_, out, &len, in, static_cast<int>(n_blocks * 16)) != 1) {
      throw std::runtime_error("AES-256 block encryption failed");
    }
  }

 private:
  EVP_CIPHER_CTX* ctx_;
};

struct U128 {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
};

U128 load(const std::uint8_t* p) { return {get_le64(p), get_le64(p + 8)}; }

void store(U128 v, std::uint8_t* p) {
  for (int i = 0; i < 8; ++i) {
    p[i] = static_cast<std::uint8_t>(v.lo >> (8 * i));
    p[8 + i] = static_cast<std::uint8_t>(v.hi >> (8 * i));
  }
}

// a * b * x^-128 modulo x^128 + x^127 + x^126 + x^121 + 1. Each step adds a
// if the current bit of b is set, then divides the accumulator by x.
U128 dot(U128 a, U128 b) {
  U128 r;
  for (int i = 0; i < 128; ++i) {
    const std::uint64_t bit = i < 64 ? (b.lo >> i) & 1 : (b.hi >> (i - 64)) & 1;
    const std::uint64_t mask = 0 - bit;
    r.lo ^= a.lo & mask;
    r.hi ^= a.hi & mask;
    const std::uint64_t carry = 0 - (r.lo & 1);
    r.lo = (r.lo >> 1) | (r.hi << 63);
    r.hi = (r.hi >> 1) ^ (carry & 0xE100000000000000ULL);
  }
  return r;
}

struct DerivedKeys {
  std::array<std::uint8_t, 16> auth{};
  std::array<std::uint8_t, 32> enc{};
};

DerivedKeys derive_keys(const Aes256Ecb& kgk, std::span<const std::uint8_t, kNonceSize> nonce) {
  std::array<std::uint8_t, 16 * 6> in{};
  std::array<std::uint8_t, 16 * 6> out{};
  for (std::uint32_t i = 0; i < 6; ++i) {
    std::uint8_t* block = in.data() + 16 * i;
    block[0] = static_cast<std::uint8_t>(i);
    std::memcpy(block + 4, nonce.data(), kNonceSize);
  }
  kgk.encrypt(in.data(), out.data(), 6);
  DerivedKeys keys;
  std::memcpy(keys.auth.data(), out.data(), 8);
  std::memcpy(keys.auth.data() + 8, out.data() + 16, 8);
  for (int i = 0; i < 4; ++i) std::memcpy(keys.enc.data() + 8 * i, out.data() + 16 * (2 + i), 8);
  return keys;
}

Block compute_tag(const DerivedKeys& keys, const Aes256Ecb& enc,
                  std::span<const std::uint8_t, kNonceSize> nonce, ByteView aad,
                  ByteView plaintext) {
  const U128 h = load(keys.auth.data());
  U128 s;
  auto absorb = [&](ByteView data) {
    std::size_t off = 0;
    for (; off + 16 <= data.size(); off += 16) {
      const U128 x = load(data.data() + off);
      s = dot({s.lo ^ x.lo, s.hi ^ x.hi}, h);
    }
    if (off < data.size()) {
      std::array<std::uint8_t, 16> last{};
      std::memcpy(last.data(), data.data() + off, data.size() - off);
      const U128 x = load(last.data());
      s = dot({s.lo ^ x.lo, s.hi ^ x.hi}, h);
    }
  };
  absorb(aad);
  absorb(plaintext);
  const U128 lengths{static_cast<std::uint64_t>(aad.size()) * 8,
                     static_cast<std::uint64_t>(plaintext.size()) * 8};
  s = dot({s.lo ^ lengths.lo, s.hi ^ lengths.hi}, h);

  Block block{};
  store(s, block.data());
  for (std::size_t i = 0; i < kNonceSize; ++i) block[i] ^= nonce[i];
  block[15] &= 0x7f;
  Block tag{};
  enc.encrypt(block.data(), tag.data(), 1);
  return tag;
}

// Counter mode with a 32-bit little-endian counter in the first word of the
// block; the remaining 96 bits come from the tag.
void ctr_xor(const Aes256Ecb& enc, const Block& tag, ByteView in, std::uint8_t* out) {
  Block counter = tag;
  counter[15] |= 0x80;
  std::uint32_t ctr = get_le32(counter.data());
  constexpr std::size_t kBatch = 64;
  std::array<std::uint8_t, 16 * kBatch> blocks{};
  std::array<std::uint8_t, 16 * kBatch> stream{};
  std::size_t off = 0;
  while (off < in.size()) {
    const std::size_t remaining = in.size() - off;
    const std::size_t n = std::min(kBatch, (remaining + 15) / 16);
    for (std::size_t b = 0; b < n; ++b) {
      std::uint8_t* blk = blocks.data() + 16 * b;
      std::memcpy(blk, counter.data(), 16);
      for (int i = 0; i < 4; ++i) blk[i] = static_cast<std::uint8_t>(ctr >> (8 * i));
      ++ctr;
    }
    enc.encrypt(blocks.data(), stream.data(), n);
    const std::size_t take = std::min(remaining, 16 * n);
    for (std::size_t i = 0; i < take; ++i) out[off + i] = in[off + i] ^ stream[i];
    off += take;
  }
}

}  // namespace

SessionKey::SessionKey(ByteView key_bytes) {
  if (key_bytes.size() != kKeySize) {
    throw Error(Errc::KeyInvalid,
                "session key must be 32 bytes, got " + std::to_string(key_bytes.size()));
  }
  std::memcpy(key_.data(), key_bytes.data(), kKeySize);
}

SessionKey SessionKey::generate(RandomSource& rng) {
  std::array<std::uint8_t, kKeySize> raw{};
  rng.fill(raw);
  return SessionKey(raw);
}

Block polyval(std::span<const std::uint8_t, 16> hash_key, ByteView blocks) {
  if (blocks.size() % 16 != 0) throw std::invalid_argument("polyval input not block aligned");
  const U128 h = load(hash_key.data());
  U128 s;
  for (std::size_t off = 0; off < blocks.size(); off += 16) {
    const U128 x = load(blocks.data() + off);
    s = dot({s.lo ^ x.lo, s.hi ^ x.hi}, h);
  }
  Block out{};
  store(s, out.data());
  return out;
}

Bytes gcm_siv_seal(const SessionKey& key, std::span<const std::uint8_t, kNonceSize> nonce,
                   ByteView plaintext, ByteView associated_data) {
  const Aes256Ecb kgk(key.bytes().data());
  const DerivedKeys keys = derive_keys(kgk, nonce);
  const Aes256Ecb enc(keys.enc.data());
  const Block tag = compute_tag(keys, enc, nonce, associated_data, plaintext);

  Bytes out(plaintext.size() + kTagSize);
  ctr_xor(enc, tag, plaintext, out.data());
  std::memcpy(out.data() + plaintext.size(), tag.data(), kTagSize);
  return out;
}

Bytes gcm_siv_open(const SessionKey& key, std::span<const std::uint8_t, kNonceSize> nonce,
                   ByteView sealed, ByteView associated_data) {
  if (sealed.size() < kTagSize) {
    throw Error(Errc::TooShort, "sealed message shorter than the authentication tag");
  }
  const std::size_t pt_len = sealed.size() - kTagSize;
  Block tag{};
  std::memcpy(tag.data(), sealed.data() + pt_len, kTagSize);

  const Aes256Ecb kgk(key.bytes().data());
  const DerivedKeys keys = derive_keys(kgk, nonce);
  const Aes256Ecb enc(keys.enc.data());

  Bytes plaintext(pt_len);
  ctr_xor(enc, tag, sealed.first(pt_len), plaintext.data());
  const Block expected = compute_tag(keys, enc, nonce, associated_data, plaintext);
  if (CRYPTO_memcmp(expected.data(), tag.data(), kTagSize) != 0) {
    OPENSSL_cleanse(plaintext.data(), plaintext.size());
    throw Error(Errc::AuthFailure, "authentication tag mismatch");
  }
  return plaintext;
}

}  // namespace fpe::codec
