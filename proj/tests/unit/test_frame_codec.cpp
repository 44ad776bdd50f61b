#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <set>

#include "fpe/codec/codec.hpp"
#include "fpe/error.hpp"
#include "fpe/random.hpp"

using namespace fpe;
using namespace fpe::codec;

namespace {

Bytes some_doc(std::size_t packet_len = 10) { return encode_document(Bytes(packet_len, 0x42), {}); }

void expect_code(Errc code, const std::function<void()>& f) {
  try {
    f();
    FAIL() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

TEST(Frame, MinimumAndMaximumPadding) {
  Prng rng(1);
  const Bytes doc(10, 0x55);
  EXPECT_EQ(assemble_frame(doc, 2, 2, rng).size(), 16u);
  EXPECT_EQ(assemble_frame(doc, 32, 32, rng).size(), 76u);
}

TEST(Frame, LayoutAndDelimiterFreePadding) {
  Prng rng(2);
  const Bytes doc = some_doc();
  for (int i = 0; i < 2000; ++i) {
    const Bytes f = pad_frame(doc, rng);
    const auto open = std::find(f.begin(), f.end(), kOpenDelimiter) - f.begin();
    ASSERT_GE(open, 2);
    ASSERT_LE(open, 32);
    const std::size_t rear = f.size() - static_cast<std::size_t>(open) - 2 - doc.size();
    ASSERT_GE(rear, 2u);
    ASSERT_LE(rear, 32u);
    ASSERT_EQ(f[static_cast<std::size_t>(open) + 1 + doc.size()], kCloseDelimiter);
    for (std::size_t j = static_cast<std::size_t>(open) + 2 + doc.size(); j < f.size(); ++j)
      ASSERT_TRUE(f[j] != kOpenDelimiter && f[j] != kCloseDelimiter);
  }
}

TEST(Frame, PadLengthsAreUniform) {
  Prng rng(3);
  const Bytes doc = some_doc();
  std::array<int, 33> front{}, rear{};
  constexpr int kRuns = 10000;
  for (int i = 0; i < kRuns; ++i) {
    const Bytes f = pad_frame(doc, rng);
    ASSERT_GE(f.size(), doc.size() + 6);
    ASSERT_LE(f.size(), doc.size() + 66);
    const auto open = static_cast<std::size_t>(std::find(f.begin(), f.end(), kOpenDelimiter) - f.begin());
    ++front[open];
    ++rear[f.size() - open - 2 - doc.size()];
  }
  auto chi2 = [](const std::array<int, 33>& h) {
    const double expect = kRuns / 31.0;
    double s = 0;
    for (int len = 2; len <= 32; ++len) s += (h[len] - expect) * (h[len] - expect) / expect;
    return s;
  };
  EXPECT_LT(chi2(front), 59.70);  // 30 dof, p = 0.001
  EXPECT_LT(chi2(rear), 59.70);
}

TEST(Frame, PadBytesUniformOverAllowedValues) {
  Prng rng(4);
  std::array<int, 256> hist{};
  std::size_t total = 0;
  const Bytes doc(5, 0);
  for (int i = 0; i < 4000; ++i) {
    const Bytes f = assemble_frame(doc, 32, 32, rng);
    for (std::size_t j = 0; j < 32; ++j, ++total) ++hist[f[j]];
  }
  EXPECT_EQ(hist[kOpenDelimiter], 0);
  EXPECT_EQ(hist[kCloseDelimiter], 0);
  const double expect = static_cast<double>(total) / 254.0;
  double chi2 = 0;
  for (int v = 0; v < 256; ++v)
    if (v != kOpenDelimiter && v != kCloseDelimiter) chi2 += (hist[v] - expect) * (hist[v] - expect) / expect;
  EXPECT_LT(chi2, 330.5);  // 253 dof, p = 0.001
}

TEST(Frame, UnpadRoundTrip) {
  Prng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Bytes d = some_doc(1 + rng.uniform_below(1280));
    ASSERT_EQ(unpad_frame(pad_frame(d, rng)), d);
  }
}

TEST(Frame, UnpadErrors) {
  expect_code(Errc::MalformedFrame, [] { unpad_frame(Bytes(64, 0)); });
  Prng rng(6);
  Bytes f = pad_frame(some_doc(), rng);
  const auto open = static_cast<std::size_t>(std::find(f.begin(), f.end(), kOpenDelimiter) - f.begin());
  expect_code(Errc::MalformedFrame, [&] { unpad_frame(Bytes(f.begin(), f.begin() + open + 10)); });
  Bytes no_close = f;
  no_close[open + 1 + some_doc().size()] = 0;
  expect_code(Errc::MalformedFrame, [&] { unpad_frame(no_close); });
}

TEST(Codec, WireLengthWithForcedPads) {
  // encapsulate with pads forced to (2, 2): the frame is doc + 6.
  const Bytes packet(20, 0x11);
  const Bytes doc = encode_document(packet, {});
  EXPECT_EQ(doc.size(), 4u + 1 + 2 + 5 + 1 + 2 + 4 + 1 + 20 + 1);
  Prng rng(7);
  const SessionKey key = SessionKey::generate(rng);
  const Bytes frame = assemble_frame(doc, 2, 2, rng);
  Nonce nonce{};
  rng.fill(nonce);
  Bytes wire = gcm_siv_seal(key, nonce, frame);
  wire.insert(wire.end(), nonce.begin(), nonce.end());
  EXPECT_EQ(wire.size(), doc.size() + 6 + 16 + 12);
  const InnerDocument back = decapsulate(wire, key);
  EXPECT_EQ(back.packet, packet);
}

TEST(Codec, RoundTripAndSizeBound) {
  Prng rng(8);
  SecureRng srng(8, "codec-test");
  const SessionKey key = SessionKey::generate(srng);
  for (int i = 0; i < 1000; ++i) {
    Bytes p(1 + rng.uniform_below(1280));
    rng.fill(p);
    const HeaderInfo h = default_header_info(static_cast<std::uint32_t>(rng.next_u64()));
    const Bytes wire = encapsulate(p, h, key, srng);
    const std::size_t doc = encode_document(p, h).size();
    ASSERT_GE(wire.size(), doc + 34);
    ASSERT_LE(wire.size(), doc + 94);
    const InnerDocument back = decapsulate(wire, key);
    ASSERT_EQ(back.packet, p);
    ASSERT_EQ(back.header_info, h);
  }
}

TEST(Codec, TamperingAndWrongKey) {
  SecureRng rng(9, "codec-test");
  const SessionKey key = SessionKey::generate(rng), other = SessionKey::generate(rng);
  const Bytes wire = encapsulate(Bytes(64, 1), default_header_info(0), key, rng);
  for (std::size_t i = 0; i < wire.size(); ++i) {
    Bytes bad = wire;
    bad[i] ^= 0x01;
    expect_code(Errc::AuthFailure, [&] { decapsulate(bad, key); });
  }
  expect_code(Errc::AuthFailure, [&] { decapsulate(wire, other); });
  expect_code(Errc::TooShort, [&] { decapsulate(Bytes(27, 0), key); });
}

TEST(Codec, NonceIsTrailingTwelveBytesAndUnique) {
  SecureRng rng(10, "nonces");
  const SessionKey key = SessionKey::generate(rng);
  std::set<Bytes> nonces;
  for (int i = 0; i < 20000; ++i) {
    const Bytes wire = encapsulate(Bytes{1}, {}, key, rng);
    ASSERT_TRUE(nonces.insert(Bytes(wire.end() - 12, wire.end())).second);
  }
}

TEST(Codec, SeparateStreamsAreDeterministic) {
  const SessionKey key(Bytes(32, 3));
  SecureRng a1(1, "pad"), b1(1, "nonce"), a2(1, "pad"), b2(1, "nonce");
  EXPECT_EQ(encapsulate(Bytes(50, 9), {}, key, a1, b1), encapsulate(Bytes(50, 9), {}, key, a2, b2));
}

TEST(Codec, CiphertextBytesLookUniform) {
  SecureRng rng(11, "uniformity");
  const SessionKey key = SessionKey::generate(rng);
  std::array<std::uint64_t, 256> hist{};
  std::uint64_t total = 0, bits = 0;
  while (total < (1u << 20)) {
    const Bytes wire = encapsulate(Bytes(1000, 0x41), default_header_info(0), key, rng);
    for (std::uint8_t b : wire) {
      ++hist[b];
      bits += static_cast<std::uint64_t>(std::popcount(b));
    }
    total += wire.size();
  }
  const double expect = static_cast<double>(total) / 256.0;
  double chi2 = 0;
  for (auto c : hist) chi2 += (static_cast<double>(c) - expect) * (static_cast<double>(c) - expect) / expect;
  EXPECT_LT(chi2, 330.5);  // 255 dof at p = 0.001 is 330.5
  const double mean_pop = static_cast<double>(bits) / static_cast<double>(total);
  EXPECT_GE(mean_pop, 3.9);
  EXPECT_LE(mean_pop, 4.1);
}
