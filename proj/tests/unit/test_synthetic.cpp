#include <gtest/gtest.h>

#include <bit>
#include <string>

#include "fpe/error.hpp"
#include "fpe/random.hpp"
#include "fpe/traffic/packet.hpp"
#include "fpe/traffic/synthetic.hpp"

using namespace fpe;
using namespace fpe::traffic;

namespace {

double avg_popcount(const std::vector<Bytes>& packets) {
  std::uint64_t bits = 0, bytes = 0;
  for (const auto& p : packets) {
    for (auto b : p) bits += static_cast<unsigned>(std::popcount(b));
    bytes += p.size();
  }
  return static_cast<double>(bits) / static_cast<double>(bytes);
}

bool starts_with(const Bytes& b, std::string_view s) {
  return b.size() >= s.size() && std::equal(s.begin(), s.end(), b.begin());
}

}  // namespace

TEST(Mix, ParseAndRoundTrip) {
  const auto m = TrafficMix::parse("http=0.5,tls:0.5");
  EXPECT_DOUBLE_EQ(m.http, 0.5);
  EXPECT_DOUBLE_EQ(m.tls, 0.5);
  EXPECT_DOUBLE_EQ(m.dns_tcp, 0.0);
  const TrafficMix d;
  EXPECT_EQ(TrafficMix::parse(d.to_string()), d);
}

TEST(Mix, BadWeights) {
  for (const char* s : {"http=-1", "bogus=1", "http=0,tls=0", "http=abc", "http"}) {
    try {
      TrafficMix::parse(s);
      ADD_FAILURE() << s;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::BadWeights) << s;
    }
  }
}

TEST(Synthetic, PacketsAreValidTcpWithinMtu) {
  SecureRng rng(1, "traffic");
  const auto packets = gen_synthetic_traffic(TrafficMix{}, 3000, rng);
  ASSERT_EQ(packets.size(), 3000u);
  for (const auto& p : packets) {
    ASSERT_LE(p.size(), kAccMtu);
    const auto loc = locate_transport(p);
    EXPECT_EQ(loc.protocol, kProtoTcp);
    EXPECT_FALSE(strip_headers(p).empty());
    const RawPacket raw = parse_frame(wrap_ethernet(p));
    EXPECT_TRUE(filter_packet(raw).keep);
  }
}

TEST(Synthetic, SmallMtuIsRespected) {
  SecureRng rng(2, "traffic");
  for (const auto& p : gen_synthetic_traffic(TrafficMix{}, 500, rng, 200)) EXPECT_LE(p.size(), 200u);
}

TEST(Synthetic, HttpOnlyMixLooksLikeHttp) {
  SecureRng rng(3, "traffic");
  const auto mix = TrafficMix::parse("http=1");
  for (const auto& p : gen_synthetic_traffic(mix, 500, rng)) {
    const Bytes payload = strip_headers(p);
    const bool ok = starts_with(payload, "GET ") || starts_with(payload, "POST ") ||
                    starts_with(payload, "HEAD ") || starts_with(payload, "OPTIONS ") ||
                    starts_with(payload, "HTTP/1.1 ");
    EXPECT_TRUE(ok);
  }
}

TEST(Synthetic, TlsPayloadsAreRecords) {
  SecureRng rng(4, "traffic");
  for (const auto& p : gen_synthetic_traffic(TrafficMix::parse("tls=1"), 300, rng)) {
    const Bytes payload = strip_headers(p);
    ASSERT_GE(payload.size(), 5u);
    EXPECT_TRUE(payload[0] >= 0x14 && payload[0] <= 0x17);
    EXPECT_EQ(payload[1], 0x03);
  }
}

TEST(Synthetic, DefaultMixIsLowEntropy) {
  SecureRng rng(1, "traffic");
  EXPECT_LT(avg_popcount(gen_synthetic_traffic(TrafficMix{}, 5000, rng)), 3.7);
}

TEST(Synthetic, Deterministic) {
  SecureRng a(7, "traffic"), b(7, "traffic");
  EXPECT_EQ(gen_synthetic_traffic(TrafficMix{}, 200, a), gen_synthetic_traffic(TrafficMix{}, 200, b));
}

TEST(Synthetic, PayloadBound) {
  SecureRng rng(5, "traffic");
  for (auto f : {TrafficFamily::Http, TrafficFamily::Tls, TrafficFamily::DnsTcp, TrafficFamily::SmallControl}) {
    for (int i = 0; i < 200; ++i) {
      const auto b = gen_payload(f, 64, rng);
      EXPECT_FALSE(b.empty());
      EXPECT_LE(b.size(), 64u);
    }
  }
}
