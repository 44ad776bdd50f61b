#include <gtest/gtest.h>

#include "fpe/error.hpp"
#include "fpe/traffic/packet.hpp"
#include "packet_builder.hpp"

using namespace fpe;
using namespace fpe::traffic;
using namespace testing_support;

namespace {

FilterReason reason_of(const Bytes& frame) { return filter_packet(parse_frame(frame)).reason; }

Bytes tcp4(std::size_t payload, std::size_t ihl = 5, std::size_t doff = 5) {
  return ipv4(6, concat(tcp_header(doff), filled(payload)), ihl);
}

}  // namespace

TEST(Filter, ArpIsDropped) { EXPECT_EQ(reason_of(arp_request()), FilterReason::DropArp); }

TEST(Filter, Ipv4UdpDroppedIpv6UdpKept) {
  const Bytes dns = filled(30);
  EXPECT_EQ(reason_of(ethernet(0x0800, ipv4(17, concat(udp_header(30), dns)))), FilterReason::DropIpv4Udp);
  EXPECT_EQ(reason_of(ethernet(0x86DD, ipv6(17, concat(udp_header(30), dns)))), FilterReason::Kept);
}

TEST(Filter, RouterSolicitationAndAdvertisementDropped) {
  EXPECT_EQ(reason_of(ethernet(0x86DD, icmpv6(133))), FilterReason::DropIcmpv6RouterSolicit);
  EXPECT_EQ(reason_of(ethernet(0x86DD, icmpv6(134))), FilterReason::DropIcmpv6RouterAdvert);
  EXPECT_EQ(reason_of(ethernet(0x86DD, icmpv6(128))), FilterReason::Kept);
}

TEST(Filter, MtuBoundary) {
  // IPv6/TCP with a 1400-byte IP length is over the 1280-byte MTU.
  const Bytes big = ipv6(6, concat(tcp_header(5), filled(1400 - 40 - 20)));
  ASSERT_EQ(big.size(), 1400u);
  EXPECT_EQ(reason_of(ethernet(0x86DD, big)), FilterReason::DropOverMtu);
  const Bytes exact = ipv6(6, concat(tcp_header(5), filled(1280 - 60)));
  EXPECT_EQ(reason_of(ethernet(0x86DD, exact)), FilterReason::Kept);
  const Bytes one_over = ipv4(6, concat(tcp_header(5), filled(1281 - 40)));
  EXPECT_EQ(reason_of(ethernet(0x0800, one_over)), FilterReason::DropOverMtu);
}

TEST(Filter, NonIpDropped) {
  EXPECT_EQ(reason_of(ethernet(0x88CC, filled(60))), FilterReason::DropNonIp);
}

TEST(Filter, KeepIffReasonKept) {
  for (const Bytes& f : {arp_request(), ethernet(0x0800, tcp4(10)), ethernet(0x86DD, icmpv6(133))}) {
    const auto d = filter_packet(parse_frame(f));
    EXPECT_EQ(d.keep, d.reason == FilterReason::Kept);
  }
}

TEST(Filter, VlanTagIsSkipped) {
  Bytes f = ethernet(0x8100, {});
  be16(f, 0x0005);
  be16(f, 0x0800);
  const Bytes ip = tcp4(10);
  f.insert(f.end(), ip.begin(), ip.end());
  const RawPacket p = parse_frame(f);
  EXPECT_EQ(p.summary.ip_version, 4);
  EXPECT_EQ(to_hex(ip_packet(p)), to_hex(ip));
}

TEST(Parse, TruncatedFrameIsParseError) {
  Bytes f = ethernet(0x0800, tcp4(10));
  f.resize(14 + 10);
  try {
    parse_frame(f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ParseError);
  }
  EXPECT_THROW(parse_frame(Bytes(5, 0)), Error);
}

TEST(Parse, IpPacketTrimsEthernetPadding) {
  const Bytes ip = tcp4(2);
  Bytes f = ethernet(0x0800, ip);
  f.resize(f.size() + 6, 0);  // minimum-frame padding
  EXPECT_EQ(ip_packet(parse_frame(f)).size(), ip.size());
}

TEST(Parse, WrapEthernetRoundTrip) {
  const Bytes ip6 = ipv6(6, concat(tcp_header(5), filled(9)));
  const RawPacket p = parse_frame(wrap_ethernet(ip6));
  EXPECT_EQ(p.ethertype, kEthertypeIpv6);
  EXPECT_EQ(Bytes(ip_packet(p).begin(), ip_packet(p).end()), ip6);
}

TEST(Strip, MinimumIpv4Tcp) {
  const Bytes payload = filled(100, 7);
  const Bytes p = ipv4(6, concat(tcp_header(5), payload));
  EXPECT_EQ(strip_headers(p), payload);
  EXPECT_EQ(p.size() - strip_headers(p).size(), 40u);
}

TEST(Strip, Ipv6Udp) {
  const Bytes payload = filled(64, 3);
  const Bytes p = ipv6(17, concat(udp_header(64), payload));
  EXPECT_EQ(strip_headers(p), payload);
  EXPECT_EQ(p.size() - payload.size(), 48u);
}

TEST(Strip, Ipv4OptionsAndTcpOptions) {
  const Bytes payload = filled(33, 9);
  const Bytes p = ipv4(6, concat(tcp_header(8), payload), 6);
  EXPECT_EQ(strip_headers(p), payload);
  EXPECT_EQ(p.size() - payload.size(), 24u + 32u);
}

TEST(Strip, Ipv6ExtensionHeadersAreWalked) {
  const Bytes payload = filled(20, 1);
  const Bytes p = ipv6(6, concat(tcp_header(5), payload), {0, 60, 43});
  const auto loc = locate_transport(p);
  EXPECT_EQ(loc.protocol, 6);
  EXPECT_EQ(loc.offset, 40u + 24u);
  EXPECT_EQ(strip_headers(p), payload);
}

TEST(Strip, OtherTransportKeepsItsHeader) {
  const Bytes p = ipv6(58, Bytes{128, 0, 0, 0, 1, 2, 3, 4});
  EXPECT_EQ(strip_headers(p), (Bytes{128, 0, 0, 0, 1, 2, 3, 4}));
}

TEST(Strip, ResultIsProperSuffix) {
  for (std::size_t n : {1u, 50u, 1000u}) {
    const Bytes p = tcp4(n);
    const Bytes s = strip_headers(p);
    ASSERT_LT(s.size(), p.size());
    EXPECT_TRUE(std::equal(s.begin(), s.end(), p.end() - static_cast<std::ptrdiff_t>(s.size())));
  }
}

TEST(Strip, Errors) {
  try {
    strip_headers(ipv4(6, tcp_header(5)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyPayload);
  }
  Bytes bad_doff = tcp4(4);
  bad_doff[20 + 12] = 0xF0;  // 60-byte TCP header in a 24-byte segment
  try {
    strip_headers(bad_doff);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ParseError);
  }
  EXPECT_THROW(strip_headers(Bytes{0x45, 0}), Error);
  EXPECT_THROW(strip_headers(Bytes(40, 0x10)), Error);  // version 1
}
