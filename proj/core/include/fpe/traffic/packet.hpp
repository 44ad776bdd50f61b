#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "fpe/bytes.hpp"

namespace fpe::traffic {

inline constexpr std::size_t kAccMtu = 1280;

inline constexpr std::uint16_t kEthertypeIpv4 = 0x0800;
inline constexpr std::uint16_t kEthertypeArp = 0x0806;
inline constexpr std::uint16_t kEthertypeIpv6 = 0x86DD;
inline constexpr std::uint8_t kProtoTcp = 6;
inline constexpr std::uint8_t kProtoUdp = 17;
inline constexpr std::uint8_t kProtoIcmpv6 = 58;
inline constexpr std::uint8_t kIcmpv6RouterSolicit = 133;
inline constexpr std::uint8_t kIcmpv6RouterAdvert = 134;

enum class LinkType : std::uint16_t { Ethernet = 1 };

struct PacketSummary {
  int ip_version = 0;  // 0 when the ethertype is not IP
  std::optional<std::uint8_t> transport_protocol;
  std::optional<std::uint8_t> icmpv6_type;
  std::size_t ip_offset = 0;  // start of the IP header within the frame
  std::size_t ip_length = 0;  // length declared by the IP header
};

/// A captured link-layer frame plus the parse of its network layer.
struct RawPacket {
  LinkType link_type = LinkType::Ethernet;
  Bytes bytes;
  std::uint16_t ethertype = 0;
  PacketSummary summary;
};

/// Parses an Ethernet II frame (802.1Q/802.1ad tags are skipped). Throws
/// Error{ParseError} when the frame or its IP headers are truncated.
RawPacket parse_frame(Bytes frame, LinkType link_type = LinkType::Ethernet);

/// The IP packet inside a parsed frame, trimmed to the declared IP length.
ByteView ip_packet(const RawPacket& packet);

/// Prepends an Ethernet II header whose ethertype follows the IP version nibble.
Bytes wrap_ethernet(ByteView ip_packet);

enum class FilterReason {
  Kept,
  DropArp,
  DropIpv4Udp,
  DropIcmpv6RouterSolicit,
  DropIcmpv6RouterAdvert,
  DropOverMtu,
  DropNonIp,
};

std::string_view to_string(FilterReason reason) noexcept;

struct FilterDecision {
  bool keep = false;
  FilterReason reason = FilterReason::DropNonIp;
};

/// Capture filter: keeps IPv4/IPv6 except ARP, IPv4 UDP, ICMPv6 router
/// solicitations/advertisements and IP packets longer than `max_ip_length`.
FilterDecision filter_packet(const RawPacket& packet, std::size_t max_ip_length = kAccMtu);

struct TransportLocation {
  std::uint8_t protocol = 0;
  std::size_t offset = 0;  // first byte after all IP (and IPv6 extension) headers
};

/// Walks the IPv4 header or the IPv6 header chain.
TransportLocation locate_transport(ByteView ip_packet);

/// Removes IP headers (with IPv6 extension headers) and a TCP or UDP
/// header; returns the remaining application payload. Throws ParseError on
/// inconsistent lengths and EmptyPayload when nothing remains.
Bytes strip_headers(ByteView ip_packet);

}  // namespace fpe::traffic
