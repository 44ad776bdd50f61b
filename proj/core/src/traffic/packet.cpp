#include "fpe/traffic/packet.hpp"

#include <algorithm>

#include "fpe/error.hpp"

namespace fpe::traffic {

namespace {

constexpr std::size_t kEthernetHeader = 14;
constexpr std::size_t kIpv6Header = 40;

[[noreturn]] void parse_error(const std::string& what) { throw Error(Errc::ParseError, what); }

bool is_ipv6_extension(std::uint8_t next_header) {
  switch (next_header) {
    case 0:    // hop-by-hop options
    case 43:   // routing
    case 44:   // fragment
    case 51:   // authentication header
    case 60:   // destination options
    case 135:  // mobility
    case 139:  // host identity protocol
    case 140:  // shim6
      return true;
    default:
      return false;
  }
}

}  // namespace

std::string_view to_string(FilterReason reason) noexcept {
  switch (reason) {
    case FilterReason::Kept: return "Kept";
    case FilterReason::DropArp: return "DropArp";
    case FilterReason::DropIpv4Udp: return "DropIpv4Udp";
    case FilterReason::DropIcmpv6RouterSolicit: return "DropIcmpv6RouterSolicit";
    case FilterReason::DropIcmpv6RouterAdvert: return "DropIcmpv6RouterAdvert";
    case FilterReason::DropOverMtu: return "DropOverMtu";
    case FilterReason::DropNonIp: return "DropNonIp";
  }
  return "Unknown";
}

TransportLocation locate_transport(ByteView ip) {
  if (ip.empty()) parse_error("empty IP packet");
  const int version = ip[0] >> 4;
  if (version == 4) {
    if (ip.size() < 20) parse_error("IPv4 header truncated");
    const std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0f) * 4;
    if (ihl < 20) parse_error("IPv4 IHL below 5");
    if (ihl > ip.size()) parse_error("IPv4 header longer than packet");
    return {ip[9], ihl};
  }
  if (version == 6) {
    if (ip.size() < kIpv6Header) parse_error("IPv6 header truncated");
    std::uint8_t next = ip[6];
    std::size_t offset = kIpv6Header;
    while (is_ipv6_extension(next)) {
      if (offset + 8 > ip.size()) parse_error("IPv6 extension header truncated");
      std::size_t len = 0;
      if (next == 44) {
        len = 8;
      } else if (next == 51) {
        len = (static_cast<std::size_t>(ip[offset + 1]) + 2) * 4;
      } else {
        len = (static_cast<std::size_t>(ip[offset + 1]) + 1) * 8;
      }
      if (offset + len > ip.size()) parse_error("IPv6 extension header overruns packet");
      next = ip[offset];
      offset += len;
    }
    return {next, offset};
  }
  parse_error("unsupported IP version " + std::to_string(version));
}

RawPacket parse_frame(Bytes frame, LinkType link_type) {
  RawPacket packet;
  packet.link_type = link_type;
  if (frame.size() < kEthernetHeader) parse_error("Ethernet frame truncated");
  std::size_t offset = 12;
  std::uint16_t ethertype = get_be16(frame.data() + offset);
  offset += 2;
  while (ethertype == 0x8100 || ethertype == 0x88A8) {
    if (frame.size() < offset + 4) parse_error("VLAN tag truncated");
    ethertype = get_be16(frame.data() + offset + 2);
    offset += 4;
  }
  packet.ethertype = ethertype;
  packet.summary.ip_offset = offset;

  const ByteView l3 = ByteView(frame).subspan(offset);
  if (ethertype == kEthertypeIpv4) {
    if (l3.size() < 20) parse_error("IPv4 header truncated");
    packet.summary.ip_version = 4;
    packet.summary.ip_length = get_be16(l3.data() + 2);
    const auto loc = locate_transport(l3);
    packet.summary.transport_protocol = loc.protocol;
  } else if (ethertype == kEthertypeIpv6) {
    if (l3.size() < kIpv6Header) parse_error("IPv6 header truncated");
    packet.summary.ip_version = 6;
    packet.summary.ip_length = kIpv6Header + get_be16(l3.data() + 4);
    const auto loc = locate_transport(l3);
    packet.summary.transport_protocol = loc.protocol;
    if (loc.protocol == kProtoIcmpv6) {
      if (loc.offset >= l3.size()) parse_error("ICMPv6 header truncated");
      packet.summary.icmpv6_type = l3[loc.offset];
    }
  }
  packet.bytes = std::move(frame);
  return packet;
}

ByteView ip_packet(const RawPacket& packet) {
  const ByteView l3 = ByteView(packet.bytes).subspan(packet.summary.ip_offset);
  if (packet.summary.ip_version == 0) return l3;
  return l3.first(std::min(l3.size(), packet.summary.ip_length));
}

Bytes wrap_ethernet(ByteView ip) {
  Bytes frame = {0x02, 0x00, 0x00, 0x00, 0x00, 0x02, 0x02, 0x00, 0x00, 0x00, 0x00, 0x01};
  const bool v6 = !ip.empty() && (ip[0] >> 4) == 6;
  const std::uint16_t type = v6 ? kEthertypeIpv6 : kEthertypeIpv4;
  frame.push_back(static_cast<std::uint8_t>(type >> 8));
  frame.push_back(static_cast<std::uint8_t>(type));
  frame.insert(frame.end(), ip.begin(), ip.end());
  return frame;
}

FilterDecision filter_packet(const RawPacket& packet, std::size_t max_ip_length) {
  auto drop = [](FilterReason r) { return FilterDecision{false, r}; };
  if (packet.ethertype == kEthertypeArp) return drop(FilterReason::DropArp);
  const auto& s = packet.summary;
  if (s.ip_version != 4 && s.ip_version != 6) return drop(FilterReason::DropNonIp);
  if (s.ip_version == 4 && s.transport_protocol == kProtoUdp) {
    return drop(FilterReason::DropIpv4Udp);
  }
  if (s.icmpv6_type == kIcmpv6RouterSolicit) return drop(FilterReason::DropIcmpv6RouterSolicit);
  if (s.icmpv6_type == kIcmpv6RouterAdvert) return drop(FilterReason::DropIcmpv6RouterAdvert);
  if (s.ip_length > max_ip_length) return drop(FilterReason::DropOverMtu);
  return {true, FilterReason::Kept};
}

Bytes strip_headers(ByteView ip) {
  const TransportLocation loc = locate_transport(ip);
  std::size_t offset = loc.offset;
  if (loc.protocol == kProtoTcp) {
    if (offset + 20 > ip.size()) parse_error("TCP header truncated");
    const std::size_t data_offset = static_cast<std::size_t>(ip[offset + 12] >> 4) * 4;
    if (data_offset < 20) parse_error("TCP data offset below 5");
    if (offset + data_offset > ip.size()) parse_error("TCP header longer than packet");
    offset += data_offset;
  } else if (loc.protocol == kProtoUdp) {
    if (offset + 8 > ip.size()) parse_error("UDP header truncated");
    offset += 8;
  }
  if (offset >= ip.size()) throw Error(Errc::EmptyPayload, "no payload after headers");
  return Bytes(ip.begin() + static_cast<std::ptrdiff_t>(offset), ip.end());
}

}  // namespace fpe::traffic
