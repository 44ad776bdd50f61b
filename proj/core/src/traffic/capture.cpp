#include "fpe/traffic/capture.hpp"

#include <fstream>
#include <iterator>

#include "fpe/error.hpp"
#include "fpe/random.hpp"
#include "fpe/traffic/sampling.hpp"

namespace fpe::traffic {

namespace {

constexpr std::uint32_t kPcapMagicMicro = 0xA1B2C3D4;
constexpr std::uint32_t kPcapMagicNano = 0xA1B23C4D;
constexpr std::uint32_t kPcapngSectionHeader = 0x0A0D0D0A;
constexpr std::uint32_t kPcapngByteOrder = 0x1A2B3C4D;

[[noreturn]] void parse_error(const std::string& what) { throw Error(Errc::ParseError, what); }

std::uint32_t swap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xff00) | ((v << 8) & 0xff0000) | (v << 24);
}

struct Cursor {
  ByteView data;
  bool swapped = false;

  std::uint32_t u32(std::size_t at) const {
    if (at + 4 > data.size()) parse_error("capture file truncated");
    const std::uint32_t v = get_le32(data.data() + at);
    return swapped ? swap32(v) : v;
  }
  std::uint16_t u16(std::size_t at) const {
    if (at + 2 > data.size()) parse_error("capture file truncated");
    const std::uint16_t v = get_le16(data.data() + at);
    return swapped ? static_cast<std::uint16_t>((v >> 8) | (v << 8)) : v;
  }
};

std::vector<CapturedFrame> parse_pcap(ByteView bytes) {
  Cursor c{bytes};
  const std::uint32_t magic = get_le32(bytes.data());
  if (magic == kPcapMagicMicro || magic == kPcapMagicNano) {
    c.swapped = false;
  } else if (swap32(magic) == kPcapMagicMicro || swap32(magic) == kPcapMagicNano) {
    c.swapped = true;
  } else {
    parse_error("not a pcap file");
  }
  if (bytes.size() < 24) parse_error("pcap global header truncated");
  const std::uint32_t link_type = c.u32(20) & 0x0FFFFFFF;
  std::vector<CapturedFrame> frames;
  std::size_t off = 24;
  while (off < bytes.size()) {
    if (off + 16 > bytes.size()) parse_error("pcap record header truncated");
    const std::uint32_t incl = c.u32(off + 8);
    off += 16;
    if (incl > bytes.size() - off) parse_error("pcap record data truncated");
    frames.push_back({link_type, Bytes(bytes.begin() + static_cast<std::ptrdiff_t>(off),
                                       bytes.begin() + static_cast<std::ptrdiff_t>(off + incl))});
    off += incl;
  }
  return frames;
}

std::vector<CapturedFrame> parse_pcapng(ByteView bytes) {
  Cursor c{bytes};
  std::vector<std::uint32_t> interfaces;
  std::vector<CapturedFrame> frames;
  std::size_t off = 0;
  while (off < bytes.size()) {
    if (off + 12 > bytes.size()) parse_error("pcapng block truncated");
    const std::uint32_t raw_type = get_le32(bytes.data() + off);
    if (raw_type == kPcapngSectionHeader) {
      const std::uint32_t bom = get_le32(bytes.data() + off + 8);
      if (bom == kPcapngByteOrder) {
        c.swapped = false;
      } else if (swap32(bom) == kPcapngByteOrder) {
        c.swapped = true;
      } else {
        parse_error("pcapng byte-order magic invalid");
      }
      interfaces.clear();
    } else if (off == 0) {
      parse_error("pcapng file does not start with a section header");
    }
    const std::uint32_t type = c.u32(off);
    const std::uint32_t len = c.u32(off + 4);
    if (len < 12 || len % 4 != 0 || len > bytes.size() - off) parse_error("pcapng block length invalid");
    if (c.u32(off + len - 4) != len) parse_error("pcapng trailing block length mismatch");
    const std::size_t body = off + 8;
    switch (type) {
      case 0x00000001:  // interface description
        interfaces.push_back(c.u16(body));
        break;
      case 0x00000006: {  // enhanced packet
        const std::uint32_t iface = c.u32(body);
        const std::uint32_t captured = c.u32(body + 12);
        if (iface >= interfaces.size()) parse_error("pcapng packet references unknown interface");
        if (body + 20 + captured > off + len - 4) parse_error("pcapng packet data overruns block");
        const auto* p = bytes.data() + body + 20;
        frames.push_back({interfaces[iface], Bytes(p, p + captured)});
        break;
      }
      case 0x00000003: {  // simple packet: data runs to the end of the block
        if (interfaces.empty()) parse_error("pcapng simple packet without interface");
        const std::uint32_t original = c.u32(body);
        const std::size_t room = len - 16;
        const std::size_t captured = std::min<std::size_t>(original, room);
        const auto* p = bytes.data() + body + 4;
        frames.push_back({interfaces[0], Bytes(p, p + captured)});
        break;
      }
      default:
        break;
    }
    off += len;
  }
  return frames;
}

}  // namespace

std::vector<CapturedFrame> parse_capture(ByteView bytes) {
  if (bytes.size() < 4) parse_error("capture file too short");
  if (get_le32(bytes.data()) == kPcapngSectionHeader) return parse_pcapng(bytes);
  return parse_pcap(bytes);
}

std::vector<CapturedFrame> read_capture(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open capture file " + path.string());
  const Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_capture(bytes);
}

void write_pcap(const std::filesystem::path& path, std::span<const Bytes> frames) {
  Bytes out;
  put_le32(out, kPcapMagicMicro);
  put_le16(out, 2);
  put_le16(out, 4);
  put_le32(out, 0);  // thiszone
  put_le32(out, 0);  // sigfigs
  put_le32(out, 65535);
  put_le32(out, static_cast<std::uint32_t>(LinkType::Ethernet));
  std::uint32_t ts = 0;
  for (const auto& frame : frames) {
    put_le32(out, ts++);
    put_le32(out, 0);
    put_le32(out, static_cast<std::uint32_t>(frame.size()));
    put_le32(out, static_cast<std::uint32_t>(frame.size()));
    out.insert(out.end(), frame.begin(), frame.end());
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::IoError, "cannot create capture file " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(Errc::IoError, "write failed for " + path.string());
}

IngestResult ingest_frames(std::span<const CapturedFrame> frames, double keep_fraction,
                           std::uint64_t seed, std::size_t max_ip_length) {
  IngestResult result;
  result.stats.frames = frames.size();
  std::vector<Bytes> kept;
  for (const auto& frame : frames) {
    if (frame.link_type != static_cast<std::uint32_t>(LinkType::Ethernet)) {
      ++result.stats.non_ethernet;
      continue;
    }
    RawPacket packet;
    try {
      packet = parse_frame(frame.data);
    } catch (const Error&) {
      ++result.stats.unparseable;
      continue;
    }
    const FilterDecision decision = filter_packet(packet, max_ip_length);
    ++result.stats.drops_by_reason[static_cast<int>(decision.reason)];
    if (!decision.keep) continue;
    const ByteView ip = ip_packet(packet);
    kept.emplace_back(ip.begin(), ip.end());
  }
  result.stats.kept_by_filter = kept.size();
  Prng rng(seed);
  result.ip_packets = downsample(std::span<const Bytes>(kept), keep_fraction, rng);
  result.stats.kept_after_downsample = result.ip_packets.size();
  return result;
}

}  // namespace fpe::traffic
