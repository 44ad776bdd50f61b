#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fpe/bytes.hpp"
#include "fpe/traffic/packet.hpp"

namespace fpe::traffic {

struct CapturedFrame {
  std::uint32_t link_type = 1;  // LINKTYPE_* value from the capture file
  Bytes data;
};

/// Reads every frame of a classic pcap (either byte order, micro- or
/// nanosecond) or pcapng file. Throws Error{IoError} or Error{ParseError}.
std::vector<CapturedFrame> read_capture(const std::filesystem::path& path);
std::vector<CapturedFrame> parse_capture(ByteView file_bytes);

/// Writes Ethernet frames as a little-endian microsecond pcap file.
void write_pcap(const std::filesystem::path& path, std::span<const Bytes> frames);

struct IngestStats {
  std::size_t frames = 0;
  std::size_t unparseable = 0;
  std::size_t non_ethernet = 0;
  std::size_t kept_by_filter = 0;
  std::size_t kept_after_downsample = 0;
  std::size_t drops_by_reason[7] = {};  // indexed by FilterReason
};

struct IngestResult {
  std::vector<Bytes> ip_packets;
  IngestStats stats;
};

/// Filters each frame, extracts its IP packet and downsamples the survivors.
/// Truncated frames are counted as unparseable rather than aborting the run.
IngestResult ingest_frames(std::span<const CapturedFrame> frames, double keep_fraction,
                           std::uint64_t seed, std::size_t max_ip_length = kAccMtu);

}  // namespace fpe::traffic
