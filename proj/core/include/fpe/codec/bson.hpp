#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <variant>

#include "fpe/bytes.hpp"

namespace fpe::codec {

inline constexpr std::size_t kMaxInnerPacket = 1280;

/// Scalar values allowed in the header sub-document, mapped onto the BSON
/// element types int32 (0x10), int64 (0x12), double (0x01), boolean (0x08)
/// and UTF-8 string (0x02).
using HeaderValue = std::variant<std::int32_t, std::int64_t, double, bool, std::string>;
/// Keys are emitted in lexicographic order, so equal maps encode identically.
using HeaderInfo = std::map<std::string, HeaderValue>;

/// {"t": epoch_seconds (int64, low 32 bits), "v": 1 (int32)}.
HeaderInfo default_header_info(std::uint32_t epoch_seconds);

struct InnerDocument {
  Bytes packet;
  HeaderInfo header_info;

  bool operator==(const InnerDocument&) const = default;
};

/// Canonical two-element document {"h": <header_info>, "p": <binary packet>}.
/// Throws EmptyPacket / PacketTooLarge when the packet is outside [1, 1280].
Bytes encode_document(ByteView packet, const HeaderInfo& header_info);

/// Strict inverse of encode_document; anything else is MalformedFrame.
InnerDocument decode_document(ByteView document);

}  // namespace fpe::codec
