#include "fpe/codec/bson.hpp"

#include <bit>
#include <cstring>
#include <limits>

#include "fpe/error.hpp"

namespace fpe::codec {

namespace {

enum : std::uint8_t {
  kDouble = 0x01,
  kString = 0x02,
  kDocument = 0x03,
  kBinary = 0x05,
  kBool = 0x08,
  kInt32 = 0x10,
  kInt64 = 0x12,
};

void put_cstring(Bytes& out, const std::string& s) {
  if (s.find('\0') != std::string::npos) {
    throw Error(Errc::MalformedFrame, "BSON key contains a NUL byte");
  }
  out.insert(out.end(), s.begin(), s.end());
  out.push_back(0);
}

void patch_length(Bytes& out, std::size_t start) {
  const auto len = static_cast<std::uint32_t>(out.size() - start);
  for (int i = 0; i < 4; ++i) out[start + i] = static_cast<std::uint8_t>(len >> (8 * i));
}

void encode_header(Bytes& out, const HeaderInfo& header) {
  const std::size_t start = out.size();
  put_le32(out, 0);
  for (const auto& [key, value] : header) {
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, std::int32_t>) {
            out.push_back(kInt32);
            put_cstring(out, key);
            put_le32(out, static_cast<std::uint32_t>(v));
          } else if constexpr (std::is_same_v<T, std::int64_t>) {
            out.push_back(kInt64);
            put_cstring(out, key);
            put_le64(out, static_cast<std::uint64_t>(v));
          } else if constexpr (std::is_same_v<T, double>) {
            out.push_back(kDouble);
            put_cstring(out, key);
            put_le64(out, std::bit_cast<std::uint64_t>(v));
          } else if constexpr (std::is_same_v<T, bool>) {
            out.push_back(kBool);
            put_cstring(out, key);
            out.push_back(v ? 1 : 0);
          } else {
            out.push_back(kString);
            put_cstring(out, key);
            put_le32(out, static_cast<std::uint32_t>(v.size() + 1));
            out.insert(out.end(), v.begin(), v.end());
            out.push_back(0);
          }
        },
        value);
  }
  out.push_back(0);
  patch_length(out, start);
}

class Reader {
 public:
  explicit Reader(ByteView data) : data_(data) {}

  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t pos() const { return pos_; }

  void need(std::size_t n) const {
    if (remaining() < n) throw Error(Errc::MalformedFrame, "BSON document truncated");
  }
  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    const auto v = get_le32(data_.data() + pos_);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    const auto v = get_le64(data_.data() + pos_);
    pos_ += 8;
    return v;
  }
  std::string cstring() {
    const auto* begin = data_.data() + pos_;
    const auto* nul = static_cast<const std::uint8_t*>(std::memchr(begin, 0, remaining()));
    if (nul == nullptr) throw Error(Errc::MalformedFrame, "unterminated BSON key");
    std::string s(reinterpret_cast<const char*>(begin), static_cast<std::size_t>(nul - begin));
    pos_ += s.size() + 1;
    return s;
  }
  ByteView take(std::size_t n) {
    need(n);
    auto view = data_.subspan(pos_, n);
    pos_ += n;
    return view;
  }

 private:
  ByteView data_;
  std::size_t pos_ = 0;
};

HeaderInfo decode_header(Reader& r) {
  const std::size_t start = r.pos();
  const std::uint32_t len = r.u32();
  if (len < 5) throw Error(Errc::MalformedFrame, "header sub-document length too small");
  r.need(len - 4);
  const std::size_t end = start + len;
  HeaderInfo header;
  for (;;) {
    const std::uint8_t type = r.u8();
    if (type == 0) break;
    std::string key = r.cstring();
    HeaderValue value;
    switch (type) {
      case kInt32: value = static_cast<std::int32_t>(r.u32()); break;
      case kInt64: value = static_cast<std::int64_t>(r.u64()); break;
      case kDouble: value = std::bit_cast<double>(r.u64()); break;
      case kBool: {
        const auto b = r.u8();
        if (b > 1) throw Error(Errc::MalformedFrame, "invalid BSON boolean");
        value = b == 1;
        break;
      }
      case kString: {
        const std::uint32_t slen = r.u32();
        if (slen == 0) throw Error(Errc::MalformedFrame, "invalid BSON string length");
        const auto bytes = r.take(slen);
        if (bytes.back() != 0) throw Error(Errc::MalformedFrame, "unterminated BSON string");
        value = std::string(reinterpret_cast<const char*>(bytes.data()), slen - 1);
        break;
      }
      default:
        throw Error(Errc::MalformedFrame, "unsupported BSON element type in header");
    }
    if (!header.emplace(std::move(key), std::move(value)).second) {
      throw Error(Errc::MalformedFrame, "duplicate header key");
    }
  }
  if (r.pos() != end) throw Error(Errc::MalformedFrame, "header sub-document length mismatch");
  return header;
}

}  // namespace

HeaderInfo default_header_info(std::uint32_t epoch_seconds) {
  return {{"t", static_cast<std::int64_t>(epoch_seconds)}, {"v", std::int32_t{1}}};
}

Bytes encode_document(ByteView packet, const HeaderInfo& header_info) {
  if (packet.empty()) throw Error(Errc::EmptyPacket, "inner packet is empty");
  if (packet.size() > kMaxInnerPacket) {
    throw Error(Errc::PacketTooLarge,
                "inner packet of " + std::to_string(packet.size()) + " bytes exceeds 1280");
  }
  Bytes out;
  out.reserve(packet.size() + 64);
  put_le32(out, 0);
  out.push_back(kDocument);
  out.push_back('h');
  out.push_back(0);
  encode_header(out, header_info);
  out.push_back(kBinary);
  out.push_back('p');
  out.push_back(0);
  put_le32(out, static_cast<std::uint32_t>(packet.size()));
  out.push_back(0x00);  // generic binary subtype
  out.insert(out.end(), packet.begin(), packet.end());
  out.push_back(0);
  patch_length(out, 0);
  return out;
}

InnerDocument decode_document(ByteView document) {
  Reader r(document);
  const std::uint32_t len = r.u32();
  if (len != document.size()) throw Error(Errc::MalformedFrame, "BSON length prefix mismatch");

  if (r.u8() != kDocument || r.cstring() != "h") {
    throw Error(Errc::MalformedFrame, "expected header sub-document \"h\"");
  }
  InnerDocument doc;
  doc.header_info = decode_header(r);

  if (r.u8() != kBinary || r.cstring() != "p") {
    throw Error(Errc::MalformedFrame, "expected binary element \"p\"");
  }
  const std::uint32_t plen = r.u32();
  r.u8();  // subtype
  if (plen == 0 || plen > kMaxInnerPacket) {
    throw Error(Errc::MalformedFrame, "packet length outside [1, 1280]");
  }
  const auto payload = r.take(plen);
  doc.packet.assign(payload.begin(), payload.end());
  if (r.u8() != 0 || r.remaining() != 0) {
    throw Error(Errc::MalformedFrame, "trailing bytes after BSON document");
  }
  return doc;
}

}  // namespace fpe::codec
