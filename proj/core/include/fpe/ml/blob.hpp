#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>

#include "fpe/bytes.hpp"
#include "fpe/error.hpp"

namespace fpe::ml {

/// Little-endian append-only encoder for model parameter blobs.
class BlobWriter {
 public:
  explicit BlobWriter(Bytes& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { put_le16(out_, v); }
  void u32(std::uint32_t v) { put_le32(out_, v); }
  void u64(std::uint64_t v) { put_le64(out_, v); }
  void f32(float v) { put_le32(out_, std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { put_le64(out_, std::bit_cast<std::uint64_t>(v)); }
  void bytes(ByteView b) { out_.insert(out_.end(), b.begin(), b.end()); }

 private:
  Bytes& out_;
};

/// Counterpart of BlobWriter; any overrun is Error{BadModel}.
class BlobReader {
 public:
  explicit BlobReader(ByteView data) : data_(data) {}

  std::uint8_t u8() { return *take(1).data(); }
  std::uint16_t u16() { return get_le16(take(2).data()); }
  std::uint32_t u32() { return get_le32(take(4).data()); }
  std::uint64_t u64() { return get_le64(take(8).data()); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  ByteView take(std::size_t n) {
    if (n > data_.size() - pos_) throw Error(Errc::BadModel, "model blob truncated");
    auto view = data_.subspan(pos_, n);
    pos_ += n;
    return view;
  }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  ByteView data_;
  std::size_t pos_ = 0;
};

}  // namespace fpe::ml
