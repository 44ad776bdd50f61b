#include "fpe/codec/frame.hpp"

#include <algorithm>
#include <stdexcept>

#include "fpe/error.hpp"

namespace fpe::codec {

namespace {

void append_padding(Bytes& out, std::size_t n, RandomSource& rng) {
  while (n > 0) {
    std::uint64_t word = rng.next_u64();
    for (int i = 0; i < 8 && n > 0; ++i, word >>= 8) {
      const auto b = static_cast<std::uint8_t>(word);
      if (b == kOpenDelimiter || b == kCloseDelimiter) continue;
      out.push_back(b);
      --n;
    }
  }
}

}  // namespace

Bytes assemble_frame(ByteView doc, std::size_t front_len, std::size_t rear_len,
                     RandomSource& rng) {
  if (doc.empty()) throw std::invalid_argument("assemble_frame: empty document");
  if (front_len < kMinPad || front_len > kMaxPad || rear_len < kMinPad || rear_len > kMaxPad) {
    throw std::invalid_argument("assemble_frame: pad length outside [2, 32]");
  }
  Bytes out;
  out.reserve(doc.size() + front_len + rear_len + 2);
  append_padding(out, front_len, rng);
  out.push_back(kOpenDelimiter);
  out.insert(out.end(), doc.begin(), doc.end());
  out.push_back(kCloseDelimiter);
  append_padding(out, rear_len, rng);
  return out;
}

Bytes pad_frame(ByteView doc, RandomSource& rng) {
  constexpr std::uint64_t kSpan = kMaxPad - kMinPad + 1;
  const std::size_t front = kMinPad + rng.uniform_below(kSpan);
  const std::size_t rear = kMinPad + rng.uniform_below(kSpan);
  return assemble_frame(doc, front, rear, rng);
}

Bytes unpad_frame(ByteView frame) {
  const auto open = std::find(frame.begin(), frame.end(), kOpenDelimiter);
  if (open == frame.end()) throw Error(Errc::MalformedFrame, "no opening delimiter");
  const auto start = static_cast<std::size_t>(open - frame.begin()) + 1;
  if (frame.size() - start < 4) throw Error(Errc::MalformedFrame, "truncated length prefix");
  const std::uint32_t doc_len = get_le32(frame.data() + start);
  if (doc_len < 5 || doc_len > frame.size() - start) {
    throw Error(Errc::MalformedFrame, "document length prefix overruns the frame");
  }
  if (start + doc_len >= frame.size() || frame[start + doc_len] != kCloseDelimiter) {
    throw Error(Errc::MalformedFrame, "closing delimiter missing");
  }
  return Bytes(frame.begin() + static_cast<std::ptrdiff_t>(start),
               frame.begin() + static_cast<std::ptrdiff_t>(start + doc_len));
}

}  // namespace fpe::codec
