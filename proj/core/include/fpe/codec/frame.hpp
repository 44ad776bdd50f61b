#pragma once

#include <cstddef>
#include <cstdint>

#include "fpe/bytes.hpp"
#include "fpe/random.hpp"

namespace fpe::codec {

inline constexpr std::uint8_t kOpenDelimiter = 0x7B;   // '{'
inline constexpr std::uint8_t kCloseDelimiter = 0x7D;  // '}'
inline constexpr std::size_t kMinPad = 2;
inline constexpr std::size_t kMaxPad = 32;

/// front_pad || '{' || doc || '}' || rear_pad with pad lengths drawn
/// uniformly from [2, 32]. Pad bytes never equal either delimiter.
Bytes pad_frame(ByteView doc, RandomSource& rng);

/// Same layout with caller-chosen pad lengths (each in [2, 32]); only the
/// pad contents are random.
Bytes assemble_frame(ByteView doc, std::size_t front_len, std::size_t rear_len,
                     RandomSource& rng);

/// Recovers the document: first '{', then the BSON length prefix, then the
/// closing '}'. Throws Error{MalformedFrame}.
Bytes unpad_frame(ByteView frame);

}  // namespace fpe::codec
