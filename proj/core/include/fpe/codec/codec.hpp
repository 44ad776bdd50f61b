#pragma once

#include <cstddef>

#include "fpe/bytes.hpp"
#include "fpe/codec/aes_gcm_siv.hpp"
#include "fpe/codec/bson.hpp"
#include "fpe/codec/frame.hpp"
#include "fpe/random.hpp"

namespace fpe::codec {

/// Wire bytes added on top of the padded frame: authentication tag + nonce.
inline constexpr std::size_t kWireOverhead = kTagSize + kNonceSize;

/// One ACC frame on the wire: AES-256-GCM-SIV(pad_frame(encode_document))
/// followed by the 12-byte nonce. Associated data is empty.
Bytes encapsulate(ByteView packet, const HeaderInfo& header_info, const SessionKey& key,
                  RandomSource& rng);
/// As above, drawing padding and the nonce from separate streams.
Bytes encapsulate(ByteView packet, const HeaderInfo& header_info, const SessionKey& key,
                  RandomSource& pad_rng, RandomSource& nonce_rng);

/// Receiver side: TooShort, AuthFailure, or MalformedFrame on bad input.
InnerDocument decapsulate(ByteView wire, const SessionKey& key);

}  // namespace fpe::codec
