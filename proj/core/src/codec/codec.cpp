#include "fpe/codec/codec.hpp"

#include <algorithm>

#include "fpe/error.hpp"

namespace fpe::codec {

Bytes encapsulate(ByteView packet, const HeaderInfo& header_info, const SessionKey& key,
                  RandomSource& rng) {
  return encapsulate(packet, header_info, key, rng, rng);
}

Bytes encapsulate(ByteView packet, const HeaderInfo& header_info, const SessionKey& key,
                  RandomSource& pad_rng, RandomSource& nonce_rng) {
  const Bytes doc = encode_document(packet, header_info);
  const Bytes frame = pad_frame(doc, pad_rng);
  Nonce nonce{};
  nonce_rng.fill(nonce);
  Bytes wire = gcm_siv_seal(key, nonce, frame);
  wire.insert(wire.end(), nonce.begin(), nonce.end());
  return wire;
}

InnerDocument decapsulate(ByteView wire, const SessionKey& key) {
  if (wire.size() < kWireOverhead) {
    throw Error(Errc::TooShort, "wire packet of " + std::to_string(wire.size()) +
                                    " bytes is shorter than tag + nonce");
  }
  Nonce nonce{};
  std::copy(wire.end() - kNonceSize, wire.end(), nonce.begin());
  const Bytes frame = gcm_siv_open(key, nonce, wire.first(wire.size() - kNonceSize));
  return decode_document(unpad_frame(frame));
}

}  // namespace fpe::codec
