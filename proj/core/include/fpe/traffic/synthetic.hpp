#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "fpe/bytes.hpp"
#include "fpe/random.hpp"

namespace fpe::traffic {

enum class TrafficFamily { Http, Tls, DnsTcp, SmallControl };

/// Relative weights of the synthetic traffic families. The default leans
/// towards a small web server: mostly HTTP and TLS with some DNS-over-TCP
/// and short control exchanges.
struct TrafficMix {
  double http = 0.45;
  double tls = 0.35;
  double dns_tcp = 0.10;
  double smallctl = 0.10;

  /// Parses "http=0.45,tls=0.35,..." (':' also accepted as separator).
  /// Unlisted families get weight 0. Throws Error{BadWeights}.
  static TrafficMix parse(std::string_view text);
  std::string to_string() const;
  void validate() const;

  bool operator==(const TrafficMix&) const = default;
};

/// Application payload of one family, at most max_payload bytes (>= 64).
Bytes gen_payload(TrafficFamily family, std::size_t max_payload, RandomSource& rng);

/// Full IPv4/IPv6 + TCP packets carrying synthetic payloads; every packet's
/// IP length is at most max_ip_length.
std::vector<Bytes> gen_synthetic_traffic(const TrafficMix& mix, std::size_t count,
                                         RandomSource& rng, std::size_t max_ip_length = 1280);

}  // namespace fpe::traffic
