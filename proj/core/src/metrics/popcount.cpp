#include <bit>

#include "fpe/error.hpp"
#include "fpe/metrics/metrics.hpp"

namespace fpe::metrics {

double avg_popcount(ByteView packet) {
  if (packet.empty()) throw Error(Errc::Empty, "popcount of an empty packet");
  std::uint64_t bits = 0;
  for (std::uint8_t b : packet) bits += static_cast<std::uint64_t>(std::popcount(b));
  return static_cast<double>(bits) / static_cast<double>(packet.size());
}

PopcountVerdict popcount_block(ByteView packet, const PopcountThresholds& thresholds) {
  PopcountVerdict v;
  v.thresholds = thresholds;
  v.avg_popcount = avg_popcount(packet);
  v.blocked = thresholds.inclusive
                  ? (v.avg_popcount >= thresholds.low && v.avg_popcount <= thresholds.high)
                  : (v.avg_popcount > thresholds.low && v.avg_popcount < thresholds.high);
  return v;
}

}  // namespace fpe::metrics
