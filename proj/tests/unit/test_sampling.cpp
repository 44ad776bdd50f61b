#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>

#include "fpe/error.hpp"
#include "fpe/random.hpp"
#include "fpe/traffic/sampling.hpp"

using namespace fpe;
using namespace fpe::traffic;

TEST(Downsample, BinomialCountWithinThreeSigma) {
  Prng rng(2024);
  const std::size_t n = 4'000'000;
  const auto idx = downsample_indices(n, 0.125, rng);
  const double sigma = std::sqrt(n * 0.125 * 0.875);
  EXPECT_NEAR(static_cast<double>(idx.size()), 500000.0, 3 * sigma);
  EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
  EXPECT_LT(idx.back(), n);
}

TEST(Downsample, KeepAllAndBadFraction) {
  Prng rng(1);
  EXPECT_EQ(downsample_indices(1000, 1.0, rng).size(), 1000u);
  EXPECT_THROW(downsample_indices(10, 0.0, rng), std::invalid_argument);
  EXPECT_THROW(downsample_indices(10, 1.5, rng), std::invalid_argument);
}

TEST(Downsample, PreservesOrderAndIsDeterministic) {
  std::vector<Bytes> packets;
  for (int i = 0; i < 500; ++i) packets.push_back(Bytes{static_cast<std::uint8_t>(i >> 8), static_cast<std::uint8_t>(i)});
  Prng a(9), b(9);
  const auto x = downsample(packets, 0.3, a);
  EXPECT_EQ(x, downsample(packets, 0.3, b));
  for (std::size_t i = 1; i < x.size(); ++i) EXPECT_LT(x[i - 1], x[i]);
}

TEST(SizeDistribution, EmpiricalFrequencies) {
  SizeDistribution dist({100, 100, 200});
  EXPECT_EQ(dist.total_bytes(), 400u);
  EXPECT_NEAR(dist.mean(), 400.0 / 3, 1e-12);
  Prng rng(3);
  int hundred = 0;
  const int n = 30000;
  for (int i = 0; i < n; ++i) hundred += dist.sample(rng) == 100;
  EXPECT_NEAR(hundred / static_cast<double>(n), 2.0 / 3, 0.02);
}

TEST(SizeDistribution, EmptyOrZeroRejected) {
  try {
    SizeDistribution d({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyInput);
  }
  EXPECT_THROW(SizeDistribution({5, 0}), Error);
}

TEST(RandomPackets, LengthsPassKolmogorovSmirnov) {
  std::vector<Bytes> source;
  Prng shape(11);
  for (int i = 0; i < 2000; ++i) source.emplace_back(1 + shape.uniform_below(1 + shape.uniform_below(1280)));
  const auto dist = build_size_distribution(source);

  SecureRng rng(5, "random-packets");
  const std::size_t n = 50000;
  const auto made = gen_random_packets(dist, n, rng);
  ASSERT_EQ(made.size(), n);

  std::map<std::size_t, double> want, got;
  for (auto len : dist.lengths()) want[len] += 1.0 / static_cast<double>(dist.size());
  for (const auto& p : made) got[p.size()] += 1.0 / static_cast<double>(n);
  for (const auto& [len, _] : got) ASSERT_TRUE(want.count(len)) << len;

  double fw = 0, fg = 0, d = 0;
  for (const auto& [len, w] : want) {
    fw += w;
    fg += got[len];
    d = std::max(d, std::abs(fw - fg));
  }
  // alpha = 0.001 critical value; conservative for discrete support
  EXPECT_LT(d, 1.95 / std::sqrt(static_cast<double>(n)));
}

TEST(RandomPackets, ContentIsUniform) {
  SizeDistribution dist({1000});
  SecureRng rng(8, "random-packets");
  const auto made = gen_random_packets(dist, 2000, rng);
  std::uint64_t bits = 0, bytes = 0;
  for (const auto& p : made) {
    for (auto b : p) bits += static_cast<unsigned>(std::popcount(b));
    bytes += p.size();
  }
  const double avg = static_cast<double>(bits) / static_cast<double>(bytes);
  EXPECT_GE(avg, 3.98);
  EXPECT_LE(avg, 4.02);
  EXPECT_THROW(gen_random_packets(dist, 0, rng), Error);
}

TEST(RandomPackets, SeededStreamsReproduce) {
  SizeDistribution dist({10, 20, 30});
  SecureRng a(1, "random-packets"), b(1, "random-packets"), c(2, "random-packets");
  const auto x = gen_random_packets(dist, 50, a);
  EXPECT_EQ(x, gen_random_packets(dist, 50, b));
  EXPECT_NE(x, gen_random_packets(dist, 50, c));
}
