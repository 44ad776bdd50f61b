#include <benchmark/benchmark.h>

#include <array>
#include <numeric>

#include "fpe/codec/aes_gcm_siv.hpp"
#include "fpe/codec/codec.hpp"
#include "fpe/experiment/pipeline.hpp"
#include "fpe/ml/model.hpp"
#include "fpe/random.hpp"
#include "fpe/traffic/packet.hpp"
#include "fpe/traffic/synthetic.hpp"

using namespace fpe;

namespace {

// Stripped payloads against their encapsulations, the vs-network setup at
// a size that trains in a couple of seconds.
struct NetworkData {
  std::vector<dataset::LabeledVector> train;
  std::vector<dataset::LabeledVector> probe;
};

const NetworkData& network_data() {
  static const NetworkData data = [] {
    Prng rng(1);
    const auto traffic = traffic::gen_synthetic_traffic(traffic::TrafficMix{}, 4000, rng);
    const auto acc = experiment::encapsulate_corpus(traffic, 1, 1700000000);
    NetworkData d;
    for (std::size_t i = 0; i < traffic.size(); ++i) {
      d.train.push_back(dataset::vectorize(traffic::strip_headers(traffic[i]), 0));
      d.train.push_back(dataset::vectorize(acc[i], 1));
    }
    d.probe = d.train;
    return d;
  }();
  return data;
}

void BM_TreePredict(benchmark::State& state) {
  const auto& d = network_data();
  const auto model = ml::train(ml::Hyperparams::defaults(ml::Algorithm::DecisionTree), d.train, 1);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.predict(d.probe[i].features));
    if (++i == d.probe.size()) i = 0;
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(BM_TreePredict);

void BM_TreePredictBatch(benchmark::State& state) {
  const auto& d = network_data();
  const auto model = ml::train(ml::Hyperparams::defaults(ml::Algorithm::DecisionTree), d.train, 1);
  const auto threads = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(model.predict_batch(d.probe, threads));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * d.probe.size()));
}
BENCHMARK(BM_TreePredictBatch)->Arg(1)->Arg(4)->UseRealTime();

void BM_KnnPredictBatch(benchmark::State& state) {
  const auto& d = network_data();
  auto hp = ml::Hyperparams::defaults(ml::Algorithm::Knn);
  const auto model = ml::train(hp, d.train, 1);
  const std::span<const dataset::LabeledVector> q(d.probe.data(), 512);
  for (auto _ : state) benchmark::DoNotOptimize(model.predict_batch(q, 1));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * q.size()));
}
BENCHMARK(BM_KnnPredictBatch)->Unit(benchmark::kMillisecond);

void BM_Encapsulate(benchmark::State& state) {
  SecureRng rng(1, "bench");
  const auto key = codec::SessionKey::generate(rng);
  Bytes packet(static_cast<std::size_t>(state.range(0)));
  rng.fill(packet);
  const auto header = codec::default_header_info(1700000000);
  for (auto _ : state) benchmark::DoNotOptimize(codec::encapsulate(packet, header, key, rng));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * packet.size()));
}
BENCHMARK(BM_Encapsulate)->Arg(64)->Arg(576)->Arg(1280);

void BM_Decapsulate(benchmark::State& state) {
  SecureRng rng(2, "bench");
  const auto key = codec::SessionKey::generate(rng);
  Bytes packet(1280);
  rng.fill(packet);
  const Bytes wire = codec::encapsulate(packet, codec::default_header_info(1700000000), key, rng);
  for (auto _ : state) benchmark::DoNotOptimize(codec::decapsulate(wire, key));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * packet.size()));
}
BENCHMARK(BM_Decapsulate);

void BM_Polyval(benchmark::State& state) {
  std::array<std::uint8_t, 16> h{};
  std::iota(h.begin(), h.end(), std::uint8_t{1});
  Bytes blocks(static_cast<std::size_t>(state.range(0)), 0x5a);
  for (auto _ : state) benchmark::DoNotOptimize(codec::polyval(h, blocks));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * blocks.size()));
}
BENCHMARK(BM_Polyval)->Arg(16)->Arg(1024)->Arg(16384);

void BM_SecureRng(benchmark::State& state) {
  SecureRng rng(3, "bench");
  Bytes buf(4096);
  for (auto _ : state) {
    rng.fill(buf);
    benchmark::DoNotOptimize(buf.data());
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * buf.size()));
}
BENCHMARK(BM_SecureRng);

}  // namespace

BENCHMARK_MAIN();
