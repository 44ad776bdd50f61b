#include "fpe/experiment/pipeline.hpp"

#include <fmt/format.h>

#include <bit>
#include <chrono>
#include <utility>

#include "fpe/codec/codec.hpp"
#include "fpe/error.hpp"
#include "fpe/random.hpp"
#include "fpe/traffic/packet.hpp"
#include "fpe/traffic/sampling.hpp"
#include "fpe/traffic/synthetic.hpp"

namespace fpe::experiment {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs one stage and prefixes any library error with the stage name.
template <typename F>
auto stage(const char* name, const RunOptions& opts, F&& body) {
  if (opts.verbose) fmt::print(stderr, "[{}] ...\n", name);
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("[{}] {}", name, e.detail()));
  }
}

void persist(const RunOptions& opts, const char* file, const dataset::Dataset& ds) {
  if (!opts.stage_dir) return;
  std::filesystem::create_directories(*opts.stage_dir);
  dataset::save(ds, *opts.stage_dir / file);
}

}  // namespace

StageSeeds::StageSeeds(std::uint64_t master_seed)
    : traffic(derive_stream_seed(master_seed, "traffic")),
      downsample(derive_stream_seed(master_seed, "downsample")),
      shuffle(derive_stream_seed(master_seed, "shuffle")),
      split(derive_stream_seed(master_seed, "split")),
      master(master_seed) {}

std::uint64_t StageSeeds::model(ml::Algorithm algorithm) const {
  return derive_stream_seed(master, "model/" + std::string(ml::to_string(algorithm)));
}

CorpusSummary summarize(std::span<const Bytes> packets) {
  CorpusSummary s;
  s.count = packets.size();
  if (packets.empty()) return s;
  std::uint64_t bytes = 0, bits = 0;
  s.min_length = packets.front().size();
  for (const Bytes& p : packets) {
    s.min_length = std::min(s.min_length, p.size());
    s.max_length = std::max(s.max_length, p.size());
    bytes += p.size();
    for (std::uint8_t b : p) bits += static_cast<std::uint64_t>(std::popcount(b));
  }
  s.mean_length = static_cast<double>(bytes) / static_cast<double>(packets.size());
  s.mean_popcount = bytes == 0 ? 0.0 : static_cast<double>(bits) / static_cast<double>(bytes);
  return s;
}

std::vector<Bytes> collect_traffic(const ExperimentConfig& cfg, const StageSeeds& seeds) {
  if (cfg.capture.empty()) {
    Prng rng(seeds.traffic);
    return traffic::gen_synthetic_traffic(cfg.mix, cfg.corpus_size, rng, cfg.max_ip_length);
  }
  const auto frames = traffic::read_capture(cfg.capture);
  auto ingested = traffic::ingest_frames(frames, cfg.keep_fraction, seeds.downsample, cfg.max_ip_length);
  auto& packets = ingested.ip_packets;
  if (packets.size() > cfg.corpus_size) packets.resize(cfg.corpus_size);
  if (packets.size() < 100)
    throw Error(Errc::InsufficientData,
                fmt::format("capture yields {} usable packets; at least 100 are needed", packets.size()));
  return std::move(packets);
}

codec::SessionKey session_key(std::uint64_t master_seed) {
  const auto key = derive_stream_key(master_seed, "session-key");
  return codec::SessionKey(ByteView(key));
}

std::vector<Bytes> encapsulate_corpus(std::span<const Bytes> packets, std::uint64_t master_seed,
                                      std::uint32_t header_epoch) {
  const codec::SessionKey key = session_key(master_seed);
  SecureRng pad_rng(master_seed, "padding");
  SecureRng nonce_rng(master_seed, "nonce");
  const codec::HeaderInfo header = codec::default_header_info(header_epoch);
  std::vector<Bytes> out;
  out.reserve(packets.size());
  for (const Bytes& p : packets) out.push_back(codec::encapsulate(p, header, key, pad_rng, nonce_rng));
  return out;
}

std::vector<AlgorithmResult> evaluate_algorithms(const ExperimentConfig& cfg, const StageSeeds& seeds,
                                                 const dataset::TrainTest& split, const RunOptions& opts) {
  std::vector<AlgorithmResult> results;
  const std::vector<std::uint8_t> truth = split.test.labels();
  for (const ml::Algorithm algorithm : cfg.algorithms) {
    const std::string name(ml::to_string(algorithm));
    const std::string train_stage = "train:" + name;
    AlgorithmResult r;
    r.algorithm = algorithm;
    r.model_seed = seeds.model(algorithm);
    auto t0 = Clock::now();
    const ml::TrainedModel model = stage(train_stage.c_str(), opts, [&] {
      return ml::train(cfg.hyperparams(algorithm), split.train, r.model_seed);
    });
    r.train_seconds = seconds_since(t0);
    r.iterations = model.meta().iterations;
    r.final_loss = model.meta().final_loss;
    if (opts.stage_dir) {
      std::filesystem::create_directories(*opts.stage_dir / "models");
      ml::save_model(model, *opts.stage_dir / "models" / (name + ".fpm"));
    }
    const std::string eval_stage = "eval:" + name;
    t0 = Clock::now();
    r.metrics = stage(eval_stage.c_str(), opts, [&] {
      const auto predictions = model.predict_batch(split.test.records, cfg.threads);
      return metrics::compute_metrics(metrics::confusion(predictions, truth));
    });
    r.predict_seconds = seconds_since(t0);
    if (opts.verbose)
      fmt::print(stderr, "{}  ({:.1f}s train, {:.1f}s eval)\n", metrics::table_row(name, r.metrics),
                 r.train_seconds, r.predict_seconds);
    results.push_back(std::move(r));
  }
  return results;
}

namespace {

ExperimentReport finish(const ExperimentConfig& cfg, const StageSeeds& seeds, std::span<const Bytes> positives,
                        std::span<const Bytes> negatives, const RunOptions& opts, Clock::time_point start) {
  ExperimentReport report;
  report.config = cfg;
  report.positives = summarize(positives);
  report.negatives = summarize(negatives);

  const dataset::Dataset ds = stage("dataset", opts, [&] {
    dataset::Dataset d = dataset::build_dataset(positives, negatives, seeds.shuffle);
    d.provenance = std::string(to_string(cfg.experiment));
    d.seed = cfg.seed;
    return d;
  });
  persist(opts, "dataset.fpd", ds);
  const dataset::TrainTest split = stage("split", opts, [&] {
    Prng rng(seeds.split);
    return dataset::split(ds, cfg.test_fraction, rng);
  });
  persist(opts, "train.fpd", split.train);
  persist(opts, "test.fpd", split.test);
  report.train_size = split.train.size();
  report.test_size = split.test.size();
  report.results = evaluate_algorithms(cfg, seeds, split, opts);
  report.total_seconds = seconds_since(start);
  return report;
}

}  // namespace

ExperimentReport run_acc_vs_random(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto start = Clock::now();
  stage("config", opts, [&] { cfg.validate(); });
  const StageSeeds seeds(cfg.seed);
  const auto traffic = stage("traffic", opts, [&] { return collect_traffic(cfg, seeds); });
  persist(opts, "traffic.fpd", dataset::from_packets(traffic, 0, "traffic"));
  const auto positives =
      stage("encap", opts, [&] { return encapsulate_corpus(traffic, cfg.seed, cfg.header_epoch); });
  persist(opts, "acc.fpd", dataset::from_packets(positives, 1, "acc"));
  const auto negatives = stage("random", opts, [&] {
    const traffic::SizeDistribution dist = traffic::build_size_distribution(positives);
    SecureRng rng(cfg.seed, "random-packets");
    return traffic::gen_random_packets(dist, positives.size(), rng);
  });
  persist(opts, "negatives.fpd", dataset::from_packets(negatives, 0, "random"));
  return finish(cfg, seeds, positives, negatives, opts, start);
}

ExperimentReport run_acc_vs_network(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto start = Clock::now();
  stage("config", opts, [&] { cfg.validate(); });
  const StageSeeds seeds(cfg.seed);
  auto traffic = stage("traffic", opts, [&] { return collect_traffic(cfg, seeds); });
  // Packets without a payload have nothing to offer as a negative; they are
  // dropped from both classes.
  std::vector<Bytes> negatives = stage("strip", opts, [&] {
    std::vector<Bytes> payloads;
    std::vector<Bytes> kept;
    for (Bytes& p : traffic) {
      try {
        payloads.push_back(traffic::strip_headers(p));
        kept.push_back(std::move(p));
      } catch (const Error& e) {
        if (e.code() != Errc::EmptyPayload) throw;
      }
    }
    traffic = std::move(kept);
    return payloads;
  });
  persist(opts, "traffic.fpd", dataset::from_packets(traffic, 0, "traffic"));
  persist(opts, "negatives.fpd", dataset::from_packets(negatives, 0, "stripped"));
  const auto positives =
      stage("encap", opts, [&] { return encapsulate_corpus(traffic, cfg.seed, cfg.header_epoch); });
  persist(opts, "acc.fpd", dataset::from_packets(positives, 1, "acc"));
  return finish(cfg, seeds, positives, negatives, opts, start);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  return cfg.experiment == ExperimentKind::AccVsRandom ? run_acc_vs_random(cfg, opts)
                                                       : run_acc_vs_network(cfg, opts);
}

}  // namespace fpe::experiment
