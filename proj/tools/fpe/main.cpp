// fpe: command-line front end for the ACC detection experiments.

#include <fmt/format.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "fpe/codec/codec.hpp"
#include "fpe/dataset/dataset.hpp"
#include "fpe/error.hpp"
#include "fpe/experiment/bench.hpp"
#include "fpe/experiment/config.hpp"
#include "fpe/experiment/pipeline.hpp"
#include "fpe/experiment/report.hpp"
#include "fpe/metrics/metrics.hpp"
#include "fpe/ml/model.hpp"
#include "fpe/traffic/capture.hpp"
#include "fpe/traffic/packet.hpp"
#include "fpe/traffic/sampling.hpp"
#include "fpe/traffic/synthetic.hpp"

namespace fs = std::filesystem;
using namespace fpe;

namespace {

std::uint64_t default_seed() {
  if (const char* env = std::getenv(experiment::kSeedEnvVar)) {
    try {
      return std::stoull(env, nullptr, 0);
    } catch (const std::exception&) {
      throw Error(Errc::BadConfig, fmt::format("{}='{}' is not an unsigned integer", experiment::kSeedEnvVar, env));
    }
  }
  return 1;
}

// Thrown errors carry the subcommand name so the diagnostic says which
// stage failed.
struct StageFailure {
  std::string stage;
  std::string message;
};

template <typename F>
void as_stage(const std::string& name, F&& body) {
  try {
    body();
  } catch (const Error& e) {
    throw StageFailure{name, e.what()};
  } catch (const std::filesystem::filesystem_error& e) {
    throw StageFailure{name, fmt::format("IoError: {}", e.what())};
  }
}

void print_ingest_stats(const traffic::IngestStats& s) {
  fmt::print(stderr, "frames {}  unparseable {}  non-ethernet {}  kept {}  after downsample {}\n", s.frames,
             s.unparseable, s.non_ethernet, s.kept_by_filter, s.kept_after_downsample);
  for (int r = 1; r < 7; ++r)
    if (s.drops_by_reason[r] != 0)
      fmt::print(stderr, "  {:<24} {}\n", traffic::to_string(static_cast<traffic::FilterReason>(r)),
                 s.drops_by_reason[r]);
}

std::vector<experiment::ReportFormat> parse_formats(const std::string& spec) {
  if (spec == "all")
    return {experiment::ReportFormat::Csv, experiment::ReportFormat::Markdown, experiment::ReportFormat::JsonLines};
  std::vector<experiment::ReportFormat> out;
  std::size_t start = 0;
  while (start <= spec.size()) {
    auto comma = spec.find(',', start);
    if (comma == std::string::npos) comma = spec.size();
    if (comma > start) out.push_back(experiment::parse_report_format(spec.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ACC full-packet-encryption codec and detection experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fpe 0.1.0");

  std::uint64_t seed = 0;
  bool seed_given = false;
  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option_function<std::uint64_t>(
           "--seed",
           [&](std::uint64_t v) {
             seed = v;
             seed_given = true;
           },
           fmt::format("Master seed (default: ${} or 1)", experiment::kSeedEnvVar));
  };

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Filter and downsample a pcap/pcapng capture into an FPD1 corpus");
  std::string capture_path, ingest_out;
  double keep_fraction = 1.0;
  std::size_t max_len = traffic::kAccMtu;
  ingest->add_option("capture", capture_path, "Capture file")->required()->check(CLI::ExistingFile);
  ingest->add_option("-o,--output", ingest_out, "Output corpus (.fpd)")->required();
  ingest->add_option("--keep-fraction", keep_fraction, "Probability of keeping each packet")
      ->check(CLI::Range(0.0, 1.0));
  ingest->add_option("--max-len", max_len, "Largest IP packet kept");
  add_seed(ingest);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate synthetic plaintext traffic as an FPD1 corpus");
  std::string mix_text, synth_out;
  std::size_t count = 20000;
  synth->add_option("-o,--output", synth_out, "Output corpus (.fpd)")->required();
  synth->add_option("--count", count, "Number of packets");
  synth->add_option("--mix", mix_text, "Family weights, e.g. http=0.45,tls=0.35,dns-tcp=0.1,smallctl=0.1");
  synth->add_option("--max-len", max_len, "Largest IP packet generated");
  add_seed(synth);

  // encap
  auto* encap = app.add_subcommand("encap", "Encapsulate every packet of an FPD1 corpus with the ACC codec");
  std::string encap_in, encap_out;
  std::uint32_t epoch = 1700000000;
  encap->add_option("input", encap_in, "Input corpus (.fpd)")->required()->check(CLI::ExistingFile);
  encap->add_option("-o,--output", encap_out, "Output corpus of wire packets (.fpd, label 1)")->required();
  encap->add_option("--epoch", epoch, "Value of the inner header's \"t\" field");
  add_seed(encap);

  // dataset
  auto* ds_cmd = app.add_subcommand("dataset", "Label, shuffle and split positives and negatives");
  std::string pos_path, neg_path, ds_out;
  bool random_negatives = false, strip_negatives = false;
  double test_fraction = 0.2;
  ds_cmd->add_option("--positives", pos_path, "ACC corpus (.fpd)")->required()->check(CLI::ExistingFile);
  auto* neg_opt = ds_cmd->add_option("--negatives", neg_path, "Negative corpus (.fpd)")->check(CLI::ExistingFile);
  ds_cmd->add_flag("--random-negatives", random_negatives,
                   "Generate size-matched random negatives instead of reading --negatives")
      ->excludes(neg_opt);
  ds_cmd->add_flag("--strip", strip_negatives, "Strip IP/TCP/UDP headers from the negatives");
  ds_cmd->add_option("--test-fraction", test_fraction, "Fraction of each class held out");
  ds_cmd->add_option("-o,--output-dir", ds_out, "Writes dataset.fpd, train.fpd and test.fpd here")->required();
  add_seed(ds_cmd);

  // train
  auto* train_cmd = app.add_subcommand("train", "Train one classifier");
  std::string train_path, model_out, algorithm_name = "tree";
  std::vector<std::string> hp_sets;
  std::size_t threads = 1;
  train_cmd->add_option("train", train_path, "Training set (.fpd)")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("-a,--algorithm", algorithm_name, "tree, forest, knn, logreg, svm or mlp");
  train_cmd->add_option("--set", hp_sets, "Hyperparameter override section.key=value (repeatable)");
  train_cmd->add_option("--threads", threads, "Worker threads");
  train_cmd->add_option("-o,--output", model_out, "Output model (.fpm)")->required();
  add_seed(train_cmd);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Score a model on a test set");
  std::string model_path, test_path;
  eval_cmd->add_option("model", model_path, "Model (.fpm)")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("test", test_path, "Test set (.fpd)")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--threads", threads, "Worker threads");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Measure classification throughput");
  std::size_t repetitions = 5;
  bench_cmd->add_option("model", model_path, "Model (.fpm)")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("vectors", test_path, "Vectors to classify (.fpd)")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--repetitions", repetitions, "Timed passes per mode");
  std::size_t bench_threads = 4;
  bench_cmd->add_option("--threads", bench_threads, "Threads for the parallel pass");

  // run
  auto* run_cmd = app.add_subcommand("run", "Run a full experiment from a config file");
  std::string config_path, out_dir, formats = "all", experiment_name;
  std::vector<std::string> cfg_sets;
  bool quiet = false;
  run_cmd->add_option("-c,--config", config_path, "key=value config file")->check(CLI::ExistingFile);
  run_cmd->add_option("--set", cfg_sets, "Config override key=value (repeatable; wins over the file)");
  run_cmd->add_option("--experiment", experiment_name, "acc-vs-random or acc-vs-network");
  run_cmd->add_option("--out", out_dir, "Output directory");
  run_cmd->add_option("--format", formats, "csv, markdown, json-lines (comma separated) or all");
  run_cmd->add_flag("-q,--quiet", quiet, "No progress output");
  add_seed(run_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (!seed_given) as_stage("config", [&] { seed = default_seed(); });

    if (*ingest) {
      as_stage("ingest", [&] {
        const auto frames = traffic::read_capture(capture_path);
        const auto result = traffic::ingest_frames(frames, keep_fraction, seed, max_len);
        print_ingest_stats(result.stats);
        dataset::save(dataset::from_packets(result.ip_packets, 0, "capture"), ingest_out);
      });
    } else if (*synth) {
      as_stage("synth", [&] {
        const auto mix = mix_text.empty() ? traffic::TrafficMix{} : traffic::TrafficMix::parse(mix_text);
        Prng rng(derive_stream_seed(seed, "traffic"));
        const auto packets = traffic::gen_synthetic_traffic(mix, count, rng, max_len);
        dataset::save(dataset::from_packets(packets, 0, "synthetic"), synth_out);
        fmt::print(stderr, "{} packets, mean popcount {:.4f}\n", packets.size(),
                   experiment::summarize(packets).mean_popcount);
      });
    } else if (*encap) {
      as_stage("encap", [&] {
        const auto packets = dataset::packets_of(dataset::load(encap_in));
        const auto wire = experiment::encapsulate_corpus(packets, seed, epoch);
        dataset::save(dataset::from_packets(wire, 1, "acc"), encap_out);
        fmt::print(stderr, "{} packets encapsulated, mean popcount {:.4f}\n", wire.size(),
                   experiment::summarize(wire).mean_popcount);
      });
    } else if (*ds_cmd) {
      as_stage("dataset", [&] {
        const auto positives = dataset::packets_of(dataset::load(pos_path));
        std::vector<Bytes> negatives;
        if (random_negatives) {
          SecureRng rng(seed, "random-packets");
          negatives = traffic::gen_random_packets(traffic::build_size_distribution(positives), positives.size(), rng);
        } else if (!neg_path.empty()) {
          negatives = dataset::packets_of(dataset::load(neg_path));
        } else {
          throw Error(Errc::BadConfig, "give --negatives or --random-negatives");
        }
        if (strip_negatives)
          for (Bytes& p : negatives) p = traffic::strip_headers(p);
        const experiment::StageSeeds seeds(seed);
        const auto ds = dataset::build_dataset(positives, negatives, seeds.shuffle);
        Prng rng(seeds.split);
        const auto parts = dataset::split(ds, test_fraction, rng);
        fs::create_directories(ds_out);
        dataset::save(ds, fs::path(ds_out) / "dataset.fpd");
        dataset::save(parts.train, fs::path(ds_out) / "train.fpd");
        dataset::save(parts.test, fs::path(ds_out) / "test.fpd");
        fmt::print(stderr, "{} records: {} train, {} test\n", ds.size(), parts.train.size(), parts.test.size());
      });
    } else if (*train_cmd) {
      as_stage("train", [&] {
        auto hp = ml::Hyperparams::defaults(ml::parse_algorithm(algorithm_name));
        hp.threads = threads;
        for (const auto& kv : hp_sets) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) throw Error(Errc::InvalidHyperparams, "--set expects key=value: " + kv);
          hp.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        const auto train_set = dataset::load(train_path);
        const auto model = ml::train(hp, train_set, seed);
        ml::save_model(model, model_out);
        fmt::print(stderr, "{} trained on {} records ({} iterations)\n", ml::to_string(hp.algorithm),
                   train_set.size(), model.meta().iterations);
      });
    } else if (*eval_cmd) {
      as_stage("eval", [&] {
        const auto model = ml::load_model(model_path);
        const auto test_set = dataset::load(test_path);
        const auto predictions = model.predict_batch(test_set.records, threads);
        const auto report = metrics::compute_metrics(metrics::confusion(predictions, test_set.labels()));
        fmt::print("{}\n{}\n", metrics::csv_header(),
                   metrics::csv_row(ml::to_string(model.algorithm()), report, model.meta().seed));
        fmt::print(stderr, "{}\n{}\n", metrics::table_header(),
                   metrics::table_row(ml::to_string(model.algorithm()), report));
      });
    } else if (*bench_cmd) {
      as_stage("bench", [&] {
        const auto model = ml::load_model(model_path);
        const auto vectors = dataset::load(test_path);
        const auto r = experiment::bench_throughput(model, vectors.records, repetitions, bench_threads);
        fmt::print("algorithm,vectors,single_thread_per_s,threads,parallel_per_s\n");
        fmt::print("{},{},{:.2f},{},{:.2f}\n", ml::to_string(model.algorithm()), r.vectors, r.single_median,
                   r.threads, r.parallel_median);
      });
    } else if (*run_cmd) {
      experiment::ExperimentConfig cfg;
      as_stage("config", [&] {
        if (!config_path.empty()) cfg = experiment::ExperimentConfig::load(config_path);
        for (const auto& kv : cfg_sets) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) throw Error(Errc::BadConfig, "--set expects key=value: " + kv);
          cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (!experiment_name.empty()) cfg.experiment = experiment::parse_experiment(experiment_name);
        // --seed, then the environment, then the file.
        if (seed_given || std::getenv(experiment::kSeedEnvVar) != nullptr) cfg.seed = seed;
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        cfg.validate();
      });
      const auto report_formats = parse_formats(formats);
      experiment::RunOptions opts;
      opts.stage_dir = fs::path(cfg.output_dir) / "stages";
      opts.verbose = !quiet;
      experiment::ExperimentReport report;
      try {
        report = experiment::run_experiment(cfg, opts);
      } catch (const Error& e) {
        throw StageFailure{"run", e.what()};
      }
      as_stage("report", [&] {
        for (const auto f : report_formats) {
          const auto path = experiment::emit_report(report, f, cfg.output_dir);
          if (!quiet) fmt::print(stderr, "wrote {}\n", path.string());
        }
        std::ofstream(fs::path(cfg.output_dir) / "timings.csv") << experiment::render_timings(report);
      });
      fmt::print("{}\n", metrics::table_header());
      for (const auto& r : report.results) fmt::print("{}\n", metrics::table_row(ml::to_string(r.algorithm), r.metrics));
    }
  } catch (const StageFailure& f) {
    fmt::print(stderr, "fpe: {} failed: {}\n", f.stage, f.message);
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "fpe: unexpected error: {}\n", e.what());
    return 3;
  }
  return 0;
}
