#include "fpe/experiment/config.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

#include "fpe/error.hpp"

namespace fpe::experiment {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::BadConfig, what); }

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::uint64_t parse_u64(std::string_view key, std::string_view value) {
  const std::string s(value);
  try {
    std::size_t used = 0;
    if (!s.empty() && s[0] == '-') throw std::invalid_argument("negative");
    const unsigned long long v = std::stoull(s, &used, 0);
    if (used == s.size()) return v;
  } catch (const std::logic_error&) {
  }
  bad(fmt::format("{} expects an unsigned integer, got '{}'", key, value));
}

double parse_double(std::string_view key, std::string_view value) {
  const std::string s(value);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::logic_error&) {
  }
  bad(fmt::format("{} expects a number, got '{}'", key, value));
}

}  // namespace

std::string_view to_string(ExperimentKind kind) noexcept {
  return kind == ExperimentKind::AccVsRandom ? "acc-vs-random" : "acc-vs-network";
}

ExperimentKind parse_experiment(std::string_view name) {
  if (name == "acc-vs-random" || name == "random") return ExperimentKind::AccVsRandom;
  if (name == "acc-vs-network" || name == "network") return ExperimentKind::AccVsNetwork;
  bad(fmt::format("unknown experiment '{}'", name));
}

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  try {
    if (key.find('.') != std::string_view::npos) {
      ml::Hyperparams probe;
      probe.set(key, value);
      overrides[std::string(key)] = std::string(value);
    } else if (key == "experiment") {
      experiment = parse_experiment(value);
    } else if (key == "capture") {
      capture = std::string(value);
    } else if (key == "mix") {
      mix = traffic::TrafficMix::parse(value);
    } else if (key == "corpus_size") {
      corpus_size = parse_u64(key, value);
    } else if (key == "keep_fraction") {
      keep_fraction = parse_double(key, value);
    } else if (key == "test_fraction") {
      test_fraction = parse_double(key, value);
    } else if (key == "algorithms") {
      algorithms.clear();
      std::size_t start = 0;
      while (start <= value.size()) {
        std::size_t comma = value.find(',', start);
        if (comma == std::string_view::npos) comma = value.size();
        const auto name = trim(value.substr(start, comma - start));
        if (name == "all") {
          algorithms.assign(std::begin(ml::kAllAlgorithms), std::end(ml::kAllAlgorithms));
        } else if (!name.empty()) {
          algorithms.push_back(ml::parse_algorithm(name));
        }
        start = comma + 1;
      }
    } else if (key == "seed") {
      seed = parse_u64(key, value);
    } else if (key == "output_dir") {
      output_dir = std::string(value);
    } else if (key == "header_epoch") {
      const auto v = parse_u64(key, value);
      if (v > 0xFFFFFFFFu) bad("header_epoch must fit in 32 bits");
      header_epoch = static_cast<std::uint32_t>(v);
    } else if (key == "max_ip_length") {
      max_ip_length = parse_u64(key, value);
    } else if (key == "threads") {
      threads = parse_u64(key, value);
    } else {
      bad(fmt::format("unknown config key '{}'", key));
    }
  } catch (const Error& e) {
    if (e.code() == Errc::BadConfig) throw;
    bad(fmt::format("{} = {}: {}", key, value, e.what()));
  }
}

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  ExperimentConfig cfg;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) bad(fmt::format("line {}: expected key = value", line_no));
    try {
      cfg.set(view.substr(0, eq), view.substr(eq + 1));
    } catch (const Error& e) {
      bad(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string ExperimentConfig::to_text() const {
  std::string algs;
  for (const auto a : algorithms) {
    if (!algs.empty()) algs += ',';
    algs += ml::to_string(a);
  }
  std::string out;
  out += fmt::format("experiment = {}\n", to_string(experiment));
  out += fmt::format("capture = {}\n", capture);
  out += fmt::format("mix = {}\n", mix.to_string());
  out += fmt::format("corpus_size = {}\n", corpus_size);
  out += fmt::format("keep_fraction = {}\n", keep_fraction);
  out += fmt::format("test_fraction = {}\n", test_fraction);
  out += fmt::format("algorithms = {}\n", algs);
  out += fmt::format("seed = {}\n", seed);
  out += fmt::format("output_dir = {}\n", output_dir);
  out += fmt::format("header_epoch = {}\n", header_epoch);
  out += fmt::format("max_ip_length = {}\n", max_ip_length);
  out += fmt::format("threads = {}\n", threads);
  for (const auto& [k, v] : overrides) out += fmt::format("{} = {}\n", k, v);
  return out;
}

void ExperimentConfig::validate() const {
  if (corpus_size < 100) bad("corpus_size must be at least 100");
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) bad("keep_fraction must be in (0, 1]");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) bad("test_fraction must be in (0, 1)");
  if (algorithms.empty()) bad("at least one algorithm is required");
  if (max_ip_length < 64 || max_ip_length > 1280) bad("max_ip_length must be in [64, 1280]");
  if (threads < 1) bad("threads must be at least 1");
  try {
    mix.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
}

ml::Hyperparams ExperimentConfig::hyperparams(ml::Algorithm algorithm) const {
  ml::Hyperparams hp = ml::Hyperparams::defaults(algorithm);
  hp.threads = threads;
  for (const auto& [k, v] : overrides) hp.set(k, v);
  return hp;
}

}  // namespace fpe::experiment
