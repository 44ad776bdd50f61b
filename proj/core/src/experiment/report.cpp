#include "fpe/experiment/report.hpp"

#include <fmt/format.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "fpe/error.hpp"

namespace fpe::experiment {

using nlohmann::json;

namespace {

json optional_number(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

json corpus_json(const char* cls, const CorpusSummary& s) {
  return json{{"type", "corpus"},          {"class", cls},
              {"count", s.count},          {"min_length", s.min_length},
              {"max_length", s.max_length}, {"mean_length", s.mean_length},
              {"mean_popcount", s.mean_popcount}};
}

CorpusSummary corpus_from_json(const json& j) {
  CorpusSummary s;
  s.count = j.at("count").get<std::size_t>();
  s.min_length = j.at("min_length").get<std::size_t>();
  s.max_length = j.at("max_length").get<std::size_t>();
  s.mean_length = j.at("mean_length").get<double>();
  s.mean_popcount = j.at("mean_popcount").get<double>();
  return s;
}

std::string render_csv(const ExperimentReport& r) {
  std::string out = metrics::csv_header() + "\n";
  for (const auto& res : r.results)
    out += metrics::csv_row(ml::to_string(res.algorithm), res.metrics, r.config.seed) + "\n";
  return out;
}

std::string render_markdown(const ExperimentReport& r) {
  std::string out;
  out += fmt::format("# {} (seed {})\n\n", to_string(r.config.experiment), r.config.seed);
  out += "## Configuration\n\n```\n" + r.config.to_text() + "```\n\n";
  out += "## Corpus\n\n";
  out += "| class | packets | min length | max length | mean length | mean popcount |\n";
  out += "|---|---:|---:|---:|---:|---:|\n";
  auto corpus_row = [](const char* cls, const CorpusSummary& s) {
    return fmt::format("| {} | {} | {} | {} | {:.2f} | {:.4f} |\n", cls, s.count, s.min_length, s.max_length,
                       s.mean_length, s.mean_popcount);
  };
  out += corpus_row("ACC (1)", r.positives);
  out += corpus_row(r.config.experiment == ExperimentKind::AccVsRandom ? "random (0)" : "traffic (0)",
                    r.negatives);
  out += fmt::format("\nTrain records: {}. Test records: {}.\n\n", r.train_size, r.test_size);
  out += "## Metrics\n\n";
  out += "| algorithm | A | P | R | C | F1 | effective | TP | FP | TN | FN |\n";
  out += "|---|---:|---:|---:|---:|---:|:---:|---:|---:|---:|---:|\n";
  for (const auto& res : r.results) {
    const auto& m = res.metrics;
    auto cell = [](std::optional<double> v) { return v ? fmt::format("{:.4f}", *v) : std::string("n/a"); };
    const std::string eff = m.effective ? (*m.effective ? "yes" : "no") : "n/a";
    out += fmt::format("| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |\n", ml::to_string(res.algorithm),
                       cell(m.accuracy), cell(m.precision), cell(m.recall), cell(m.collateral), cell(m.f1), eff,
                       m.counts.tp, m.counts.fp, m.counts.tn, m.counts.fn);
  }
  return out;
}

std::string render_jsonl(const ExperimentReport& r) {
  std::string out;
  out += json{{"type", "config"}, {"text", r.config.to_text()}}.dump() + "\n";
  out += corpus_json("positive", r.positives).dump() + "\n";
  out += corpus_json("negative", r.negatives).dump() + "\n";
  out += json{{"type", "split"}, {"train", r.train_size}, {"test", r.test_size}}.dump() + "\n";
  for (const auto& res : r.results) {
    const auto& m = res.metrics;
    json j{{"type", "result"},
           {"algorithm", ml::to_string(res.algorithm)},
           {"A", optional_number(m.accuracy)},
           {"P", optional_number(m.precision)},
           {"R", optional_number(m.recall)},
           {"C", optional_number(m.collateral)},
           {"F1", optional_number(m.f1)},
           {"effective", m.effective ? json(*m.effective) : json(nullptr)},
           {"tp", m.counts.tp},
           {"fp", m.counts.fp},
           {"tn", m.counts.tn},
           {"fn", m.counts.fn},
           {"seed", r.config.seed},
           {"model_seed", res.model_seed},
           {"iterations", res.iterations},
           {"final_loss", res.final_loss}};
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace

ReportFormat parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "markdown" || name == "md") return ReportFormat::Markdown;
  if (name == "json-lines" || name == "jsonl") return ReportFormat::JsonLines;
  throw Error(Errc::BadConfig, fmt::format("unknown report format '{}'", name));
}

std::string_view extension(ReportFormat format) noexcept {
  switch (format) {
    case ReportFormat::Csv: return "csv";
    case ReportFormat::Markdown: return "md";
    case ReportFormat::JsonLines: return "jsonl";
  }
  return "txt";
}

std::string render_report(const ExperimentReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Csv: return render_csv(report);
    case ReportFormat::Markdown: return render_markdown(report);
    case ReportFormat::JsonLines: return render_jsonl(report);
  }
  return {};
}

std::filesystem::path emit_report(const ExperimentReport& report, ReportFormat format,
                                  const std::filesystem::path& dir, std::string_view stem) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto path = dir / fmt::format("{}.{}", stem, extension(format));
  const std::string text = render_report(report, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.close();
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  return path;
}

std::string render_timings(const ExperimentReport& report) {
  std::string out = "algorithm,train_seconds,predict_seconds\n";
  for (const auto& r : report.results)
    out += fmt::format("{},{:.3f},{:.3f}\n", ml::to_string(r.algorithm), r.train_seconds, r.predict_seconds);
  out += fmt::format("total,{:.3f},\n", report.total_seconds);
  return out;
}

ExperimentReport parse_report_jsonl(std::string_view text) {
  ExperimentReport r;
  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "config") {
        r.config = ExperimentConfig::parse(j.at("text").get<std::string>());
      } else if (type == "corpus") {
        (j.at("class") == "positive" ? r.positives : r.negatives) = corpus_from_json(j);
      } else if (type == "split") {
        r.train_size = j.at("train").get<std::size_t>();
        r.test_size = j.at("test").get<std::size_t>();
      } else if (type == "result") {
        AlgorithmResult res;
        res.algorithm = ml::parse_algorithm(j.at("algorithm").get<std::string>());
        auto& m = res.metrics;
        m.accuracy = read_optional(j, "A");
        m.precision = read_optional(j, "P");
        m.recall = read_optional(j, "R");
        m.collateral = read_optional(j, "C");
        m.f1 = read_optional(j, "F1");
        if (!j.at("effective").is_null()) m.effective = j.at("effective").get<bool>();
        m.counts = {j.at("tp").get<std::uint64_t>(), j.at("fp").get<std::uint64_t>(),
                    j.at("tn").get<std::uint64_t>(), j.at("fn").get<std::uint64_t>()};
        res.model_seed = j.at("model_seed").get<std::uint64_t>();
        res.iterations = j.at("iterations").get<std::uint64_t>();
        res.final_loss = j.at("final_loss").get<double>();
        r.results.push_back(std::move(res));
      } else {
        throw Error(Errc::ParseError, "unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw Error(Errc::ParseError, fmt::format("report line {}: {}", line_no, e.what()));
    }
  }
  return r;
}

ExperimentReport load_report_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_report_jsonl(buf.str());
}

}  // namespace fpe::experiment
