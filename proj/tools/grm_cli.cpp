#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

#include "grm/io.hpp"
#include "grm/pipeline.hpp"

namespace {

constexpr int kValidationError = 1;
constexpr int kRuntimeError = 2;

grm::TraceFormat resolve_format(const std::string& flag, const std::filesystem::path& trace) {
  if (!flag.empty()) {
    if (auto f = grm::parse_trace_format(flag)) return *f;
    throw grm::ConfigError({"--format: expected one or csv, got '" + flag + "'"});
  }
  auto name = trace.filename().string();
  if (name.ends_with(".gz")) name.resize(name.size() - 3);
  return name.ends_with(".csv") ? grm::TraceFormat::Csv : grm::TraceFormat::OneConnections;
}

std::vector<grm::Seconds> parse_ttls(const std::vector<std::string>& items) {
  std::vector<grm::Seconds> out;
  std::vector<std::string> problems;
  for (const auto& s : items) {
    try {
      out.push_back(grm::parse_duration(s));
      if (!(out.back() > 0.0)) problems.push_back("--ttl: '" + s + "' must be positive");
    } catch (const grm::ParameterError& e) {
      problems.push_back("--ttl: " + std::string(e.what()));
    }
  }
  if (!problems.empty()) throw grm::ConfigError(problems);
  return out;
}

void configure_logging() {
  spdlog::set_default_logger(spdlog::stderr_color_mt("grm"));
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("GRM_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Group Regularity Mobility model: trace generation, analysis and forwarding"};
  app.require_subcommand(1);
  app.set_version_flag("--version", grm::kVersion);

  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::string movement_step;
  auto* gen = app.add_subcommand("generate", "simulate a scenario and write its traces");
  gen->add_option("--config", config_path, "scenario configuration (JSON)")->required();
  gen->add_option("--out", out, "output directory")->required();
  gen->add_option("--seed", seed, "master seed, overrides the config");
  gen->add_option("--mode", mode, "contact extraction mode")
      ->check(CLI::IsMember({"meeting", "proximity"}));
  gen->add_option("--movement-step", movement_step, "sampling interval of movement.one");

  std::string trace;
  std::string format;
  auto add_trace = [&](CLI::App* sub) {
    sub->add_option("trace", trace, "contact trace (ONE connections or CSV, optionally gzipped)")
        ->required();
    sub->add_option("--format", format, "one or csv; inferred from the extension by default");
    sub->add_option("--out", out, "output path")->required();
  };

  auto* fit = app.add_subcommand("fit", "estimate model parameters from a contact trace");
  add_trace(fit);

  std::vector<std::string> only;
  std::string window = "1h";
  std::size_t clique_size = 3;
  std::string min_contact = "0";
  auto* analyze = app.add_subcommand("analyze", "characterize a contact trace");
  add_trace(analyze);
  analyze->add_option("--only", only, "subset of ict, cd, remeeting, communities, fit")
      ->delimiter(',')
      ->check(CLI::IsMember({"ict", "cd", "remeeting", "communities", "fit"}));
  analyze->add_option("--window", window, "group detection window");
  analyze->add_option("--clique-size", clique_size, "clique percolation k")->check(CLI::Range(3, 64));
  analyze->add_option("--min-contact", min_contact,
                      "minimum total contact time for a community graph edge");

  grm::ForwardOptions fo;
  std::vector<std::string> ttls{"6h", "1d", "3d", "1w"};
  std::string granularity = "interval";
  std::string centrality = "aggregated";
  auto* fwd = app.add_subcommand("forward", "replay a trace under forwarding protocols");
  add_trace(fwd);
  fwd->add_option("--protocols", fo.protocols, "flooding, bubblerap, groupsnet")
      ->delimiter(',')
      ->check(CLI::IsMember({"flooding", "bubblerap", "groupsnet"}));
  fwd->add_option("--ttl", ttls, "message TTLs with units")->delimiter(',');
  fwd->add_option("--messages", fo.messages, "workload size");
  fwd->add_option("--seed", seed, "workload seed");
  fwd->add_option("--warmup", fo.warmup_fraction, "fraction of the trace used for warm-up")
      ->check(CLI::Range(0.0, 0.99));
  fwd->add_option("--granularity", granularity, "interval or contact-start")
      ->check(CLI::IsMember({"interval", "contact-start"}));
  fwd->add_option("--centrality", centrality, "aggregated or windowed")
      ->check(CLI::IsMember({"aggregated", "windowed"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidationError;
  }

  try {
    if (*gen) {
      grm::ParameterSet params = grm::load_parameters(config_path);
      if (seed) params.seed = *seed;
      if (!mode.empty()) params.contact_mode = *grm::parse_contact_mode(mode);
      grm::GenerateOptions go;
      go.config_path = config_path;
      if (!movement_step.empty()) go.movement_step = grm::parse_duration(movement_step);
      grm::run_generate(params, out, go);
    } else if (*fit) {
      grm::run_fit(trace, resolve_format(format, trace), out);
    } else if (*analyze) {
      grm::AnalyzeOptions ao;
      if (!only.empty()) {
        ao.only.clear();
        for (const auto& name : only) ao.only.insert(*grm::parse_analysis(name));
      }
      ao.detection.window = grm::parse_duration(window);
      ao.detection.validate();
      ao.clique_size = clique_size;
      ao.min_total_contact = grm::parse_duration(min_contact);
      grm::run_analyze(trace, resolve_format(format, trace), out, ao);
    } else if (*fwd) {
      fo.ttls = parse_ttls(ttls);
      if (seed) fo.seed = *seed;
      fo.granularity = granularity == "interval" ? grm::Granularity::Interval
                                                 : grm::Granularity::ContactStart;
      fo.centrality = centrality == "aggregated" ? grm::Centrality::AggregatedDegree
                                                 : grm::Centrality::WindowedDegree;
      grm::run_forward(trace, resolve_format(format, trace), out, fo);
    }
  } catch (const grm::ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return 0;
}
