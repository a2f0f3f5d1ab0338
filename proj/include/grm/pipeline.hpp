#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "grm/analysis.hpp"
#include "grm/forwarding.hpp"
#include "grm/mobility.hpp"
#include "grm/params.hpp"
#include "grm/social.hpp"
#include "grm/trace.hpp"

namespace grm {

inline constexpr const char* kVersion = "1.0.0";

struct Scenario {
  SocialGraph graph;
  HomeAssignment homes;
  Schedule schedule;
  std::vector<Itinerary> itineraries;
  ContactTrace trace;
};

/// social -> groups -> mobility -> contacts, all from `params.seed`.
Scenario simulate(const ParameterSet& params);

SocialGraph build_social_graph(const ParameterSet& params, RandomSource& rng);

struct GenerateOptions {
  std::optional<std::filesystem::path> config_path;
  /// Sampling interval of movement.one; defaults to the contact time step.
  std::optional<Seconds> movement_step;
};

/// Writes movement.one, connections.one, contacts.csv, schedule.txt,
/// social.edges, social.communities (labelled graphs only) and manifest.json.
Scenario run_generate(const ParameterSet& params, const std::filesystem::path& out_dir,
                      const GenerateOptions& options = {});

/// Writes a config usable by run_generate plus `<out>.manifest.json`.
ExtractedParameters run_fit(const std::filesystem::path& trace_path, TraceFormat format,
                            const std::filesystem::path& out_path,
                            const ExtractionOptions& options = {});

/// Converts extraction results into a configuration; fields that could not
/// be estimated are listed in `unavailable` and keep their defaults.
ParameterSet fitted_parameters(const ContactTrace& trace, const ExtractedParameters& extracted,
                               std::vector<std::string>& unavailable);

enum class Analysis { Ict, Cd, Remeeting, Communities, FitReport };

std::optional<Analysis> parse_analysis(std::string_view name);

struct AnalyzeOptions {
  std::set<Analysis> only{Analysis::Ict, Analysis::Cd, Analysis::Remeeting, Analysis::Communities,
                          Analysis::FitReport};
  DetectionParams detection;
  Seconds remeeting_bin = kHour;
  Seconds remeeting_horizon = 15 * kDay;
  std::size_t clique_size = 3;
  Seconds min_total_contact = 0.0;
  Seconds time_x_min = 60.0;
};

/// Writes ict_ccdf.csv, cd_ccdf.csv, remeeting.csv, communities.csv and
/// fit_report.csv (those selected) plus manifest.json.
void run_analyze(const std::filesystem::path& trace_path, TraceFormat format,
                 const std::filesystem::path& out_dir, const AnalyzeOptions& options = {});

struct ForwardOptions {
  std::vector<std::string> protocols{"flooding", "bubblerap", "groupsnet"};
  std::vector<Seconds> ttls{6 * kHour, kDay, 3 * kDay, kWeek};
  std::size_t messages = 1000;
  double warmup_fraction = 0.3;
  std::uint64_t seed = 1;
  Granularity granularity = Granularity::Interval;
  Centrality centrality = Centrality::AggregatedDegree;
  Seconds recency_window = 7 * kDay;
};

/// Forwarding experiment on an in-memory trace.
std::vector<ReplayMetrics> forward_experiment(const ContactTrace& trace,
                                              const ForwardOptions& options);

/// Writes the metrics CSV and `<out>.manifest.json`.
std::vector<ReplayMetrics> run_forward(const std::filesystem::path& trace_path, TraceFormat format,
                                       const std::filesystem::path& out_path,
                                       const ForwardOptions& options = {});

}  // namespace grm
