#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "grm/core.hpp"
#include "grm/groups.hpp"
#include "grm/social.hpp"
#include "grm/stats.hpp"
#include "grm/trace.hpp"

namespace grm {

/// Gaps t_start(k+1) - t_end(k) between consecutive contacts of each pair.
std::vector<double> intercontact_samples(const ContactTrace& trace);
std::vector<double> contact_duration_samples(const ContactTrace& trace);

struct Ccdf {
  /// Distinct sample values, ascending.
  std::vector<double> values;
  /// Fraction of samples strictly greater than each value.
  std::vector<double> ccdf;
};

Ccdf compute_ccdf(std::vector<double> samples);
void write_ccdf(const Ccdf& ccdf, const std::filesystem::path& path);

struct Occurrence {
  Seconds start = 0.0;
  Seconds end = 0.0;
  std::vector<NodeId> attendees;  // sorted
};

struct DetectedGroup {
  GroupId id = 0;
  /// Union of all occurrence attendees, sorted.
  std::vector<NodeId> members;
  std::vector<Occurrence> occurrences;
};

struct DetectionParams {
  Seconds window = kHour;
  std::size_t min_size = 2;
  double similarity_threshold = 0.5;

  void validate() const;
};

/// Windowed connected components linked across windows by Jaccard similarity
/// of member sets. Groups are numbered in order of first appearance.
std::vector<DetectedGroup> detect_groups(const ContactTrace& trace, const DetectionParams& params = {});

double jaccard(std::span<const NodeId> a, std::span<const NodeId> b);

struct Histogram {
  Seconds bin = kHour;
  /// probability[i] covers [i·bin, (i+1)·bin).
  std::vector<double> probability;
  /// Number of gaps that fell inside the horizon.
  std::size_t count = 0;

  double mass_between(Seconds from, Seconds to) const;
};

/// Gaps between consecutive occurrence starts of each group, histogrammed over
/// [0, horizon) and normalized. All zeros when no gap falls in range.
Histogram remeeting_pdf(const std::vector<DetectedGroup>& groups, Seconds bin, Seconds horizon);
std::vector<double> remeeting_gaps(const std::vector<DetectedGroup>& groups);
void write_histogram(const Histogram& histogram, const std::filesystem::path& path);

/// Edge between every pair whose total contact time is at least `min_total`
/// (and positive).
SocialGraph aggregate_contact_graph(const ContactTrace& trace, Seconds min_total = 0.0);

using Community = std::vector<NodeId>;  // sorted

/// Maximal cliques with at least `min_size` nodes (Bron-Kerbosch with pivot).
std::vector<std::vector<NodeId>> maximal_cliques(const SocialGraph& graph, std::size_t min_size);

/// k-clique communities, sorted by size descending then lowest member.
std::vector<Community> clique_percolation(const SocialGraph& graph, std::size_t k);
std::vector<Community> clique_percolation(const ContactTrace& trace, std::size_t k,
                                          Seconds min_total = 0.0);
void write_communities(const std::vector<Community>& communities,
                       const std::filesystem::path& path);

struct ExtractionOptions {
  DetectionParams detection;
  Seconds time_x_min = 60.0;
  double size_x_min = 2.0;
  Seconds remeeting_bin = kHour;
  Seconds remeeting_horizon = 15 * kDay;
  std::vector<Seconds> candidate_periods{6 * kHour, kDay, kWeek};
};

struct ExtractedParameters {
  std::optional<TruncatedPowerLaw> duration;
  /// alpha and beta (seconds) of the inter-meeting multiplier, as in GroupParams.
  std::optional<TruncatedPowerLaw> gmt;
  std::optional<TruncatedPowerLaw> size;
  std::optional<KDistribution> k_distribution;
  std::optional<TruncatedPowerLaw> intercontact;
  std::size_t contact_count = 0;
  std::size_t detected_groups = 0;
  /// Why a field is missing, one line each.
  std::vector<std::string> notes;
};

/// Shares of re-meeting histogram mass near multiples of each candidate
/// period: ±12 h for periods of a week or more, ±3 h otherwise, longest
/// period first so every bin is counted once. Empty when no mass is near any
/// candidate.
std::vector<KDistribution::Entry> estimate_k_shares(const Histogram& histogram,
                                                    std::span<const Seconds> periods);

ExtractedParameters extract_parameters(const ContactTrace& trace,
                                       const ExtractionOptions& options = {});

}  // namespace grm
