#include "grm/groups.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "grm/io.hpp"

namespace grm {

KDistribution::KDistribution(std::vector<Entry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw ParameterError("K distribution: no entries");
  double sum = 0.0;
  for (const auto& e : entries_) {
    if (!(e.period > 0.0)) throw ParameterError("K distribution: periods must be positive");
    if (!(e.probability >= 0.0)) {
      throw ParameterError("K distribution: probabilities must be non-negative");
    }
    sum += e.probability;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ParameterError("K distribution: probabilities sum to " + std::to_string(sum) +
                         ", expected 1");
  }
}

KDistribution KDistribution::standard() {
  return KDistribution({{kDay, 0.70}, {kWeek, 0.15}, {6 * kHour, 0.15}});
}

Seconds KDistribution::sample(RandomSource& rng) const {
  if (entries_.empty()) throw ContractError("K distribution is empty");
  const double u = rng.uniform01();
  double acc = 0.0;
  for (const auto& e : entries_) {
    acc += e.probability;
    if (u < acc) return e.period;
  }
  return entries_.back().period;
}

void GroupParams::validate() const {
  if (!(horizon > 0.0)) throw ParameterError("groups: horizon must be positive");
  if (!(group_lifetime > 0.0)) throw ParameterError("groups: group lifetime must be positive");
  size.validate();
  if (size.x_min < 2.0) throw ParameterError("groups: size x_min must be >= 2");
  TruncatedPowerLaw{gmt_alpha, gmt_beta, 1.0}.validate();
  duration.validate();
  if (!(sigma2 >= 0.0)) throw ParameterError("groups: sigma2 must be >= 0");
  if (!(min_gap > 0.0)) throw ParameterError("groups: min_gap must be positive");
  if (k_distribution.entries().empty()) throw ParameterError("groups: empty K distribution");
}

std::size_t draw_group_size(const TruncatedPowerLaw& size_dist, RandomSource& rng) {
  const double x = sample_tpl(size_dist, rng);
  return std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(x)));
}

Group build_group(GroupId id, const SocialGraph& graph, const GroupParams& params,
                  RandomSource& rng) {
  if (graph.node_count() == 0) throw ContractError("build_group: empty social graph");
  if (graph.edge_count() == 0) throw ParameterError("build_group: social graph has no edges");
  Group g;
  g.id = id;
  const std::size_t drawn = std::min(draw_group_size(params.size, rng), graph.node_count());

  NodeId seed = 0;
  constexpr int kSeedAttempts = 1000;
  int attempt = 0;
  for (; attempt < kSeedAttempts; ++attempt) {
    seed = static_cast<NodeId>(rng.below(graph.node_count()));
    if (graph.degree(seed) > 0) break;
  }
  if (attempt == kSeedAttempts) {
    throw ParameterError("build_group: could not find a seed node with a neighbor");
  }
  auto sample = snowball_sample(graph, seed, drawn, rng);
  g.members = std::move(sample.members);
  g.truncated = sample.truncated;
  if (g.truncated) {
    spdlog::debug("group {}: component of node {} has {} nodes, wanted {}", id, seed,
                  g.members.size(), drawn);
  }

  g.regularity = params.k_distribution.sample(rng);
  const TruncatedPowerLaw gap_dist{params.gmt_alpha, params.gmt_beta / g.regularity, 1.0};
  g.gap_multiplier = std::max(1.0, std::round(sample_tpl(gap_dist, rng)));

  g.attendance.reserve(g.members.size());
  const double size = static_cast<double>(g.members.size());
  for (NodeId m : g.members) {
    g.attendance.push_back(params.force_full_attendance
                               ? 1.0
                               : static_cast<double>(known_count(graph, m, g.members)) / size);
  }

  const Seconds lifetime = std::min(params.group_lifetime, params.horizon);
  g.window_start = sample_uniform(0.0, params.horizon - lifetime, rng);
  g.window_end = g.window_start + lifetime;
  return g;
}

std::vector<Seconds> recurse_meeting_times(Seconds first, Seconds window_end, Seconds mean_gap,
                                           double sigma2, Seconds min_gap, RandomSource& rng) {
  std::vector<Seconds> times;
  if (first > window_end) return times;
  times.push_back(first);
  constexpr int kMaxRedraws = 100;
  while (true) {
    double step = sample_gaussian(mean_gap, sigma2, rng);
    for (int i = 0; i < kMaxRedraws && step < min_gap; ++i) {
      step = sample_gaussian(mean_gap, sigma2, rng);
    }
    step = std::max(step, min_gap);
    const Seconds next = times.back() + step;
    if (next > window_end) break;
    times.push_back(next);
  }
  return times;
}

std::vector<Seconds> generate_meeting_times(const Group& group, double sigma2, Seconds min_gap,
                                            RandomSource& rng) {
  const Seconds mean_gap = group.regularity * group.gap_multiplier;
  const Seconds lifetime = group.window_end - group.window_start;
  if (!(lifetime >= 0.0)) throw ContractError("generate_meeting_times: inverted window");
  const Seconds first =
      sample_uniform(group.window_start, group.window_start + std::min(mean_gap, lifetime), rng);
  return recurse_meeting_times(first, group.window_end, mean_gap, sigma2, min_gap, rng);
}

Seconds draw_meeting_duration(const GroupParams& params, RandomSource& rng) {
  return sample_tpl(params.duration, rng);
}

std::vector<NodeId> realize_attendance(const Group& group, RandomSource& rng) {
  if (group.attendance.size() != group.members.size()) {
    throw ContractError("realize_attendance: attendance not populated");
  }
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < group.members.size(); ++i) {
    if (rng.uniform01() < group.attendance[i]) out.push_back(group.members[i]);
  }
  return out;
}

namespace {
constexpr std::uint64_t kGroupStream = 0x47524F5550000000ULL;  // "GROUP"
}

Schedule build_schedule(const SocialGraph& graph, const GroupParams& params, RandomSource& rng) {
  params.validate();
  Schedule schedule;
  schedule.groups.reserve(params.num_groups);
  for (GroupId id = 0; id < params.num_groups; ++id) {
    RandomSource group_rng = rng.derive(kGroupStream + id);
    Group g = build_group(id, graph, params, group_rng);
    for (Seconds t : generate_meeting_times(g, params.sigma2, params.min_gap, group_rng)) {
      MeetingEvent m;
      m.group_id = id;
      m.start = t;
      m.duration = draw_meeting_duration(params, group_rng);
      m.attendees = realize_attendance(g, group_rng);
      schedule.meetings.push_back(std::move(m));
    }
    schedule.groups.push_back(std::move(g));
  }
  std::stable_sort(schedule.meetings.begin(), schedule.meetings.end(),
                   [](const MeetingEvent& a, const MeetingEvent& b) {
                     return a.start < b.start || (a.start == b.start && a.group_id < b.group_id);
                   });

  std::vector<Seconds> busy_until(graph.node_count(), 0.0);
  std::vector<char> has_booking(graph.node_count(), 0);
  std::size_t dropped = 0;
  for (auto& m : schedule.meetings) {
    std::vector<NodeId> kept;
    kept.reserve(m.attendees.size());
    for (NodeId v : m.attendees) {
      if (has_booking[v] && busy_until[v] > m.start) {
        ++dropped;
        continue;
      }
      has_booking[v] = 1;
      busy_until[v] = m.end();
      kept.push_back(v);
    }
    m.attendees = std::move(kept);
  }
  spdlog::debug("schedule: {} groups, {} meetings, {} double bookings dropped",
                schedule.groups.size(), schedule.meetings.size(), dropped);
  return schedule;
}

void write_schedule(const Schedule& schedule, const std::filesystem::path& path) {
  io::TextWriter w(path);
  std::string line;
  for (const auto& m : schedule.meetings) {
    line = std::to_string(m.group_id) + " " + io::format_exact(m.start) + " " +
           io::format_exact(m.duration) + " ";
    for (std::size_t i = 0; i < m.attendees.size(); ++i) {
      if (i > 0) line += ',';
      line += std::to_string(m.attendees[i]);
    }
    if (m.attendees.empty()) line += '-';
    line += '\n';
    w.write(line);
  }
  w.close();
}

}  // namespace grm
