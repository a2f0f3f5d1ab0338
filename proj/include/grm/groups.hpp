#pragma once

#include <filesystem>
#include <limits>
#include <span>
#include <vector>

#include "grm/core.hpp"
#include "grm/social.hpp"
#include "grm/stats.hpp"

namespace grm {

/// Discrete distribution of the per-group regularity factor K.
class KDistribution {
 public:
  struct Entry {
    Seconds period;
    double probability;
  };

  KDistribution() = default;
  /// Throws ParameterError unless periods are positive, probabilities are
  /// non-negative and sum to 1 within 1e-9.
  explicit KDistribution(std::vector<Entry> entries);

  /// 70% 24 h, 15% 7 days, 15% 6 h.
  static KDistribution standard();

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  Seconds sample(RandomSource& rng) const;

 private:
  std::vector<Entry> entries_;
};

struct GroupParams {
  std::size_t num_groups = 0;
  Seconds horizon = 60 * kDay;         // T
  Seconds group_lifetime = 30 * kDay;  // T_G, the existence window length
  TruncatedPowerLaw size{2.24, 30.0, 2.0};
  /// Exponent and cutoff of the inter-meeting multiplier. The cutoff is a
  /// time; each group converts it to units of its own K.
  double gmt_alpha = 2.0;
  Seconds gmt_beta = 30 * kDay;
  TruncatedPowerLaw duration{2.0, 30 * kDay, 60.0};
  KDistribution k_distribution = KDistribution::standard();
  double sigma2 = kHour * kHour;  // variance of the inter-meeting jitter, s^2
  Seconds min_gap = 1.0;
  /// Testing aid: every member attends every meeting.
  bool force_full_attendance = false;

  void validate() const;
};

struct Group {
  GroupId id = 0;
  std::vector<NodeId> members;  // sorted
  Seconds regularity = kDay;    // K
  double gap_multiplier = 1.0;  // mu; the mean gap is K * mu
  Seconds window_start = 0.0;
  Seconds window_end = 0.0;
  /// Attendance probability per member, parallel to `members`.
  std::vector<double> attendance;
  /// The social component was smaller than the drawn size.
  bool truncated = false;

  std::size_t size() const noexcept { return members.size(); }
};

inline constexpr CellId kNoCell = std::numeric_limits<CellId>::max();

struct MeetingEvent {
  GroupId group_id = 0;
  Seconds start = 0.0;
  Seconds duration = 0.0;
  std::vector<NodeId> attendees;  // sorted
  CellId cell = kNoCell;

  Seconds end() const noexcept { return start + duration; }
};

struct Schedule {
  std::vector<Group> groups;
  /// Sorted by (start, group id).
  std::vector<MeetingEvent> meetings;
};

/// Group size draw: TPL sample rounded to the nearest integer, at least 2.
std::size_t draw_group_size(const TruncatedPowerLaw& size_dist, RandomSource& rng);

/// Draws size, snowball membership from a uniform seed node, K, mu,
/// attendance and existence window for group `id`. Seeds are redrawn (up to
/// 1000 times) until one has a neighbor, so groups have at least two members.
Group build_group(GroupId id, const SocialGraph& graph, const GroupParams& params,
                  RandomSource& rng);

/// The Gaussian recursion: first, first + N(mean_gap, sigma2), ... while the
/// next time stays <= window_end. Increments below `min_gap` are redrawn
/// (at most 100 times, then clamped).
std::vector<Seconds> recurse_meeting_times(Seconds first, Seconds window_end, Seconds mean_gap,
                                           double sigma2, Seconds min_gap, RandomSource& rng);

/// First meeting uniform over [window_start, window_start + min(K·mu, T_G)],
/// then the recursion up to the window end.
std::vector<Seconds> generate_meeting_times(const Group& group, double sigma2, Seconds min_gap,
                                            RandomSource& rng);

Seconds draw_meeting_duration(const GroupParams& params, RandomSource& rng);

/// Independent Bernoulli(attendance) per member.
std::vector<NodeId> realize_attendance(const Group& group, RandomSource& rng);

/// Every group's meetings with durations and realized attendance, sorted by
/// start, with double bookings resolved: a node already busy in an earlier
/// started meeting is removed from later overlapping ones.
Schedule build_schedule(const SocialGraph& graph, const GroupParams& params, RandomSource& rng);

/// Debug dump: `group_id start duration a,b,c` per line.
void write_schedule(const Schedule& schedule, const std::filesystem::path& path);

}  // namespace grm
