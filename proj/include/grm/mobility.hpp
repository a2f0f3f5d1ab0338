#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "grm/core.hpp"
#include "grm/groups.hpp"
#include "grm/stats.hpp"

namespace grm {

struct Position {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

double distance(const Position& a, const Position& b);

struct Grid {
  std::uint32_t cells_x = 30;
  std::uint32_t cells_y = 30;
  double cell_size = 50.0;

  void validate() const;
  std::size_t cell_count() const noexcept {
    return static_cast<std::size_t>(cells_x) * cells_y;
  }
  double width() const noexcept { return cells_x * cell_size; }
  double height() const noexcept { return cells_y * cell_size; }
  /// Row-major: id = j * cells_x + i.
  Position cell_center(CellId cell) const;
  CellId cell_of(const Position& p) const;
};

using HomeAssignment = std::vector<Position>;

/// I.i.d. uniform homes over the grid rectangle.
HomeAssignment assign_homes(std::size_t node_count, const Grid& grid, RandomSource& rng);

/// (1 + d / cell_size)^-gamma with d the distance from `home` to the cell center.
double decayed_distance(const Position& home, CellId cell, const Grid& grid, double gamma);

/// Mean decayed distance from the members' homes to the cell.
double cell_weight(CellId cell, std::span<const NodeId> members, const HomeAssignment& homes,
                   const Grid& grid, double gamma);

/// Cell weights normalized to a probability vector over all cells.
std::vector<double> place_probability(std::span<const NodeId> members,
                                      const HomeAssignment& homes, const Grid& grid,
                                      double gamma);

/// Samples cells from a fixed probability vector by inverse CDF.
class PlaceSampler {
 public:
  explicit PlaceSampler(std::span<const double> probabilities);
  CellId sample(RandomSource& rng) const;

 private:
  std::vector<double> cumulative_;
};

CellId choose_meeting_cell(const Group& group, MeetingEvent& meeting, const Grid& grid,
                           const HomeAssignment& homes, double gamma, RandomSource& rng);

/// Fills `cell` of every meeting; each group draws from its own stream.
void assign_meeting_cells(Schedule& schedule, const Grid& grid, const HomeAssignment& homes,
                          double gamma, RandomSource& rng);

enum class Activity : std::uint8_t { AtHome, Traveling, Waiting, InMeeting };

/// Start of a segment; the node moves linearly from this waypoint's position
/// to the next one's and the segment carries `activity`.
struct Waypoint {
  Seconds time = 0.0;
  Position position;
  Activity activity = Activity::AtHome;
  /// Index into Schedule::meetings for InMeeting segments.
  std::uint32_t meeting = 0;
};

struct Itinerary {
  NodeId node = 0;
  Position home;
  /// Strictly increasing times; the last waypoint is at the horizon.
  std::vector<Waypoint> waypoints;
};

/// Time a node is physically present at a meeting.
struct Presence {
  NodeId node = 0;
  std::uint32_t meeting = 0;
  Seconds from = 0.0;
  Seconds to = 0.0;
};

struct MovementParams {
  double speed = 1.4;  // length units per second
  Seconds horizon = 60 * kDay;
};

/// Per-node timelines: home until it must leave for its next attended
/// meeting (departing as late as possible), straight-line travel, presence
/// until the meeting ends, then home again unless the next meeting starts
/// before a round trip via home fits, in which case it goes directly. Late
/// arrivals shorten presence.
std::vector<Itinerary> build_itineraries(const Schedule& schedule, const Grid& grid,
                                         const HomeAssignment& homes,
                                         const MovementParams& params);

/// Presence windows of every node at every meeting it reached before the end.
std::vector<Presence> presence_windows(std::span<const Itinerary> itineraries);

Position position_at(const Itinerary& itinerary, Seconds t);

/// Lengths of the straight travel segments of all itineraries.
std::vector<double> flight_lengths(std::span<const Itinerary> itineraries);

}  // namespace grm
