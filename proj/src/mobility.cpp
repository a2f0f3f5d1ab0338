#include "grm/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace grm {

double distance(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

void Grid::validate() const {
  if (cells_x == 0 || cells_y == 0) throw ParameterError("grid: cell counts must be positive");
  if (!(cell_size > 0.0)) throw ParameterError("grid: cell size must be positive");
}

Position Grid::cell_center(CellId cell) const {
  if (cell >= cell_count()) throw ContractError("grid: cell id out of range");
  const auto i = cell % cells_x;
  const auto j = cell / cells_x;
  return {(i + 0.5) * cell_size, (j + 0.5) * cell_size};
}

CellId Grid::cell_of(const Position& p) const {
  const auto i = std::min<std::uint32_t>(cells_x - 1, static_cast<std::uint32_t>(
                                                          std::max(0.0, p.x / cell_size)));
  const auto j = std::min<std::uint32_t>(cells_y - 1, static_cast<std::uint32_t>(
                                                          std::max(0.0, p.y / cell_size)));
  return j * cells_x + i;
}

HomeAssignment assign_homes(std::size_t node_count, const Grid& grid, RandomSource& rng) {
  grid.validate();
  HomeAssignment homes(node_count);
  for (auto& h : homes) {
    h.x = sample_uniform(0.0, grid.width(), rng);
    h.y = sample_uniform(0.0, grid.height(), rng);
  }
  return homes;
}

double decayed_distance(const Position& home, CellId cell, const Grid& grid, double gamma) {
  if (!(gamma > 0.0)) throw ParameterError("decay exponent gamma must be positive");
  const double d = distance(home, grid.cell_center(cell));
  return std::pow(1.0 + d / grid.cell_size, -gamma);
}

double cell_weight(CellId cell, std::span<const NodeId> members, const HomeAssignment& homes,
                   const Grid& grid, double gamma) {
  if (members.empty()) throw ContractError("cell_weight: empty group");
  double sum = 0.0;
  for (NodeId m : members) sum += decayed_distance(homes.at(m), cell, grid, gamma);
  return sum / static_cast<double>(members.size());
}

std::vector<double> place_probability(std::span<const NodeId> members,
                                      const HomeAssignment& homes, const Grid& grid,
                                      double gamma) {
  grid.validate();
  std::vector<double> p(grid.cell_count());
  double total = 0.0;
  for (CellId c = 0; c < p.size(); ++c) {
    p[c] = cell_weight(c, members, homes, grid, gamma);
    total += p[c];
  }
  for (double& v : p) v /= total;
  return p;
}

PlaceSampler::PlaceSampler(std::span<const double> probabilities) {
  cumulative_.reserve(probabilities.size());
  double acc = 0.0;
  for (double p : probabilities) {
    acc += p;
    cumulative_.push_back(acc);
  }
  if (cumulative_.empty() || !(acc > 0.0)) throw ContractError("PlaceSampler: no mass");
}

CellId PlaceSampler::sample(RandomSource& rng) const {
  const double u = rng.uniform01() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto idx = std::min<std::size_t>(it - cumulative_.begin(), cumulative_.size() - 1);
  return static_cast<CellId>(idx);
}

CellId choose_meeting_cell(const Group& group, MeetingEvent& meeting, const Grid& grid,
                           const HomeAssignment& homes, double gamma, RandomSource& rng) {
  const PlaceSampler sampler(place_probability(group.members, homes, grid, gamma));
  meeting.cell = sampler.sample(rng);
  return meeting.cell;
}

namespace {
constexpr std::uint64_t kPlaceStream = 0x504C414345000000ULL;  // "PLACE"
}

void assign_meeting_cells(Schedule& schedule, const Grid& grid, const HomeAssignment& homes,
                          double gamma, RandomSource& rng) {
  std::vector<std::vector<std::size_t>> by_group(schedule.groups.size());
  for (std::size_t i = 0; i < schedule.meetings.size(); ++i) {
    by_group.at(schedule.meetings[i].group_id).push_back(i);
  }
  for (const auto& g : schedule.groups) {
    const auto& indices = by_group[g.id];
    if (indices.empty()) continue;
    RandomSource group_rng = rng.derive(kPlaceStream + g.id);
    const PlaceSampler sampler(place_probability(g.members, homes, grid, gamma));
    for (std::size_t i : indices) schedule.meetings[i].cell = sampler.sample(group_rng);
  }
}

namespace {

class ItineraryBuilder {
 public:
  explicit ItineraryBuilder(Itinerary& it) : it_(it) {}

  void push(Seconds t, Position p, Activity a, std::uint32_t meeting = 0) {
    auto& wps = it_.waypoints;
    if (!wps.empty() && t <= wps.back().time) {
      // A zero-length segment: the later state replaces it.
      wps.back() = Waypoint{wps.back().time, p, a, meeting};
      return;
    }
    wps.push_back(Waypoint{t, p, a, meeting});
  }

  void finish(Seconds horizon) {
    auto& wps = it_.waypoints;
    const auto beyond = std::find_if(wps.begin(), wps.end(),
                                     [&](const Waypoint& w) { return w.time > horizon; });
    if (beyond != wps.end()) {
      const Waypoint& prev = *(beyond - 1);
      const double f = (horizon - prev.time) / (beyond->time - prev.time);
      const Position p{prev.position.x + f * (beyond->position.x - prev.position.x),
                       prev.position.y + f * (beyond->position.y - prev.position.y)};
      const Activity a = prev.activity;
      const auto meeting = prev.meeting;
      wps.erase(beyond, wps.end());
      push(horizon, p, a, meeting);
    } else if (wps.back().time < horizon) {
      const Waypoint last = wps.back();
      wps.push_back(Waypoint{horizon, last.position, last.activity, last.meeting});
    }
  }

 private:
  Itinerary& it_;
};

}  // namespace

std::vector<Itinerary> build_itineraries(const Schedule& schedule, const Grid& grid,
                                         const HomeAssignment& homes,
                                         const MovementParams& params) {
  if (!(params.speed > 0.0)) throw ParameterError("mobility: speed must be positive");
  if (!(params.horizon > 0.0)) throw ParameterError("mobility: horizon must be positive");
  const std::size_t n = homes.size();
  std::vector<std::vector<std::uint32_t>> attended(n);
  for (std::uint32_t mi = 0; mi < schedule.meetings.size(); ++mi) {
    const auto& m = schedule.meetings[mi];
    if (m.start >= params.horizon) continue;
    if (m.cell == kNoCell && !m.attendees.empty()) {
      throw ContractError("build_itineraries: meeting without an assigned cell");
    }
    for (NodeId v : m.attendees) attended.at(v).push_back(mi);
  }

  const double v = params.speed;
  std::vector<Itinerary> out(n);
  for (NodeId node = 0; node < n; ++node) {
    Itinerary& it = out[node];
    it.node = node;
    it.home = homes[node];
    ItineraryBuilder b(it);
    const Position home = homes[node];
    Position pos = home;
    Seconds free = 0.0;
    bool at_home = true;
    b.push(0.0, home, Activity::AtHome);

    for (std::uint32_t mi : attended[node]) {
      const auto& m = schedule.meetings[mi];
      const Position target = grid.cell_center(m.cell);
      const Seconds end = std::min(m.end(), params.horizon);
      if (!at_home) {
        const Seconds back = distance(pos, home) / v;
        const Seconds out_again = distance(home, target) / v;
        if (m.start - free >= back + out_again) {
          b.push(free, pos, Activity::Traveling);
          free += back;
          pos = home;
          at_home = true;
          b.push(free, home, Activity::AtHome);
        }
      }
      const Seconds travel = distance(pos, target) / v;
      const Seconds depart = std::max(free, m.start - travel);
      if (depart > free && !at_home) b.push(free, pos, Activity::Waiting);
      if (travel > 0.0) b.push(depart, pos, Activity::Traveling);
      const Seconds arrival = depart + travel;
      pos = target;
      at_home = false;
      if (arrival < end) {
        b.push(arrival, target, Activity::InMeeting, mi);
        free = end;
      } else {
        b.push(arrival, target, Activity::Waiting);
        free = arrival;
      }
    }
    if (!at_home) {
      b.push(free, pos, Activity::Traveling);
      b.push(free + distance(pos, home) / v, home, Activity::AtHome);
    }
    b.finish(params.horizon);
  }
  return out;
}

std::vector<Presence> presence_windows(std::span<const Itinerary> itineraries) {
  std::vector<Presence> out;
  for (const auto& it : itineraries) {
    const auto& wps = it.waypoints;
    for (std::size_t k = 0; k + 1 < wps.size(); ++k) {
      if (wps[k].activity == Activity::InMeeting) {
        out.push_back(Presence{it.node, wps[k].meeting, wps[k].time, wps[k + 1].time});
      }
    }
  }
  return out;
}

Position position_at(const Itinerary& itinerary, Seconds t) {
  const auto& wps = itinerary.waypoints;
  if (wps.empty()) throw ContractError("position_at: empty itinerary");
  if (t < wps.front().time || t > wps.back().time) {
    throw std::out_of_range("position_at: time " + std::to_string(t) + " outside itinerary");
  }
  auto it = std::upper_bound(wps.begin(), wps.end(), t,
                             [](Seconds value, const Waypoint& w) { return value < w.time; });
  if (it == wps.end()) return wps.back().position;
  const Waypoint& next = *it;
  const Waypoint& prev = *(it - 1);
  const double f = (t - prev.time) / (next.time - prev.time);
  return {prev.position.x + f * (next.position.x - prev.position.x),
          prev.position.y + f * (next.position.y - prev.position.y)};
}

std::vector<double> flight_lengths(std::span<const Itinerary> itineraries) {
  std::vector<double> out;
  for (const auto& it : itineraries) {
    const auto& wps = it.waypoints;
    for (std::size_t k = 0; k + 1 < wps.size(); ++k) {
      if (wps[k].activity != Activity::Traveling) continue;
      const double d = distance(wps[k].position, wps[k + 1].position);
      if (d > 0.0) out.push_back(d);
    }
  }
  return out;
}

}  // namespace grm
