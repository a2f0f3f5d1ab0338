#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "grm/core.hpp"
#include "grm/groups.hpp"
#include "grm/mobility.hpp"

namespace grm {

struct ContactEvent {
  NodeId a = 0;  // a < b after normalization
  NodeId b = 0;
  Seconds start = 0.0;
  Seconds end = 0.0;

  Seconds duration() const noexcept { return end - start; }
  friend bool operator==(const ContactEvent&, const ContactEvent&) = default;
};

struct ContactTrace {
  std::size_t node_count = 0;
  Seconds horizon = 0.0;
  /// Sorted by (start, a, b) once normalized.
  std::vector<ContactEvent> events;
};

/// Orders each pair as a < b, drops empty intervals, merges overlapping or
/// touching contacts of the same pair, clips to [0, horizon] and sorts by
/// (start, a, b). node_count grows to cover every id seen.
void normalize(ContactTrace& trace);

/// Events whose start precedes `until`, with ends clipped to it.
ContactTrace trace_prefix(const ContactTrace& trace, Seconds until);

/// Meeting-mode contacts: every pair of nodes present at the same meeting is
/// in contact for the overlap of their presence windows.
ContactTrace extract_contacts_meeting(std::span<const Presence> presence, std::size_t node_count,
                                      Seconds horizon);

/// Proximity-mode contacts: positions sampled every `time_step`; a pair is in
/// contact while within `radio_range`. A run of in-range samples k0..k1
/// becomes [k0·Δ, (k1+1)·Δ] clipped to the horizon.
ContactTrace extract_contacts_proximity(std::span<const Itinerary> itineraries,
                                        double radio_range, Seconds time_step, Seconds horizon);

/// Sampled positions in ONE external-movement layout.
struct MovementTrace {
  double min_time = 0.0;
  double max_time = 0.0;
  double min_x = 0.0;
  double max_x = 0.0;
  double min_y = 0.0;
  double max_y = 0.0;
  struct Sample {
    double time;
    NodeId node;
    double x;
    double y;
  };
  /// Time-major, then node id.
  std::vector<Sample> samples;
};

/// Samples every itinerary at 0, Δ, 2Δ, ... up to the horizon (inclusive
/// when it is a multiple of Δ). Bounds cover the simulation area.
MovementTrace sample_movement(std::span<const Itinerary> itineraries, Seconds time_step,
                              double width, double height);

/// Header `minTime maxTime minX maxX minY maxY 0 0`, then `time id x y`;
/// every real with two fixed decimals.
void write_one_movement(const MovementTrace& movement, const std::filesystem::path& path);
void write_one_movement(std::span<const Itinerary> itineraries, Seconds time_step, double width,
                        double height, const std::filesystem::path& path);
MovementTrace read_one_movement(const std::filesystem::path& path);

/// `<time> CONN <a> <b> up|down` lines, globally sorted by time (downs
/// before ups at equal times, then by pair). Times use the shortest exact
/// decimal form.
void write_one_connections(const ContactTrace& trace, const std::filesystem::path& path);
/// `node_a,node_b,t_start,t_end` with a header line.
void write_contact_csv(const ContactTrace& trace, const std::filesystem::path& path);

enum class TraceFormat { OneConnections, Csv };

std::optional<TraceFormat> parse_trace_format(std::string_view name);

/// Reads and normalizes a contact trace. Unmatched `up` events are closed at
/// the horizon: `horizon` when given, otherwise the last event time.
ContactTrace read_contact_trace(const std::filesystem::path& path, TraceFormat format,
                                std::optional<Seconds> horizon = std::nullopt);

}  // namespace grm
