#include "grm/trace.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <unordered_map>

#include "grm/io.hpp"

namespace grm {

namespace {

bool by_start(const ContactEvent& x, const ContactEvent& y) {
  if (x.start != y.start) return x.start < y.start;
  if (x.a != y.a) return x.a < y.a;
  if (x.b != y.b) return x.b < y.b;
  return x.end < y.end;
}

}  // namespace

void normalize(ContactTrace& trace) {
  auto& ev = trace.events;
  Seconds max_end = 0.0;
  for (auto& e : ev) {
    if (e.a > e.b) std::swap(e.a, e.b);
    max_end = std::max(max_end, e.end);
    trace.node_count = std::max<std::size_t>(trace.node_count, static_cast<std::size_t>(e.b) + 1);
  }
  if (!(trace.horizon > 0.0)) trace.horizon = max_end;
  for (auto& e : ev) {
    e.start = std::max(e.start, 0.0);
    e.end = std::min(e.end, trace.horizon);
  }
  std::erase_if(ev, [](const ContactEvent& e) { return !(e.end > e.start) || e.a == e.b; });
  std::sort(ev.begin(), ev.end(), [](const ContactEvent& x, const ContactEvent& y) {
    if (x.a != y.a) return x.a < y.a;
    if (x.b != y.b) return x.b < y.b;
    return x.start < y.start || (x.start == y.start && x.end < y.end);
  });
  std::vector<ContactEvent> merged;
  merged.reserve(ev.size());
  for (const auto& e : ev) {
    if (!merged.empty() && merged.back().a == e.a && merged.back().b == e.b &&
        e.start <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, e.end);
    } else {
      merged.push_back(e);
    }
  }
  std::sort(merged.begin(), merged.end(), by_start);
  ev = std::move(merged);
}

ContactTrace trace_prefix(const ContactTrace& trace, Seconds until) {
  ContactTrace out;
  out.node_count = trace.node_count;
  out.horizon = std::min(until, trace.horizon);
  for (const auto& e : trace.events) {
    if (e.start >= until) continue;
    ContactEvent c = e;
    c.end = std::min(c.end, until);
    if (c.end > c.start) out.events.push_back(c);
  }
  return out;
}

ContactTrace extract_contacts_meeting(std::span<const Presence> presence, std::size_t node_count,
                                      Seconds horizon) {
  std::vector<Presence> sorted(presence.begin(), presence.end());
  std::sort(sorted.begin(), sorted.end(), [](const Presence& x, const Presence& y) {
    return x.meeting < y.meeting || (x.meeting == y.meeting && x.node < y.node);
  });
  ContactTrace trace;
  trace.node_count = node_count;
  trace.horizon = horizon;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].meeting == sorted[i].meeting) ++j;
    for (std::size_t p = i; p < j; ++p) {
      for (std::size_t q = p + 1; q < j; ++q) {
        const Seconds from = std::max(sorted[p].from, sorted[q].from);
        const Seconds to = std::min(sorted[p].to, sorted[q].to);
        if (to > from) trace.events.push_back({sorted[p].node, sorted[q].node, from, to});
      }
    }
    i = j;
  }
  normalize(trace);
  return trace;
}

namespace {

// Interpolates positions at non-decreasing times with one cursor per node.
class PositionCursor {
 public:
  explicit PositionCursor(const Itinerary& it) : it_(&it) {}

  Position at(Seconds t) {
    const auto& wps = it_->waypoints;
    while (k_ + 1 < wps.size() && wps[k_ + 1].time <= t) ++k_;
    if (k_ + 1 >= wps.size()) return wps.back().position;
    const auto& a = wps[k_];
    const auto& b = wps[k_ + 1];
    const double f = (t - a.time) / (b.time - a.time);
    return {a.position.x + f * (b.position.x - a.position.x),
            a.position.y + f * (b.position.y - a.position.y)};
  }

 private:
  const Itinerary* it_;
  std::size_t k_ = 0;
};

}  // namespace

ContactTrace extract_contacts_proximity(std::span<const Itinerary> itineraries,
                                        double radio_range, Seconds time_step, Seconds horizon) {
  if (!(radio_range > 0.0)) throw ParameterError("proximity: radio range must be positive");
  if (!(time_step > 0.0)) throw ParameterError("proximity: time step must be positive");
  const std::size_t n = itineraries.size();
  std::vector<PositionCursor> cursors;
  cursors.reserve(n);
  for (const auto& it : itineraries) cursors.emplace_back(it);

  ContactTrace trace;
  trace.node_count = n;
  trace.horizon = horizon;
  const auto steps = static_cast<std::int64_t>(std::floor(horizon / time_step));
  const double r2 = radio_range * radio_range;

  std::vector<Position> pos(n);
  std::vector<NodeId> order(n);
  std::vector<std::uint64_t> current;
  std::vector<std::uint64_t> previous;
  std::unordered_map<std::uint64_t, Seconds> open;
  auto close = [&](std::uint64_t key, Seconds end) {
    const auto it = open.find(key);
    const auto a = static_cast<NodeId>(key >> 32);
    const auto b = static_cast<NodeId>(key & 0xFFFFFFFFu);
    trace.events.push_back({a, b, it->second, std::min(end, horizon)});
    open.erase(it);
  };

  for (std::int64_t k = 0; k <= steps; ++k) {
    const Seconds t = static_cast<double>(k) * time_step;
    for (NodeId v = 0; v < n; ++v) {
      pos[v] = cursors[v].at(t);
      order[v] = v;
    }
    std::sort(order.begin(), order.end(), [&](NodeId x, NodeId y) {
      return pos[x].x < pos[y].x || (pos[x].x == pos[y].x && x < y);
    });
    current.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Position& pi = pos[order[i]];
      for (std::size_t j = i + 1; j < n && pos[order[j]].x - pi.x <= radio_range; ++j) {
        const double dx = pos[order[j]].x - pi.x;
        const double dy = pos[order[j]].y - pi.y;
        if (dx * dx + dy * dy <= r2) {
          const NodeId a = std::min(order[i], order[j]);
          const NodeId b = std::max(order[i], order[j]);
          current.push_back((static_cast<std::uint64_t>(a) << 32) | b);
        }
      }
    }
    std::sort(current.begin(), current.end());
    // Pairs that left range at this sample end at t; new pairs start at t.
    std::size_t p = 0;
    std::size_t c = 0;
    while (p < previous.size() || c < current.size()) {
      if (c == current.size() || (p < previous.size() && previous[p] < current[c])) {
        close(previous[p++], t);
      } else if (p == previous.size() || current[c] < previous[p]) {
        open.emplace(current[c++], t);
      } else {
        ++p;
        ++c;
      }
    }
    std::swap(previous, current);
  }
  const Seconds final_end = (static_cast<double>(steps) + 1.0) * time_step;
  for (std::uint64_t key : previous) close(key, final_end);
  normalize(trace);
  return trace;
}

MovementTrace sample_movement(std::span<const Itinerary> itineraries, Seconds time_step,
                              double width, double height) {
  if (!(time_step > 0.0)) throw ParameterError("movement: time step must be positive");
  MovementTrace mv;
  if (itineraries.empty()) return mv;
  const Seconds horizon = itineraries.front().waypoints.back().time;
  mv.min_time = 0.0;
  mv.max_time = horizon;
  mv.max_x = width;
  mv.max_y = height;
  std::vector<PositionCursor> cursors;
  for (const auto& it : itineraries) cursors.emplace_back(it);
  const auto steps = static_cast<std::int64_t>(std::floor(horizon / time_step + 1e-9));
  mv.samples.reserve(static_cast<std::size_t>(steps + 1) * itineraries.size());
  for (std::int64_t k = 0; k <= steps; ++k) {
    const Seconds t = std::min(static_cast<double>(k) * time_step, horizon);
    for (std::size_t v = 0; v < itineraries.size(); ++v) {
      const Position p = cursors[v].at(t);
      mv.samples.push_back({t, itineraries[v].node, p.x, p.y});
    }
  }
  return mv;
}

namespace {

void append_fixed2(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  out.append(buf, ptr);
}

void append_uint(std::string& out, std::uint64_t v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  out.append(buf, ptr);
}

}  // namespace

void write_one_movement(const MovementTrace& movement, const std::filesystem::path& path) {
  io::TextWriter w(path);
  std::string buf;
  for (double v : {movement.min_time, movement.max_time, movement.min_x, movement.max_x,
                   movement.min_y, movement.max_y}) {
    append_fixed2(buf, v);
    buf += ' ';
  }
  buf += "0 0\n";
  for (const auto& s : movement.samples) {
    append_fixed2(buf, s.time);
    buf += ' ';
    append_uint(buf, s.node);
    buf += ' ';
    append_fixed2(buf, s.x);
    buf += ' ';
    append_fixed2(buf, s.y);
    buf += '\n';
    if (buf.size() > (1 << 20)) {
      w.write(buf);
      buf.clear();
    }
  }
  w.write(buf);
  w.close();
}

void write_one_movement(std::span<const Itinerary> itineraries, Seconds time_step, double width,
                        double height, const std::filesystem::path& path) {
  write_one_movement(sample_movement(itineraries, time_step, width, height), path);
}

MovementTrace read_one_movement(const std::filesystem::path& path) {
  io::LineReader reader(path);
  MovementTrace mv;
  auto header = reader.next();
  if (!header) throw ParseError(reader.source(), 1, "missing header");
  const auto h = io::split_ws(*header);
  if (h.size() != 8) throw ParseError(reader.source(), 1, "header must have 8 fields");
  double* slots[] = {&mv.min_time, &mv.max_time, &mv.min_x, &mv.max_x, &mv.min_y, &mv.max_y};
  for (std::size_t i = 0; i < 6; ++i) {
    const auto v = io::parse_double(h[i]);
    if (!v) throw ParseError(reader.source(), 1, "malformed header value");
    *slots[i] = *v;
  }
  while (auto line = reader.next()) {
    if (io::trim(*line).empty()) continue;
    const auto f = io::split_ws(*line);
    if (f.size() != 4) {
      throw ParseError(reader.source(), reader.line_number(), "expected `time id x y`");
    }
    const auto t = io::parse_double(f[0]);
    const auto id = io::parse_uint(f[1]);
    const auto x = io::parse_double(f[2]);
    const auto y = io::parse_double(f[3]);
    if (!t || !id || !x || !y) {
      throw ParseError(reader.source(), reader.line_number(), "malformed movement sample");
    }
    if (!mv.samples.empty() && *t < mv.samples.back().time) {
      throw ParseError(reader.source(), reader.line_number(), "times must be non-decreasing");
    }
    mv.samples.push_back({*t, static_cast<NodeId>(*id), *x, *y});
  }
  return mv;
}

void write_one_connections(const ContactTrace& trace, const std::filesystem::path& path) {
  struct Line {
    Seconds time;
    bool up;
    NodeId a;
    NodeId b;
  };
  std::vector<Line> lines;
  lines.reserve(trace.events.size() * 2);
  for (const auto& e : trace.events) {
    lines.push_back({e.start, true, e.a, e.b});
    lines.push_back({e.end, false, e.a, e.b});
  }
  std::sort(lines.begin(), lines.end(), [](const Line& x, const Line& y) {
    if (x.time != y.time) return x.time < y.time;
    if (x.up != y.up) return !x.up;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  io::TextWriter w(path);
  std::string buf;
  for (const auto& l : lines) {
    buf += io::format_exact(l.time);
    buf += " CONN ";
    append_uint(buf, l.a);
    buf += ' ';
    append_uint(buf, l.b);
    buf += l.up ? " up\n" : " down\n";
    if (buf.size() > (1 << 20)) {
      w.write(buf);
      buf.clear();
    }
  }
  w.write(buf);
  w.close();
}

void write_contact_csv(const ContactTrace& trace, const std::filesystem::path& path) {
  io::TextWriter w(path);
  std::string buf = "node_a,node_b,t_start,t_end\n";
  for (const auto& e : trace.events) {
    append_uint(buf, e.a);
    buf += ',';
    append_uint(buf, e.b);
    buf += ',';
    buf += io::format_exact(e.start);
    buf += ',';
    buf += io::format_exact(e.end);
    buf += '\n';
    if (buf.size() > (1 << 20)) {
      w.write(buf);
      buf.clear();
    }
  }
  w.write(buf);
  w.close();
}

std::optional<TraceFormat> parse_trace_format(std::string_view name) {
  if (name == "one" || name == "one-connections" || name == "conn") {
    return TraceFormat::OneConnections;
  }
  if (name == "csv") return TraceFormat::Csv;
  return std::nullopt;
}

namespace {

ContactTrace read_one_connections(io::LineReader& reader, std::optional<Seconds> horizon) {
  ContactTrace trace;
  std::map<std::pair<NodeId, NodeId>, Seconds> open;
  Seconds last_time = 0.0;
  while (auto line = reader.next()) {
    const auto trimmed = io::trim(*line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto f = io::split_ws(trimmed);
    if (f.size() != 5 || f[1] != "CONN" || (f[4] != "up" && f[4] != "down")) {
      throw ParseError(reader.source(), reader.line_number(), "expected `<time> CONN <a> <b> up|down`");
    }
    const auto t = io::parse_double(f[0]);
    const auto a = io::parse_uint(f[2]);
    const auto b = io::parse_uint(f[3]);
    if (!t || !a || !b) {
      throw ParseError(reader.source(), reader.line_number(), "malformed connection event");
    }
    last_time = std::max(last_time, *t);
    const auto x = static_cast<NodeId>(*a);
    const auto y = static_cast<NodeId>(*b);
    const std::pair<NodeId, NodeId> key{std::min(x, y), std::max(x, y)};
    trace.node_count = std::max<std::size_t>(trace.node_count, key.second + 1);
    if (f[4] == "up") {
      if (!open.emplace(key, *t).second) {
        spdlog::warn("{}:{}: repeated up for {}-{}", reader.source(), reader.line_number(),
                     key.first, key.second);
      }
    } else {
      const auto it = open.find(key);
      if (it == open.end()) {
        spdlog::warn("{}:{}: down without up for {}-{}", reader.source(), reader.line_number(),
                     key.first, key.second);
        continue;
      }
      trace.events.push_back({key.first, key.second, it->second, *t});
      open.erase(it);
    }
  }
  trace.horizon = horizon.value_or(last_time);
  for (const auto& [key, start] : open) {
    spdlog::warn("{}: closing unmatched up for {}-{} at the horizon", reader.source(), key.first,
                 key.second);
    trace.events.push_back({key.first, key.second, start, trace.horizon});
  }
  return trace;
}

ContactTrace read_csv(io::LineReader& reader, std::optional<Seconds> horizon) {
  ContactTrace trace;
  Seconds last_time = 0.0;
  bool first = true;
  while (auto line = reader.next()) {
    const auto trimmed = io::trim(*line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto f = io::split_char(trimmed, ',');
    if (first) {
      first = false;
      if (!f.empty() && !io::parse_uint(f[0])) continue;  // header
    }
    if (f.size() != 4) {
      throw ParseError(reader.source(), reader.line_number(), "expected `node_a,node_b,t_start,t_end`");
    }
    const auto a = io::parse_uint(f[0]);
    const auto b = io::parse_uint(f[1]);
    const auto s = io::parse_double(f[2]);
    const auto e = io::parse_double(f[3]);
    if (!a || !b || !s || !e) {
      throw ParseError(reader.source(), reader.line_number(), "malformed contact record");
    }
    last_time = std::max(last_time, *e);
    trace.events.push_back({static_cast<NodeId>(*a), static_cast<NodeId>(*b), *s, *e});
  }
  trace.horizon = horizon.value_or(last_time);
  return trace;
}

}  // namespace

ContactTrace read_contact_trace(const std::filesystem::path& path, TraceFormat format,
                                std::optional<Seconds> horizon) {
  io::LineReader reader(path);
  ContactTrace trace = format == TraceFormat::OneConnections ? read_one_connections(reader, horizon)
                                                             : read_csv(reader, horizon);
  normalize(trace);
  return trace;
}

}  // namespace grm
