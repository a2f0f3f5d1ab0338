#include "grm/forwarding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <queue>

#include "grm/io.hpp"

namespace grm {

double ReplayMetrics::mean_latency() const noexcept {
  if (latencies.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(latencies.begin(), latencies.end(), 0.0) /
         static_cast<double>(latencies.size());
}

namespace {

enum class EventKind : std::uint8_t { Down = 0, Up = 1, Create = 2, Expire = 3 };

struct Event {
  Seconds time;
  EventKind kind;
  std::uint32_t index;
};

class ReplayState {
 public:
  ReplayState(std::size_t nodes, const Protocol& protocol, std::span<const Message> messages,
              ReplayMetrics& metrics)
      : words_((messages.size() + 63) / 64),
        held_(nodes * words_, 0),
        alive_(messages.size(), 0),
        delivered_(messages.size(), 0),
        active_(nodes),
        protocol_(protocol),
        messages_(messages),
        metrics_(metrics) {}

  bool has(NodeId v, std::uint32_t m) const {
    return (held_[v * words_ + m / 64] >> (m % 64)) & 1u;
  }

  void create(std::uint32_t m, bool propagate) {
    alive_[m] = 1;
    const NodeId src = messages_[m].source;
    held_[src * words_ + m / 64] |= std::uint64_t{1} << (m % 64);
    if (propagate) {
      queue_.emplace_back(src, m);
      drain();
    }
  }

  void expire(std::uint32_t m) { alive_[m] = 0; }

  void up(NodeId a, NodeId b, Seconds t, bool propagate) {
    now_ = t;
    active_[a].push_back(b);
    active_[b].push_back(a);
    exchange(a, b);
    exchange(b, a);
    if (propagate) {
      drain();
    } else {
      queue_.clear();
    }
  }

  void down(NodeId a, NodeId b) {
    std::erase(active_[a], b);
    std::erase(active_[b], a);
  }

  void set_time(Seconds t) { now_ = t; }

 private:
  void exchange(NodeId from, NodeId to) {
    for (std::size_t w = 0; w < words_; ++w) {
      std::uint64_t bits = held_[from * words_ + w] & ~held_[to * words_ + w];
      while (bits != 0) {
        const int bit = std::countr_zero(bits);
        bits &= bits - 1;
        const auto m = static_cast<std::uint32_t>(w * 64 + static_cast<std::size_t>(bit));
        if (send(from, to, m)) queue_.emplace_back(to, m);
      }
    }
  }

  bool send(NodeId from, NodeId to, std::uint32_t m) {
    const Message& msg = messages_[m];
    if (!alive_[m] || has(to, m) || from == msg.destination) return false;
    if (to != msg.destination && !protocol_.forward(from, to, msg)) return false;
    held_[to * words_ + m / 64] |= std::uint64_t{1} << (m % 64);
    ++metrics_.transmissions;
    if (to == msg.destination && !delivered_[m]) {
      delivered_[m] = 1;
      ++metrics_.delivered;
      metrics_.latencies.push_back(now_ - msg.created);
    }
    return true;
  }

  void drain() {
    while (!queue_.empty()) {
      const auto [v, m] = queue_.front();
      queue_.pop_front();
      for (NodeId u : active_[v]) {
        if (send(v, u, m)) queue_.emplace_back(u, m);
      }
    }
  }

  std::size_t words_;
  std::vector<std::uint64_t> held_;
  std::vector<char> alive_;
  std::vector<char> delivered_;
  std::vector<std::vector<NodeId>> active_;
  std::deque<std::pair<NodeId, std::uint32_t>> queue_;
  const Protocol& protocol_;
  std::span<const Message> messages_;
  ReplayMetrics& metrics_;
  Seconds now_ = 0.0;
};

}  // namespace

ReplayMetrics replay(const ContactTrace& trace, const Protocol& protocol,
                     std::span<const Message> messages, Granularity granularity) {
  ReplayMetrics metrics;
  metrics.protocol = protocol.name();
  metrics.created = messages.size();
  if (!messages.empty()) metrics.ttl = messages.front().ttl;

  std::size_t nodes = trace.node_count;
  for (const auto& e : trace.events) nodes = std::max<std::size_t>(nodes, e.b + 1);
  for (const auto& m : messages) {
    if (m.source == m.destination) throw ContractError("replay: message source equals destination");
    nodes = std::max<std::size_t>(nodes, std::max(m.source, m.destination) + std::size_t{1});
  }

  std::vector<Event> events;
  events.reserve(trace.events.size() * 2 + messages.size() * 2);
  for (std::uint32_t i = 0; i < trace.events.size(); ++i) {
    events.push_back({trace.events[i].start, EventKind::Up, i});
    events.push_back({trace.events[i].end, EventKind::Down, i});
  }
  for (std::uint32_t i = 0; i < messages.size(); ++i) {
    events.push_back({messages[i].created, EventKind::Create, i});
    events.push_back({messages[i].expires(), EventKind::Expire, i});
  }
  std::sort(events.begin(), events.end(), [](const Event& x, const Event& y) {
    if (x.time != y.time) return x.time < y.time;
    if (x.kind != y.kind) return x.kind < y.kind;
    return x.index < y.index;
  });

  const bool propagate = granularity == Granularity::Interval;
  ReplayState state(nodes, protocol, messages, metrics);
  for (const auto& ev : events) {
    state.set_time(ev.time);
    switch (ev.kind) {
      case EventKind::Down:
        state.down(trace.events[ev.index].a, trace.events[ev.index].b);
        break;
      case EventKind::Up:
        state.up(trace.events[ev.index].a, trace.events[ev.index].b, ev.time, propagate);
        break;
      case EventKind::Create:
        state.create(ev.index, propagate);
        break;
      case EventKind::Expire:
        state.expire(ev.index);
        break;
    }
  }
  return metrics;
}

BubbleRap::BubbleRap(const ContactTrace& warmup, const BubbleRapOptions& options) {
  const SocialGraph graph = aggregate_contact_graph(warmup);
  const std::size_t n = graph.node_count();
  communities_ = clique_percolation(graph, options.clique_size);
  std::vector<char> covered(n, 0);
  for (const auto& c : communities_) {
    for (NodeId v : c) covered[v] = 1;
  }
  for (NodeId v = 0; v < n; ++v) {
    if (!covered[v]) communities_.push_back({v});
  }

  global_.assign(n, 0.0);
  if (options.centrality == Centrality::AggregatedDegree) {
    for (NodeId v = 0; v < n; ++v) global_[v] = static_cast<double>(graph.degree(v));
  } else {
    if (!(options.centrality_window > 0.0)) {
      throw ParameterError("bubble rap: centrality window must be positive");
    }
    const auto windows = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(warmup.horizon / options.centrality_window)));
    std::vector<std::vector<std::pair<NodeId, NodeId>>> seen(windows);
    for (const auto& e : warmup.events) {
      const auto lo = static_cast<std::size_t>(e.start / options.centrality_window);
      const auto hi = std::min(
          windows, static_cast<std::size_t>(std::ceil(e.end / options.centrality_window)));
      for (std::size_t w = std::min(lo, windows - 1); w < std::max(hi, lo + 1) && w < windows; ++w) {
        seen[w].emplace_back(e.a, e.b);
      }
    }
    for (auto& pairs : seen) {
      std::sort(pairs.begin(), pairs.end());
      pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
      for (const auto& [a, b] : pairs) {
        global_[a] += 1.0;
        global_[b] += 1.0;
      }
    }
    for (double& g : global_) g /= static_cast<double>(windows);
  }

  local_.resize(communities_.size());
  for (std::size_t c = 0; c < communities_.size(); ++c) {
    const auto& members = communities_[c];
    for (NodeId v : members) {
      std::size_t inside = 0;
      for (NodeId u : graph.neighbors(v)) {
        if (std::binary_search(members.begin(), members.end(), u)) ++inside;
      }
      local_[c].push_back(static_cast<double>(inside));
    }
  }
  index();
}

BubbleRap::BubbleRap(std::size_t node_count, std::vector<Community> communities,
                     std::vector<double> global_rank, std::vector<std::vector<double>> local_rank)
    : communities_(std::move(communities)),
      global_(std::move(global_rank)),
      local_(std::move(local_rank)) {
  if (global_.size() != node_count) throw ParameterError("bubble rap: one global rank per node");
  if (local_.size() != communities_.size()) {
    throw ParameterError("bubble rap: one local rank vector per community");
  }
  for (std::size_t c = 0; c < communities_.size(); ++c) {
    if (local_[c].size() != communities_[c].size()) {
      throw ParameterError("bubble rap: one local rank per community member");
    }
    if (!std::is_sorted(communities_[c].begin(), communities_[c].end())) {
      throw ParameterError("bubble rap: community members must be sorted");
    }
    for (NodeId v : communities_[c]) {
      if (v >= node_count) throw ParameterError("bubble rap: community member out of range");
    }
  }
  index();
}

void BubbleRap::index() {
  node_communities_.assign(global_.size(), {});
  for (std::uint32_t c = 0; c < communities_.size(); ++c) {
    for (NodeId v : communities_[c]) node_communities_[v].push_back(c);
  }
}

std::optional<double> BubbleRap::local_rank(std::size_t c, NodeId v) const {
  const auto& members = communities_.at(c);
  const auto it = std::lower_bound(members.begin(), members.end(), v);
  if (it == members.end() || *it != v) return std::nullopt;
  return local_[c][static_cast<std::size_t>(it - members.begin())];
}

bool BubbleRap::forward(NodeId carrier, NodeId peer, const Message& message) const {
  const auto& dest = node_communities_.at(message.destination);
  bool carrier_inside = false;
  for (auto c : dest) {
    if (local_rank(c, carrier)) carrier_inside = true;
  }
  if (carrier_inside) {
    for (auto c : dest) {
      const auto rc = local_rank(c, carrier);
      const auto rp = local_rank(c, peer);
      if (rc && rp && *rp > *rc) return true;
    }
    return false;
  }
  for (auto c : dest) {
    if (local_rank(c, peer)) return true;
  }
  return global_.at(peer) > global_.at(carrier);
}

GroupsNet::GroupsNet(const ContactTrace& warmup, const GroupsNetOptions& options)
    : node_count_(warmup.node_count) {
  const auto detected = detect_groups(warmup, options.detection);
  std::vector<std::size_t> recent;
  const Seconds since = warmup.horizon - options.recency_window;
  for (const auto& g : detected) {
    node_count_ = std::max<std::size_t>(node_count_, g.members.back() + std::size_t{1});
    groups_.push_back(g.members);
    recent.push_back(static_cast<std::size_t>(
        std::count_if(g.occurrences.begin(), g.occurrences.end(),
                      [&](const Occurrence& o) { return o.start >= since; })));
  }
  index(std::move(recent));
}

GroupsNet::GroupsNet(std::size_t node_count, std::vector<std::vector<NodeId>> groups,
                     std::vector<std::size_t> recent_occurrences)
    : node_count_(node_count), groups_(std::move(groups)) {
  if (recent_occurrences.size() != groups_.size()) {
    throw ParameterError("groups-net: one occurrence count per group");
  }
  for (auto& g : groups_) {
    std::sort(g.begin(), g.end());
    if (g.empty() || g.back() >= node_count) throw ParameterError("groups-net: bad group members");
  }
  index(std::move(recent_occurrences));
}

void GroupsNet::index(std::vector<std::size_t> recent) {
  const std::size_t max_recent = recent.empty() ? 0 : *std::max_element(recent.begin(), recent.end());
  meet_.clear();
  for (auto r : recent) {
    meet_.push_back(static_cast<double>(r + 1) / static_cast<double>(max_recent + 1));
  }
  node_groups_.assign(node_count_, {});
  for (std::uint32_t g = 0; g < groups_.size(); ++g) {
    for (NodeId v : groups_[g]) node_groups_[v].push_back(g);
  }
  transfer_.assign(groups_.size(), {});
  for (std::uint32_t g = 0; g < groups_.size(); ++g) {
    std::vector<std::uint32_t> near;
    for (NodeId v : groups_[g]) {
      for (auto h : node_groups_[v]) {
        if (h != g) near.push_back(h);
      }
    }
    std::sort(near.begin(), near.end());
    near.erase(std::unique(near.begin(), near.end()), near.end());
    for (auto h : near) transfer_[g].emplace_back(h, jaccard(groups_[g], groups_[h]));
  }
}

std::vector<std::uint32_t> GroupsNet::search(NodeId source, NodeId destination) const {
  if (source >= node_count_ || destination >= node_count_) return {};
  const auto& from = node_groups_[source];
  const auto& to = node_groups_[destination];
  if (from.empty() || to.empty()) return {};
  constexpr auto kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<double> dist(groups_.size(), std::numeric_limits<double>::infinity());
  std::vector<std::uint32_t> prev(groups_.size(), kNone);
  std::vector<char> target(groups_.size(), 0);
  for (auto g : to) target[g] = 1;
  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (auto g : from) {
    dist[g] = -std::log(meet_[g]);
    pq.emplace(dist[g], g);
  }
  while (!pq.empty()) {
    const auto [d, g] = pq.top();
    pq.pop();
    if (d > dist[g]) continue;
    if (target[g]) {
      std::vector<std::uint32_t> path;
      for (auto v = g; v != kNone; v = prev[v]) path.push_back(v);
      std::reverse(path.begin(), path.end());
      return path;
    }
    for (const auto& [h, p] : transfer_[g]) {
      const double nd = d - std::log(p) - std::log(meet_[h]);
      if (nd < dist[h]) {
        dist[h] = nd;
        prev[h] = g;
        pq.emplace(nd, h);
      }
    }
  }
  return {};
}

const std::vector<std::uint32_t>& GroupsNet::path(NodeId source, NodeId destination) const {
  const auto key = std::make_pair(source, destination);
  auto it = paths_.find(key);
  if (it == paths_.end()) it = paths_.emplace(key, search(source, destination)).first;
  return it->second;
}

int GroupsNet::position(const std::vector<std::uint32_t>& path, NodeId v) const {
  for (auto i = static_cast<int>(path.size()) - 1; i >= 0; --i) {
    const auto& g = groups_[path[static_cast<std::size_t>(i)]];
    if (std::binary_search(g.begin(), g.end(), v)) return i;
  }
  return -1;
}

bool GroupsNet::forward(NodeId carrier, NodeId peer, const Message& message) const {
  const auto& p = path(message.source, message.destination);
  if (p.empty()) return false;
  const int pc = position(p, carrier);
  const int pp = position(p, peer);
  const int last = static_cast<int>(p.size()) - 1;
  return pp > pc || (pc == last && pp == last);
}

std::vector<Message> make_workload(std::size_t node_count, std::size_t count, Seconds from,
                                   Seconds to, RandomSource& rng) {
  if (node_count < 2) throw ParameterError("workload: need at least two nodes");
  if (!(to >= from)) throw ParameterError("workload: empty creation span");
  std::vector<Message> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Message m;
    m.id = i;
    m.source = static_cast<NodeId>(rng.below(node_count));
    m.destination = static_cast<NodeId>(rng.below(node_count - 1));
    if (m.destination >= m.source) ++m.destination;
    m.created = sample_uniform(from, to, rng);
    out.push_back(m);
  }
  return out;
}

std::vector<ReplayMetrics> ttl_sweep(const ContactTrace& trace,
                                     std::span<const Protocol* const> protocols,
                                     std::span<const Message> workload,
                                     std::span<const Seconds> ttls, Granularity granularity) {
  std::vector<ReplayMetrics> rows;
  for (const Protocol* protocol : protocols) {
    for (Seconds ttl : ttls) {
      std::vector<Message> messages(workload.begin(), workload.end());
      for (auto& m : messages) m.ttl = ttl;
      auto metrics = replay(trace, *protocol, messages, granularity);
      metrics.ttl = ttl;
      rows.push_back(std::move(metrics));
    }
  }
  return rows;
}

void write_metrics(std::span<const ReplayMetrics> rows, const std::filesystem::path& path) {
  io::TextWriter w(path);
  std::string buf = "protocol,ttl_hours,delivery_ratio,transmissions,mean_latency_hours\n";
  for (const auto& r : rows) {
    buf += r.protocol + "," + io::format_exact(r.ttl / kHour) + "," +
           io::format_exact(r.delivery_ratio()) + "," + std::to_string(r.transmissions) + ",";
    if (!r.latencies.empty()) buf += io::format_exact(r.mean_latency() / kHour);
    buf += "\n";
  }
  w.write(buf);
  w.close();
}

}  // namespace grm
