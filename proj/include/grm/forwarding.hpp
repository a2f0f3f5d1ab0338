#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "grm/analysis.hpp"
#include "grm/core.hpp"
#include "grm/stats.hpp"
#include "grm/trace.hpp"

namespace grm {

struct Message {
  std::uint32_t id = 0;
  NodeId source = 0;
  NodeId destination = 0;
  Seconds created = 0.0;
  Seconds ttl = 0.0;

  Seconds expires() const noexcept { return created + ttl; }
};

/// A forwarding rule. The destination always accepts a copy; the rule is
/// consulted only for other peers.
class Protocol {
 public:
  virtual ~Protocol() = default;
  virtual std::string name() const = 0;
  virtual bool forward(NodeId carrier, NodeId peer, const Message& message) const = 0;
};

enum class Granularity {
  /// Copies may chain through every contact active at the same instant, and a
  /// node forwards newly acquired messages to peers it is already in contact with.
  Interval,
  /// Exchanges happen only when a contact starts, between its two endpoints.
  ContactStart,
};

struct ReplayMetrics {
  std::string protocol;
  Seconds ttl = 0.0;
  std::size_t created = 0;
  std::size_t delivered = 0;
  std::uint64_t transmissions = 0;
  std::vector<Seconds> latencies;

  double delivery_ratio() const noexcept {
    return created == 0 ? 0.0 : static_cast<double>(delivered) / static_cast<double>(created);
  }
  double mean_latency() const noexcept;
};

/// Replays the (normalized) trace once for all messages. Messages are alive
/// on [created, created + ttl]; a delivered message stays in the network and
/// further copies still count, but the destination never forwards it.
ReplayMetrics replay(const ContactTrace& trace, const Protocol& protocol,
                     std::span<const Message> messages,
                     Granularity granularity = Granularity::Interval);

class Flooding final : public Protocol {
 public:
  std::string name() const override { return "flooding"; }
  bool forward(NodeId, NodeId, const Message&) const override { return true; }
};

enum class Centrality { AggregatedDegree, WindowedDegree };

struct BubbleRapOptions {
  std::size_t clique_size = 3;
  Centrality centrality = Centrality::AggregatedDegree;
  /// Window length for Centrality::WindowedDegree.
  Seconds centrality_window = 6 * kHour;
};

class BubbleRap final : public Protocol {
 public:
  /// Communities by clique percolation of the warm-up aggregated graph; nodes
  /// in no community get a singleton one.
  BubbleRap(const ContactTrace& warmup, const BubbleRapOptions& options = {});
  /// Explicit state; local_rank[c][i] belongs to communities[c][i].
  BubbleRap(std::size_t node_count, std::vector<Community> communities,
            std::vector<double> global_rank, std::vector<std::vector<double>> local_rank);

  std::string name() const override { return "bubblerap"; }
  bool forward(NodeId carrier, NodeId peer, const Message& message) const override;

  const std::vector<Community>& communities() const noexcept { return communities_; }
  double global_rank(NodeId v) const { return global_.at(v); }
  /// Rank of `v` inside community `c`, or nullopt when not a member.
  std::optional<double> local_rank(std::size_t c, NodeId v) const;

 private:
  void index();

  std::vector<Community> communities_;
  std::vector<double> global_;
  std::vector<std::vector<double>> local_;
  std::vector<std::vector<std::uint32_t>> node_communities_;
};

struct GroupsNetOptions {
  DetectionParams detection;
  Seconds recency_window = 7 * kDay;
};

/// Group-to-group routing. Each detected warm-up group g meets again with
/// probability p(g) = (recent occurrences + 1) / (max recent occurrences + 1);
/// a message moves between groups g, h with probability |g ∩ h| / |g ∪ h|.
/// The path maximizes the product of p over visited groups and of the
/// transfer probabilities, from a group holding the source to one holding
/// the destination. A carrier forwards to peers further along the path, and
/// within the final group.
class GroupsNet final : public Protocol {
 public:
  GroupsNet(const ContactTrace& warmup, const GroupsNetOptions& options = {});
  /// Explicit groups and recent-occurrence counts.
  GroupsNet(std::size_t node_count, std::vector<std::vector<NodeId>> groups,
            std::vector<std::size_t> recent_occurrences);

  std::string name() const override { return "groupsnet"; }
  bool forward(NodeId carrier, NodeId peer, const Message& message) const override;

  /// Best group path (indices into groups()) or empty when none exists.
  const std::vector<std::uint32_t>& path(NodeId source, NodeId destination) const;
  const std::vector<std::vector<NodeId>>& groups() const noexcept { return groups_; }
  double meet_probability(std::uint32_t g) const { return meet_.at(g); }

 private:
  void index(std::vector<std::size_t> recent);
  std::vector<std::uint32_t> search(NodeId source, NodeId destination) const;
  int position(const std::vector<std::uint32_t>& path, NodeId v) const;

  std::size_t node_count_ = 0;
  std::vector<std::vector<NodeId>> groups_;
  std::vector<double> meet_;
  std::vector<std::vector<std::uint32_t>> node_groups_;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> transfer_;
  mutable std::map<std::pair<NodeId, NodeId>, std::vector<std::uint32_t>> paths_;
};

/// `count` messages with distinct uniform source/destination pairs and
/// creation times uniform over [from, to). TTL left at zero.
std::vector<Message> make_workload(std::size_t node_count, std::size_t count, Seconds from,
                                   Seconds to, RandomSource& rng);

/// One replay per (protocol, TTL), protocols outermost, on the same workload.
std::vector<ReplayMetrics> ttl_sweep(const ContactTrace& trace,
                                     std::span<const Protocol* const> protocols,
                                     std::span<const Message> workload,
                                     std::span<const Seconds> ttls,
                                     Granularity granularity = Granularity::Interval);

void write_metrics(std::span<const ReplayMetrics> rows, const std::filesystem::path& path);

}  // namespace grm
