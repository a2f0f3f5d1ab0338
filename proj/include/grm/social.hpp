#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "grm/core.hpp"
#include "grm/stats.hpp"

namespace grm {

using Edge = std::pair<NodeId, NodeId>;

/// Simple undirected graph on nodes 0..node_count-1 with optional community
/// labels. Immutable once built.
class SocialGraph {
 public:
  SocialGraph() = default;

  /// Builds the graph; throws ParameterError on self-loops, duplicate edges,
  /// out-of-range ids or a label vector of the wrong length.
  static SocialGraph from_edges(std::size_t node_count, std::vector<Edge> edges,
                                std::optional<std::vector<std::uint32_t>> labels = std::nullopt);

  std::size_t node_count() const noexcept { return adjacency_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  /// Edges with first < second, sorted.
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  /// Sorted neighbor list.
  std::span<const NodeId> neighbors(NodeId v) const { return adjacency_.at(v); }
  std::size_t degree(NodeId v) const { return adjacency_.at(v).size(); }
  bool has_edge(NodeId a, NodeId b) const;

  bool has_labels() const noexcept { return labels_.has_value(); }
  const std::optional<std::vector<std::uint32_t>>& labels() const noexcept { return labels_; }

  /// Component id per node, ids dense in order of lowest member.
  std::vector<std::uint32_t> components() const;

 private:
  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<Edge> edges_;
  std::optional<std::vector<std::uint32_t>> labels_;
};

/// Preferential attachment seeded with a clique on m+1 nodes; every later node
/// attaches to m distinct existing nodes chosen proportionally to degree.
SocialGraph generate_barabasi_albert(std::size_t n, std::size_t m, RandomSource& rng);

/// Clusters with normally distributed sizes (mean `mean_cluster_size`,
/// standard deviation mean/shape), then Bernoulli(p_in)/Bernoulli(p_out)
/// edges within/between clusters. Labels are cluster indices.
SocialGraph generate_gaussian_random_partition(std::size_t n, double mean_cluster_size,
                                               double shape_parameter, double p_in,
                                               double p_out, RandomSource& rng);

/// `num_caves` cliques of `cave_size` nodes. With rewire_probability > 0 each
/// edge's far endpoint is moved to a uniformly random node with that
/// probability (skipped when it would create a loop or duplicate).
SocialGraph generate_caveman(std::size_t num_caves, std::size_t cave_size,
                             double rewire_probability, RandomSource& rng);
SocialGraph generate_caveman(std::size_t num_caves, std::size_t cave_size);

SocialGraph generate_random_partition(std::span<const std::size_t> cluster_sizes, double p_in,
                                      double p_out, RandomSource& rng);

struct LoadedGraph {
  SocialGraph graph;
  /// original_ids[dense id] = id as written in the file.
  std::vector<std::uint64_t> original_ids;
  std::size_t dropped_self_loops = 0;
  std::size_t dropped_duplicates = 0;
};

/// Edge-list loader: two whitespace-separated non-negative ids per line,
/// '#' comments, extra columns (weights) ignored. Ids are renumbered densely
/// in increasing order of original id. The optional community file holds
/// `node_id community_id` lines keyed by original id.
LoadedGraph load_social_graph(const std::filesystem::path& path,
                              const std::optional<std::filesystem::path>& communities = {});

void save_social_graph(const SocialGraph& graph, const std::filesystem::path& path);
void save_communities(const SocialGraph& graph, const std::filesystem::path& path);

struct SnowballSample {
  std::vector<NodeId> members;  // sorted
  /// The seed's component was smaller than the requested size.
  bool truncated = false;
};

/// Grows a connected node set from `seed_node`: repeatedly picks a uniformly
/// random member that still has unvisited neighbors, then one of those
/// neighbors uniformly, until `target_size` members or the component is
/// exhausted.
SnowballSample snowball_sample(const SocialGraph& graph, NodeId seed_node,
                               std::size_t target_size, RandomSource& rng);

/// Number of members other than `user` adjacent to `user`. `members` must be
/// sorted and contain `user`.
std::size_t known_count(const SocialGraph& graph, NodeId user, std::span<const NodeId> members);

}  // namespace grm
