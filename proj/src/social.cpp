#include "grm/social.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>

#include "grm/io.hpp"

namespace grm {

SocialGraph SocialGraph::from_edges(std::size_t node_count, std::vector<Edge> edges,
                                    std::optional<std::vector<std::uint32_t>> labels) {
  SocialGraph g;
  g.adjacency_.resize(node_count);
  for (auto& e : edges) {
    if (e.first == e.second) {
      throw ParameterError("social graph: self-loop on node " + std::to_string(e.first));
    }
    if (e.first >= node_count || e.second >= node_count) {
      throw ParameterError("social graph: edge endpoint out of range");
    }
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw ParameterError("social graph: duplicate edge");
  }
  for (const auto& [a, b] : edges) {
    g.adjacency_[a].push_back(b);
    g.adjacency_[b].push_back(a);
  }
  for (auto& adj : g.adjacency_) std::sort(adj.begin(), adj.end());
  g.edges_ = std::move(edges);
  if (labels) {
    if (labels->size() != node_count) {
      throw ParameterError("social graph: community labels must cover every node");
    }
    g.labels_ = std::move(labels);
  }
  return g;
}

bool SocialGraph::has_edge(NodeId a, NodeId b) const {
  const auto& adj = adjacency_.at(a);
  return std::binary_search(adj.begin(), adj.end(), b);
}

std::vector<std::uint32_t> SocialGraph::components() const {
  constexpr auto kUnset = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> comp(node_count(), kUnset);
  std::uint32_t next = 0;
  std::vector<NodeId> stack;
  for (NodeId s = 0; s < node_count(); ++s) {
    if (comp[s] != kUnset) continue;
    comp[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const NodeId v = stack.back();
      stack.pop_back();
      for (NodeId w : adjacency_[v]) {
        if (comp[w] == kUnset) {
          comp[w] = next;
          stack.push_back(w);
        }
      }
    }
    ++next;
  }
  return comp;
}

SocialGraph generate_barabasi_albert(std::size_t n, std::size_t m, RandomSource& rng) {
  if (m < 1 || m >= n) throw ParameterError("barabasi_albert: need 1 <= m < n");
  std::vector<Edge> edges;
  // Every edge endpoint appears once here, so a uniform pick is degree-proportional.
  std::vector<NodeId> endpoints;
  for (NodeId a = 0; a <= m; ++a) {
    for (NodeId b = a + 1; b <= m; ++b) {
      edges.emplace_back(a, b);
      endpoints.push_back(a);
      endpoints.push_back(b);
    }
  }
  std::vector<NodeId> targets;
  for (NodeId v = static_cast<NodeId>(m + 1); v < n; ++v) {
    targets.clear();
    while (targets.size() < m) {
      const NodeId t = endpoints[rng.below(endpoints.size())];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (NodeId t : targets) {
      edges.emplace_back(t, v);
      endpoints.push_back(t);
      endpoints.push_back(v);
    }
  }
  return SocialGraph::from_edges(n, std::move(edges));
}

namespace {

void check_probabilities(double p_in, double p_out, const char* who) {
  if (!(p_in >= 0.0 && p_in <= 1.0 && p_out >= 0.0 && p_out <= 1.0)) {
    throw ParameterError(std::string(who) + ": probabilities must lie in [0, 1]");
  }
  if (p_out > p_in) throw ParameterError(std::string(who) + ": need p_out <= p_in");
}

}  // namespace

SocialGraph generate_random_partition(std::span<const std::size_t> cluster_sizes, double p_in,
                                      double p_out, RandomSource& rng) {
  if (cluster_sizes.empty()) throw ParameterError("random_partition: no clusters");
  check_probabilities(p_in, p_out, "random_partition");
  std::vector<std::uint32_t> labels;
  for (std::size_t c = 0; c < cluster_sizes.size(); ++c) {
    if (cluster_sizes[c] == 0) throw ParameterError("random_partition: empty cluster");
    labels.insert(labels.end(), cluster_sizes[c], static_cast<std::uint32_t>(c));
  }
  const std::size_t n = labels.size();
  std::vector<Edge> edges;
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = a + 1; b < n; ++b) {
      const double p = labels[a] == labels[b] ? p_in : p_out;
      // Draw even for p in {0, 1} so the stream does not depend on the values.
      if (rng.uniform01() < p) edges.emplace_back(a, b);
    }
  }
  return SocialGraph::from_edges(n, std::move(edges), std::move(labels));
}

SocialGraph generate_gaussian_random_partition(std::size_t n, double mean_cluster_size,
                                               double shape_parameter, double p_in,
                                               double p_out, RandomSource& rng) {
  if (n == 0) throw ParameterError("gaussian_random_partition: n must be positive");
  if (!(mean_cluster_size >= 1.0)) {
    throw ParameterError("gaussian_random_partition: mean cluster size must be >= 1");
  }
  if (!(shape_parameter > 0.0)) {
    throw ParameterError("gaussian_random_partition: shape parameter must be > 0");
  }
  if (!(p_out < p_in)) throw ParameterError("gaussian_random_partition: need p_out < p_in");
  check_probabilities(p_in, p_out, "gaussian_random_partition");
  const double sigma = mean_cluster_size / shape_parameter;
  std::vector<std::size_t> sizes;
  std::size_t total = 0;
  while (total < n) {
    const auto drawn = std::llround(mean_cluster_size + sigma * rng.standard_normal());
    if (drawn < 1) continue;
    const std::size_t size = std::min<std::size_t>(static_cast<std::size_t>(drawn), n - total);
    sizes.push_back(size);
    total += size;
  }
  return generate_random_partition(sizes, p_in, p_out, rng);
}

SocialGraph generate_caveman(std::size_t num_caves, std::size_t cave_size,
                             double rewire_probability, RandomSource& rng) {
  if (num_caves < 1) throw ParameterError("caveman: need at least one cave");
  if (cave_size < 2) throw ParameterError("caveman: cave size must be >= 2");
  if (!(rewire_probability >= 0.0 && rewire_probability <= 1.0)) {
    throw ParameterError("caveman: rewire probability must lie in [0, 1]");
  }
  const std::size_t n = num_caves * cave_size;
  std::vector<std::uint32_t> labels(n);
  std::set<Edge> edges;
  for (std::size_t c = 0; c < num_caves; ++c) {
    const auto base = static_cast<NodeId>(c * cave_size);
    for (NodeId i = 0; i < cave_size; ++i) {
      labels[base + i] = static_cast<std::uint32_t>(c);
      for (NodeId j = i + 1; j < cave_size; ++j) edges.emplace(base + i, base + j);
    }
  }
  if (rewire_probability > 0.0) {
    const std::vector<Edge> original(edges.begin(), edges.end());
    for (const auto& e : original) {
      if (rng.uniform01() >= rewire_probability) continue;
      const auto w = static_cast<NodeId>(rng.below(n));
      const Edge moved{std::min(e.first, w), std::max(e.first, w)};
      if (w == e.first || edges.contains(moved)) continue;
      edges.erase(e);
      edges.insert(moved);
    }
  }
  return SocialGraph::from_edges(n, std::vector<Edge>(edges.begin(), edges.end()),
                                 std::move(labels));
}

SocialGraph generate_caveman(std::size_t num_caves, std::size_t cave_size) {
  RandomSource unused(0);
  return generate_caveman(num_caves, cave_size, 0.0, unused);
}

LoadedGraph load_social_graph(const std::filesystem::path& path,
                              const std::optional<std::filesystem::path>& communities) {
  io::LineReader reader(path);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> raw;
  std::set<std::uint64_t> ids;
  LoadedGraph out;
  while (auto line = reader.next()) {
    const auto trimmed = io::trim(*line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto fields = io::split_ws(trimmed);
    if (fields.size() < 2) {
      throw ParseError(reader.source(), reader.line_number(), "expected two node ids");
    }
    const auto a = io::parse_uint(fields[0]);
    const auto b = io::parse_uint(fields[1]);
    if (!a || !b) {
      throw ParseError(reader.source(), reader.line_number(), "node ids must be non-negative integers");
    }
    if (*a == *b) {
      spdlog::warn("{}:{}: dropping self-loop on {}", reader.source(), reader.line_number(), *a);
      ++out.dropped_self_loops;
      ids.insert(*a);
      continue;
    }
    ids.insert(*a);
    ids.insert(*b);
    raw.emplace_back(std::min(*a, *b), std::max(*a, *b));
  }
  out.original_ids.assign(ids.begin(), ids.end());
  std::unordered_map<std::uint64_t, NodeId> dense;
  for (std::size_t i = 0; i < out.original_ids.size(); ++i) {
    dense.emplace(out.original_ids[i], static_cast<NodeId>(i));
  }
  std::set<Edge> unique;
  for (const auto& [a, b] : raw) {
    if (!unique.emplace(dense.at(a), dense.at(b)).second) {
      ++out.dropped_duplicates;
    }
  }
  if (out.dropped_duplicates > 0) {
    spdlog::warn("{}: dropped {} duplicate edge(s)", reader.source(), out.dropped_duplicates);
  }

  std::optional<std::vector<std::uint32_t>> labels;
  if (communities) {
    io::LineReader creader(*communities);
    constexpr auto kUnset = static_cast<std::uint32_t>(-1);
    std::vector<std::uint32_t> lab(out.original_ids.size(), kUnset);
    while (auto line = creader.next()) {
      const auto trimmed = io::trim(*line);
      if (trimmed.empty() || trimmed.front() == '#') continue;
      const auto fields = io::split_ws(trimmed);
      const auto node = fields.size() >= 2 ? io::parse_uint(fields[0]) : std::nullopt;
      const auto comm = fields.size() >= 2 ? io::parse_uint(fields[1]) : std::nullopt;
      if (!node || !comm) {
        throw ParseError(creader.source(), creader.line_number(), "expected `node_id community_id`");
      }
      const auto it = dense.find(*node);
      if (it == dense.end()) {
        spdlog::warn("{}:{}: node {} is not in the graph", creader.source(),
                     creader.line_number(), *node);
        continue;
      }
      lab[it->second] = static_cast<std::uint32_t>(*comm);
    }
    for (std::size_t i = 0; i < lab.size(); ++i) {
      if (lab[i] == kUnset) {
        throw ParameterError("community file lacks a label for node " +
                             std::to_string(out.original_ids[i]));
      }
    }
    labels = std::move(lab);
  }
  out.graph = SocialGraph::from_edges(out.original_ids.size(),
                                      std::vector<Edge>(unique.begin(), unique.end()),
                                      std::move(labels));
  return out;
}

void save_social_graph(const SocialGraph& graph, const std::filesystem::path& path) {
  io::TextWriter w(path);
  w.write("# " + std::to_string(graph.node_count()) + " nodes, " +
          std::to_string(graph.edge_count()) + " edges\n");
  for (const auto& [a, b] : graph.edges()) {
    w.write(std::to_string(a) + " " + std::to_string(b) + "\n");
  }
  w.close();
}

void save_communities(const SocialGraph& graph, const std::filesystem::path& path) {
  if (!graph.has_labels()) throw ContractError("save_communities: graph has no labels");
  io::TextWriter w(path);
  const auto& labels = *graph.labels();
  for (std::size_t v = 0; v < labels.size(); ++v) {
    w.write(std::to_string(v) + " " + std::to_string(labels[v]) + "\n");
  }
  w.close();
}

SnowballSample snowball_sample(const SocialGraph& graph, NodeId seed_node,
                               std::size_t target_size, RandomSource& rng) {
  if (seed_node >= graph.node_count()) throw ContractError("snowball_sample: invalid seed node");
  if (target_size < 1 || target_size > graph.node_count()) {
    throw ContractError("snowball_sample: target size must lie in [1, node_count]");
  }
  std::vector<char> chosen(graph.node_count(), 0);
  std::vector<NodeId> members{seed_node};
  chosen[seed_node] = 1;
  // Members that may still have unvisited neighbors.
  std::vector<NodeId> frontier{seed_node};
  std::vector<NodeId> open;
  while (members.size() < target_size && !frontier.empty()) {
    const std::size_t fi = rng.below(frontier.size());
    const NodeId from = frontier[fi];
    open.clear();
    for (NodeId w : graph.neighbors(from)) {
      if (!chosen[w]) open.push_back(w);
    }
    if (open.empty()) {
      frontier[fi] = frontier.back();
      frontier.pop_back();
      continue;
    }
    const NodeId next = open[rng.below(open.size())];
    chosen[next] = 1;
    members.push_back(next);
    frontier.push_back(next);
  }
  SnowballSample out;
  out.truncated = members.size() < target_size;
  std::sort(members.begin(), members.end());
  out.members = std::move(members);
  return out;
}

std::size_t known_count(const SocialGraph& graph, NodeId user, std::span<const NodeId> members) {
  if (!std::binary_search(members.begin(), members.end(), user)) {
    throw ContractError("known_count: user is not a member");
  }
  std::size_t count = 0;
  for (NodeId m : members) {
    if (m != user && graph.has_edge(user, m)) ++count;
  }
  return count;
}

}  // namespace grm
