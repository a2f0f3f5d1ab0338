#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <filesystem>
#include <fstream>
#include <set>

#include "grm/social.hpp"

using namespace grm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "grm_test_social";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

// Checks the graph invariants from scratch rather than trusting the class.
void check_invariants(const SocialGraph& g) {
  std::set<Edge> seen;
  for (auto [a, b] : g.edges()) {
    REQUIRE(a < b);
    REQUIRE(b < g.node_count());
    REQUIRE(seen.insert({a, b}).second);
  }
  std::size_t deg = 0;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    deg += g.degree(v);
    for (NodeId w : g.neighbors(v)) REQUIRE(g.has_edge(w, v));
  }
  REQUIRE(deg == 2 * g.edge_count());
  if (g.has_labels()) REQUIRE(g.labels()->size() == g.node_count());
}

bool induces_connected(const SocialGraph& g, const std::vector<NodeId>& s) {
  std::set<NodeId> in(s.begin(), s.end()), reached{s.front()};
  std::vector<NodeId> stack{s.front()};
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    for (NodeId w : g.neighbors(v)) {
      if (in.contains(w) && reached.insert(w).second) stack.push_back(w);
    }
  }
  return reached.size() == in.size();
}

}  // namespace

TEST_CASE("from_edges rejects invalid input") {
  CHECK_THROWS_AS(SocialGraph::from_edges(3, {{1, 1}}), ParameterError);
  CHECK_THROWS_AS(SocialGraph::from_edges(3, {{0, 3}}), ParameterError);
  CHECK_THROWS_AS(SocialGraph::from_edges(3, {{0, 1}, {1, 0}}), ParameterError);
  CHECK_THROWS_AS(SocialGraph::from_edges(3, {}, std::vector<std::uint32_t>{0, 1}), ParameterError);
}

TEST_CASE("barabasi_albert") {
  RandomSource rng(1);
  const auto k = generate_barabasi_albert(4, 3, rng);
  CHECK(k.edge_count() == 6);
  const auto g = generate_barabasi_albert(100, 2, rng);
  CHECK(g.edge_count() == 3 + 2 * (100 - 3));
  const auto big = generate_barabasi_albert(1000, 3, rng);
  std::vector<std::size_t> deg;
  for (NodeId v = 0; v < big.node_count(); ++v) deg.push_back(big.degree(v));
  std::sort(deg.begin(), deg.end());
  CHECK(deg.back() > 5 * deg[deg.size() / 2]);
  const auto big_comp = big.components();
  CHECK(*std::max_element(big_comp.begin(), big_comp.end()) == 0);
  CHECK_THROWS_AS(generate_barabasi_albert(3, 3, rng), ParameterError);
}

TEST_CASE("gaussian random partition") {
  RandomSource rng(2);
  const auto one = generate_gaussian_random_partition(10, 10, 1e9, 1.0, 0.0, rng);
  CHECK(one.edge_count() == 45);
  CHECK(std::set<std::uint32_t>(one.labels()->begin(), one.labels()->end()).size() == 1);

  double ratio_sum = 0;
  for (int s = 0; s < 20; ++s) {
    RandomSource r(100 + s);
    const auto g = generate_gaussian_random_partition(100, 20, 10, 0.5, 0.01, r);
    const auto& lab = *g.labels();
    std::map<std::uint32_t, std::size_t> size;
    for (auto l : lab) ++size[l];
    double intra = 0, expect = 0;
    for (NodeId v = 0; v < 100; ++v) {
      for (NodeId w : g.neighbors(v)) intra += lab[v] == lab[w];
      expect += 0.5 * (size[lab[v]] - 1);
    }
    ratio_sum += intra / expect;
  }
  CHECK(ratio_sum / 20 == doctest::Approx(1.0).epsilon(0.15));

  RandomSource r(7);
  const auto g = generate_gaussian_random_partition(100, 20, 10, 0.5, 0.0, r);
  const auto comp = g.components();
  const auto& lab = *g.labels();
  // p_in 0.5 on ~20 nodes is connected with overwhelming probability
  CHECK(std::set<std::uint32_t>(comp.begin(), comp.end()).size() ==
        std::set<std::uint32_t>(lab.begin(), lab.end()).size());
  CHECK_THROWS_AS(generate_gaussian_random_partition(10, 5, 10, 0.1, 0.2, r), ParameterError);
}

TEST_CASE("caveman") {
  const auto k5 = generate_caveman(1, 5);
  CHECK(k5.edge_count() == 10);
  const auto g = generate_caveman(5, 4);
  CHECK(g.node_count() == 20);
  CHECK(g.edge_count() == 30);
  const auto comp = g.components();
  CHECK(std::set<std::uint32_t>(comp.begin(), comp.end()).size() == 5);
  const auto two = generate_caveman(2, 2);
  CHECK(two.edges() == std::vector<Edge>{{0, 1}, {2, 3}});
  CHECK_THROWS_AS(generate_caveman(0, 3), ParameterError);
  CHECK_THROWS_AS(generate_caveman(2, 1), ParameterError);
  RandomSource rng(3);
  const auto rewired = generate_caveman(6, 5, 0.3, rng);
  check_invariants(rewired);
  CHECK(rewired.edge_count() == 60);
}

TEST_CASE("random partition") {
  RandomSource rng(4);
  const std::vector<std::size_t> s33{3, 3}, s55{5, 5}, s1010{10, 10};
  CHECK(generate_random_partition(s33, 1, 1, rng).edge_count() == 15);
  const auto two = generate_random_partition(s55, 1, 0, rng);
  CHECK(two.edge_count() == 20);
  const auto comp = two.components();
  CHECK(comp == std::vector<std::uint32_t>{0, 0, 0, 0, 0, 1, 1, 1, 1, 1});
  double inter = 0;
  for (int s = 0; s < 50; ++s) {
    RandomSource r(200 + s);
    const auto g = generate_random_partition(s1010, 0.3, 0.05, r);
    for (auto [a, b] : g.edges()) inter += (*g.labels())[a] != (*g.labels())[b];
  }
  // mean of 50 binomial(100, 0.05) draws; 3 sigma of the mean
  CHECK(std::abs(inter / 50 - 5.0) < 3 * std::sqrt(100 * 0.05 * 0.95 / 50));
  CHECK_THROWS_AS(generate_random_partition(std::vector<std::size_t>{}, 1, 0, rng), ParameterError);
}

TEST_CASE("generators satisfy graph invariants (property)") {
  RandomSource gen(5);
  for (int t = 0; t < 40; ++t) {
    RandomSource rng(gen.next_u64());
    const std::size_t n = 5 + gen.below(120);
    const double p_in = 0.05 + 0.9 * gen.uniform01();
    const double p_out = p_in * gen.uniform01() * 0.5;
    check_invariants(generate_barabasi_albert(n, 1 + gen.below(4), rng));
    check_invariants(generate_gaussian_random_partition(n, 1 + 30 * gen.uniform01(),
                                                        1 + 10 * gen.uniform01(), p_in, p_out, rng));
    check_invariants(generate_caveman(1 + gen.below(8), 2 + gen.below(6), gen.uniform01(), rng));
    std::vector<std::size_t> sizes(1 + gen.below(6));
    for (auto& s : sizes) s = 1 + gen.below(12);
    const auto rp = generate_random_partition(sizes, 1.0, 0.0, rng);
    check_invariants(rp);
    // p_in 1, p_out 0: components are exactly the clusters
    const auto comp = rp.components();
    for (NodeId v = 1; v < rp.node_count(); ++v) {
      REQUIRE(((*rp.labels())[v] == (*rp.labels())[v - 1]) == (comp[v] == comp[v - 1]));
    }
  }
}

TEST_CASE("edge list loading") {
  const auto p = scratch("simple.edges");
  write_text(p, "0 1\n1 2\n");
  auto g = load_social_graph(p);
  CHECK(g.graph.node_count() == 3);
  CHECK(g.graph.edge_count() == 2);

  write_text(p, "# comment\n0 1\n0 1\n3 3\n");
  g = load_social_graph(p);
  CHECK(g.graph.edge_count() == 1);
  CHECK(g.dropped_duplicates == 1);
  CHECK(g.dropped_self_loops == 1);

  write_text(p, "10 30 0.7\n30 20 1.5\n");
  g = load_social_graph(p);
  CHECK(g.original_ids == std::vector<std::uint64_t>{10, 20, 30});
  CHECK(g.graph.has_edge(0, 2));
  CHECK(g.graph.has_edge(1, 2));

  write_text(p, "0 1\n1 x\n");
  try {
    load_social_graph(p);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }

  const auto c = scratch("simple.communities");
  write_text(p, "5 6\n6 7\n");
  write_text(c, "5 0\n6 0\n7 1\n");
  g = load_social_graph(p, c);
  CHECK(*g.graph.labels() == std::vector<std::uint32_t>{0, 0, 1});
}

TEST_CASE("save/load round trip") {
  RandomSource rng(6);
  const auto ba = generate_barabasi_albert(100, 2, rng);
  const auto p = scratch("ba.edges");
  save_social_graph(ba, p);
  CHECK(load_social_graph(p).graph.edges() == ba.edges());

  const auto grp = generate_gaussian_random_partition(60, 10, 5, 0.6, 0.02, rng);
  const auto c = scratch("grp.communities");
  save_social_graph(grp, p);
  save_communities(grp, c);
  const auto back = load_social_graph(p, c);
  if (back.graph.node_count() == grp.node_count()) {
    CHECK(back.graph.labels() == grp.labels());
  }
}

TEST_CASE("snowball sampling") {
  RandomSource rng(8);
  const auto path = SocialGraph::from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  CHECK(snowball_sample(path, 3, 1, rng).members == std::vector<NodeId>{3});
  CHECK(snowball_sample(path, 0, 5, rng).members.size() == 5);

  int has1 = 0, has3 = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto s = snowball_sample(path, 2, 3, rng);
    REQUIRE(s.members.size() == 3);
    REQUIRE(induces_connected(path, s.members));
    has1 += std::binary_search(s.members.begin(), s.members.end(), 1u);
    has3 += std::binary_search(s.members.begin(), s.members.end(), 3u);
  }
  CHECK(std::abs(has1 - has3) < 50);

  const auto split = SocialGraph::from_edges(4, {{0, 1}, {2, 3}});
  const auto t = snowball_sample(split, 0, 3, rng);
  CHECK(t.truncated);
  CHECK(t.members == std::vector<NodeId>{0, 1});
  CHECK_THROWS_AS(snowball_sample(split, 9, 1, rng), ContractError);
}

TEST_CASE("snowball output is connected and contains the seed (property)") {
  RandomSource gen(9);
  for (int t = 0; t < 100; ++t) {
    RandomSource rng(gen.next_u64());
    const auto g = generate_gaussian_random_partition(80, 15, 5, 0.3, 0.01, rng);
    const auto seed = static_cast<NodeId>(gen.below(80));
    const auto target = 1 + gen.below(30);
    const auto s = snowball_sample(g, seed, target, rng);
    const auto comp = g.components();
    const auto comp_size = static_cast<std::size_t>(std::count(comp.begin(), comp.end(), comp[seed]));
    REQUIRE(std::binary_search(s.members.begin(), s.members.end(), seed));
    REQUIRE(s.members.size() == std::min(target, comp_size));
    REQUIRE(s.truncated == (comp_size < target));
    REQUIRE(induces_connected(g, s.members));
    if (s.members.size() >= 2) {
      for (NodeId v : s.members) REQUIRE(known_count(g, v, s.members) >= 1);
    }
  }
}

TEST_CASE("known_count") {
  const auto k5 = generate_caveman(1, 5);
  const std::vector<NodeId> all{0, 1, 2, 3, 4};
  CHECK(known_count(k5, 2, all) == 4);
  CHECK(known_count(k5, 2, std::vector<NodeId>{2}) == 0);
  CHECK_THROWS_AS(known_count(k5, 2, std::vector<NodeId>{0, 1}), ContractError);
}
