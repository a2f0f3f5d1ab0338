#include "grm/analysis.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>
#include <unordered_map>

#include "grm/io.hpp"

namespace grm {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

std::vector<NodeId> sorted_union(std::span<const NodeId> a, std::span<const NodeId> b) {
  std::vector<NodeId> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::size_t intersection_size(std::span<const NodeId> a, std::span<const NodeId> b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

}  // namespace

std::vector<double> intercontact_samples(const ContactTrace& trace) {
  std::vector<const ContactEvent*> ev;
  ev.reserve(trace.events.size());
  for (const auto& e : trace.events) ev.push_back(&e);
  std::stable_sort(ev.begin(), ev.end(), [](const ContactEvent* x, const ContactEvent* y) {
    return std::tie(x->a, x->b, x->start) < std::tie(y->a, y->b, y->start);
  });
  std::vector<double> out;
  for (std::size_t i = 1; i < ev.size(); ++i) {
    if (ev[i]->a == ev[i - 1]->a && ev[i]->b == ev[i - 1]->b) {
      out.push_back(ev[i]->start - ev[i - 1]->end);
    }
  }
  return out;
}

std::vector<double> contact_duration_samples(const ContactTrace& trace) {
  std::vector<double> out;
  out.reserve(trace.events.size());
  for (const auto& e : trace.events) out.push_back(e.duration());
  return out;
}

Ccdf compute_ccdf(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  Ccdf c;
  const auto n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size();) {
    std::size_t j = i;
    while (j < samples.size() && samples[j] == samples[i]) ++j;
    c.values.push_back(samples[i]);
    c.ccdf.push_back(static_cast<double>(samples.size() - j) / n);
    i = j;
  }
  return c;
}

void write_ccdf(const Ccdf& ccdf, const std::filesystem::path& path) {
  io::TextWriter w(path);
  std::string buf = "value,ccdf\n";
  for (std::size_t i = 0; i < ccdf.values.size(); ++i) {
    buf += io::format_exact(ccdf.values[i]) + "," + io::format_exact(ccdf.ccdf[i]) + "\n";
  }
  w.write(buf);
  w.close();
}

void DetectionParams::validate() const {
  if (!(window > 0.0)) throw ParameterError("detection: window must be positive");
  if (min_size < 2) throw ParameterError("detection: min_size must be >= 2");
  if (!(similarity_threshold > 0.0 && similarity_threshold <= 1.0)) {
    throw ParameterError("detection: similarity threshold must be in (0, 1]");
  }
}

double jaccard(std::span<const NodeId> a, std::span<const NodeId> b) {
  if (a.empty() && b.empty()) return 1.0;
  const auto inter = intersection_size(a, b);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

std::vector<DetectedGroup> detect_groups(const ContactTrace& trace, const DetectionParams& params) {
  params.validate();
  std::vector<DetectedGroup> groups;
  if (trace.events.empty()) return groups;
  const Seconds W = params.window;
  Seconds horizon = trace.horizon;
  for (const auto& e : trace.events) horizon = std::max(horizon, e.end);
  const auto windows = static_cast<std::size_t>(std::ceil(horizon / W));

  std::vector<std::vector<std::uint32_t>> by_window(windows);
  for (std::uint32_t i = 0; i < trace.events.size(); ++i) {
    const auto& e = trace.events[i];
    const auto lo = static_cast<std::size_t>(std::floor(e.start / W));
    const auto hi = std::min(windows, static_cast<std::size_t>(std::ceil(e.end / W)));
    for (std::size_t w = lo; w < hi; ++w) by_window[w].push_back(i);
  }

  std::size_t n = trace.node_count;
  for (const auto& e : trace.events) n = std::max<std::size_t>(n, e.b + 1);
  std::vector<std::vector<GroupId>> node_groups(n);
  std::vector<std::size_t> last_window;
  std::vector<std::uint32_t> local(n, 0);
  std::vector<std::size_t> stamp(n, SIZE_MAX);

  struct Component {
    std::vector<NodeId> members;
    Seconds start;
    Seconds end;
  };

  for (std::size_t w = 0; w < windows; ++w) {
    const auto& ids = by_window[w];
    if (ids.empty()) continue;
    const Seconds w0 = static_cast<double>(w) * W;
    const Seconds w1 = w0 + W;
    std::vector<NodeId> nodes;
    for (auto i : ids) {
      for (NodeId v : {trace.events[i].a, trace.events[i].b}) {
        if (stamp[v] != w) {
          stamp[v] = w;
          local[v] = static_cast<std::uint32_t>(nodes.size());
          nodes.push_back(v);
        }
      }
    }
    DisjointSets ds(nodes.size());
    for (auto i : ids) ds.unite(local[trace.events[i].a], local[trace.events[i].b]);
    std::map<std::size_t, Component> by_root;
    for (auto i : ids) {
      const auto& e = trace.events[i];
      auto [it, fresh] = by_root.try_emplace(ds.find(local[e.a]), Component{{}, w1, w0});
      it->second.start = std::min(it->second.start, std::max(e.start, w0));
      it->second.end = std::max(it->second.end, std::min(e.end, w1));
    }
    for (NodeId v : nodes) by_root[ds.find(local[v])].members.push_back(v);
    std::vector<Component> comps;
    for (auto& [root, c] : by_root) {
      if (c.members.size() < params.min_size) continue;
      std::sort(c.members.begin(), c.members.end());
      comps.push_back(std::move(c));
    }

    struct Candidate {
      double similarity;
      std::size_t overlap;
      GroupId group;
      std::size_t comp;
    };
    std::vector<Candidate> cands;
    for (std::size_t ci = 0; ci < comps.size(); ++ci) {
      std::vector<GroupId> seen;
      for (NodeId v : comps[ci].members) {
        seen.insert(seen.end(), node_groups[v].begin(), node_groups[v].end());
      }
      std::sort(seen.begin(), seen.end());
      seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
      for (GroupId g : seen) {
        const double j = jaccard(comps[ci].members, groups[g].members);
        if (j >= params.similarity_threshold) {
          cands.push_back({j, intersection_size(comps[ci].members, groups[g].members), g, ci});
        }
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
      if (x.similarity != y.similarity) return x.similarity > y.similarity;
      if (x.overlap != y.overlap) return x.overlap > y.overlap;
      if (x.group != y.group) return x.group < y.group;
      return x.comp < y.comp;
    });
    std::vector<GroupId> assigned(comps.size(), std::numeric_limits<GroupId>::max());
    std::vector<char> group_used(groups.size(), 0);
    for (const auto& c : cands) {
      if (group_used[c.group] || assigned[c.comp] != std::numeric_limits<GroupId>::max()) continue;
      group_used[c.group] = 1;
      assigned[c.comp] = c.group;
    }

    for (std::size_t ci = 0; ci < comps.size(); ++ci) {
      auto& comp = comps[ci];
      GroupId g = assigned[ci];
      if (g == std::numeric_limits<GroupId>::max()) {
        g = static_cast<GroupId>(groups.size());
        groups.push_back(DetectedGroup{g, {}, {}});
        last_window.push_back(SIZE_MAX);
      }
      auto& grp = groups[g];
      if (last_window[g] + 1 == w && !grp.occurrences.empty()) {
        auto& occ = grp.occurrences.back();
        occ.end = std::max(occ.end, comp.end);
        occ.attendees = sorted_union(occ.attendees, comp.members);
      } else {
        grp.occurrences.push_back(Occurrence{comp.start, comp.end, comp.members});
      }
      last_window[g] = w;
      auto merged = sorted_union(grp.members, comp.members);
      for (NodeId v : comp.members) {
        if (!std::binary_search(grp.members.begin(), grp.members.end(), v)) {
          node_groups[v].push_back(g);
        }
      }
      grp.members = std::move(merged);
    }
  }
  return groups;
}

double Histogram::mass_between(Seconds from, Seconds to) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < probability.size(); ++i) {
    const double center = (static_cast<double>(i) + 0.5) * bin;
    if (center >= from && center < to) sum += probability[i];
  }
  return sum;
}

std::vector<double> remeeting_gaps(const std::vector<DetectedGroup>& groups) {
  std::vector<double> gaps;
  for (const auto& g : groups) {
    for (std::size_t i = 1; i < g.occurrences.size(); ++i) {
      gaps.push_back(g.occurrences[i].start - g.occurrences[i - 1].start);
    }
  }
  return gaps;
}

Histogram remeeting_pdf(const std::vector<DetectedGroup>& groups, Seconds bin, Seconds horizon) {
  if (!(bin > 0.0)) throw ParameterError("remeeting_pdf: bin must be positive");
  if (!(horizon > 0.0)) throw ParameterError("remeeting_pdf: horizon must be positive");
  Histogram h;
  h.bin = bin;
  h.probability.assign(static_cast<std::size_t>(std::ceil(horizon / bin)), 0.0);
  for (double gap : remeeting_gaps(groups)) {
    if (gap < 0.0 || gap >= horizon) continue;
    const auto i = std::min(h.probability.size() - 1, static_cast<std::size_t>(gap / bin));
    h.probability[i] += 1.0;
    ++h.count;
  }
  if (h.count > 0) {
    for (double& p : h.probability) p /= static_cast<double>(h.count);
  }
  return h;
}

void write_histogram(const Histogram& histogram, const std::filesystem::path& path) {
  io::TextWriter w(path);
  std::string buf = "bin_start_hours,probability\n";
  for (std::size_t i = 0; i < histogram.probability.size(); ++i) {
    buf += io::format_exact(static_cast<double>(i) * histogram.bin / kHour) + "," +
           io::format_exact(histogram.probability[i]) + "\n";
  }
  w.write(buf);
  w.close();
}

SocialGraph aggregate_contact_graph(const ContactTrace& trace, Seconds min_total) {
  std::map<Edge, Seconds> total;
  std::size_t n = trace.node_count;
  for (const auto& e : trace.events) {
    n = std::max<std::size_t>(n, static_cast<std::size_t>(std::max(e.a, e.b)) + 1);
    if (e.a == e.b) continue;
    total[std::minmax(e.a, e.b)] += e.duration();
  }
  std::vector<Edge> edges;
  for (const auto& [edge, t] : total) {
    if (t > 0.0 && t >= min_total) edges.push_back(edge);
  }
  return SocialGraph::from_edges(n, std::move(edges));
}

namespace {

void bron_kerbosch(const SocialGraph& g, std::vector<NodeId>& r, std::vector<NodeId> p,
                   std::vector<NodeId> x, std::size_t min_size,
                   std::vector<std::vector<NodeId>>& out) {
  if (p.empty() && x.empty()) {
    if (r.size() >= min_size) {
      auto c = r;
      std::sort(c.begin(), c.end());
      out.push_back(std::move(c));
    }
    return;
  }
  if (r.size() + p.size() < min_size) return;
  NodeId pivot = 0;
  std::size_t best = 0;
  bool have = false;
  for (const auto* set : {&p, &x}) {
    for (NodeId u : *set) {
      const auto cnt = intersection_size(p, g.neighbors(u));
      if (!have || cnt > best) {
        pivot = u;
        best = cnt;
        have = true;
      }
    }
  }
  std::vector<NodeId> candidates;
  const auto pn = g.neighbors(pivot);
  std::set_difference(p.begin(), p.end(), pn.begin(), pn.end(), std::back_inserter(candidates));
  for (NodeId v : candidates) {
    const auto nv = g.neighbors(v);
    std::vector<NodeId> p2;
    std::vector<NodeId> x2;
    std::set_intersection(p.begin(), p.end(), nv.begin(), nv.end(), std::back_inserter(p2));
    std::set_intersection(x.begin(), x.end(), nv.begin(), nv.end(), std::back_inserter(x2));
    r.push_back(v);
    bron_kerbosch(g, r, std::move(p2), std::move(x2), min_size, out);
    r.pop_back();
    p.erase(std::lower_bound(p.begin(), p.end(), v));
    x.insert(std::lower_bound(x.begin(), x.end(), v), v);
  }
}

}  // namespace

std::vector<std::vector<NodeId>> maximal_cliques(const SocialGraph& graph, std::size_t min_size) {
  std::vector<std::vector<NodeId>> out;
  std::vector<NodeId> all;
  for (NodeId v = 0; v < graph.node_count(); ++v) {
    if (graph.degree(v) > 0) all.push_back(v);
  }
  std::vector<NodeId> r;
  bron_kerbosch(graph, r, std::move(all), {}, std::max<std::size_t>(min_size, 1), out);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Community> clique_percolation(const SocialGraph& graph, std::size_t k) {
  if (k < 3) throw ParameterError("clique_percolation: k must be >= 3");
  const auto cliques = maximal_cliques(graph, k);
  DisjointSets ds(cliques.size());
  std::vector<std::vector<std::uint32_t>> by_node(graph.node_count());
  for (std::uint32_t i = 0; i < cliques.size(); ++i) {
    for (NodeId v : cliques[i]) by_node[v].push_back(i);
  }
  for (std::uint32_t i = 0; i < cliques.size(); ++i) {
    std::vector<std::uint32_t> near;
    for (NodeId v : cliques[i]) {
      for (auto j : by_node[v]) {
        if (j > i) near.push_back(j);
      }
    }
    std::sort(near.begin(), near.end());
    near.erase(std::unique(near.begin(), near.end()), near.end());
    for (auto j : near) {
      if (ds.find(i) != ds.find(j) && intersection_size(cliques[i], cliques[j]) >= k - 1) {
        ds.unite(i, j);
      }
    }
  }
  std::map<std::size_t, std::vector<NodeId>> merged;
  for (std::uint32_t i = 0; i < cliques.size(); ++i) {
    auto& m = merged[ds.find(i)];
    m = sorted_union(m, cliques[i]);
  }
  std::vector<Community> out;
  for (auto& [root, members] : merged) out.push_back(std::move(members));
  std::sort(out.begin(), out.end(), [](const Community& a, const Community& b) {
    return a.size() != b.size() ? a.size() > b.size() : a < b;
  });
  return out;
}

std::vector<Community> clique_percolation(const ContactTrace& trace, std::size_t k,
                                          Seconds min_total) {
  return clique_percolation(aggregate_contact_graph(trace, min_total), k);
}

void write_communities(const std::vector<Community>& communities,
                       const std::filesystem::path& path) {
  io::TextWriter w(path);
  std::string buf = "community_id,node_id\n";
  for (std::size_t c = 0; c < communities.size(); ++c) {
    for (NodeId v : communities[c]) buf += std::to_string(c) + "," + std::to_string(v) + "\n";
  }
  w.write(buf);
  w.close();
}

std::vector<KDistribution::Entry> estimate_k_shares(const Histogram& histogram,
                                                    std::span<const Seconds> periods) {
  std::vector<Seconds> order(periods.begin(), periods.end());
  std::sort(order.begin(), order.end(), std::greater<>());
  std::vector<double> mass(order.size(), 0.0);
  for (std::size_t i = 0; i < histogram.probability.size(); ++i) {
    const double center = (static_cast<double>(i) + 0.5) * histogram.bin;
    for (std::size_t p = 0; p < order.size(); ++p) {
      const double tol = order[p] >= kWeek ? 12 * kHour : 3 * kHour;
      const double m = std::round(center / order[p]);
      if (m >= 1.0 && std::abs(center - m * order[p]) <= tol) {
        mass[p] += histogram.probability[i];
        break;
      }
    }
  }
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  std::vector<KDistribution::Entry> out;
  if (!(total > 0.0)) return out;
  for (std::size_t p = order.size(); p-- > 0;) out.push_back({order[p], mass[p] / total});
  return out;
}

namespace {

std::optional<TruncatedPowerLaw> try_fit(std::vector<double> samples, double x_min,
                                         const std::string& label,
                                         std::vector<std::string>& notes, bool integer = false) {
  std::erase_if(samples, [&](double x) { return !(x >= x_min); });
  if (samples.size() < kFitMinSamples) {
    notes.push_back(label + ": " + std::to_string(samples.size()) + " samples at or above x_min, need " +
                    std::to_string(kFitMinSamples));
    return std::nullopt;
  }
  try {
    const auto fit = integer ? fit_tpl_rounded(samples, x_min) : fit_tpl(samples, x_min);
    if (fit.degenerate) notes.push_back(label + ": fit hit the alpha upper bound");
    return fit.dist;
  } catch (const FitError& e) {
    notes.push_back(label + ": " + e.what());
    return std::nullopt;
  }
}

}  // namespace

ExtractedParameters extract_parameters(const ContactTrace& trace,
                                       const ExtractionOptions& options) {
  ExtractedParameters out;
  out.contact_count = trace.events.size();
  out.duration = try_fit(contact_duration_samples(trace), options.time_x_min, "duration", out.notes);
  out.intercontact =
      try_fit(intercontact_samples(trace), options.time_x_min, "intercontact", out.notes);

  const auto groups = detect_groups(trace, options.detection);
  out.detected_groups = groups.size();
  constexpr std::size_t kMinGroups = 50;
  if (groups.size() < kMinGroups) {
    out.notes.push_back("groups: " + std::to_string(groups.size()) + " detected, need " +
                        std::to_string(kMinGroups) + " for size, K and gap estimates");
    return out;
  }

  std::vector<double> sizes;
  for (const auto& g : groups) sizes.push_back(static_cast<double>(g.members.size()));
  out.size = try_fit(std::move(sizes), options.size_x_min, "size", out.notes, true);

  const auto hist = remeeting_pdf(groups, options.remeeting_bin, options.remeeting_horizon);
  auto shares = estimate_k_shares(hist, options.candidate_periods);
  if (shares.empty()) {
    out.notes.push_back("k: no re-meeting mass near any candidate period");
    return out;
  }
  double sum = 0.0;
  for (const auto& e : shares) sum += e.probability;
  shares.back().probability += 1.0 - sum;
  out.k_distribution = KDistribution(shares);
  const auto dominant = std::max_element(shares.begin(), shares.end(), [](const auto& a, const auto& b) {
                          return a.probability < b.probability;
                        })->period;

  std::vector<double> multipliers;
  for (double gap : remeeting_gaps(groups)) multipliers.push_back(gap / dominant);
  if (auto fit = try_fit(std::move(multipliers), 1.0, "gmt", out.notes)) {
    fit->beta *= dominant;
    out.gmt = fit;
  }
  return out;
}

}  // namespace grm
