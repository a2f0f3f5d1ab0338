#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>

#include "grm/groups.hpp"

using namespace grm;

namespace {

GroupParams small_params(std::size_t groups) {
  GroupParams p;
  p.num_groups = groups;
  return p;
}

Group fixed_group(Seconds k, double mu, Seconds from, Seconds to) {
  Group g;
  g.members = {0, 1};
  g.attendance = {1.0, 1.0};
  g.regularity = k;
  g.gap_multiplier = mu;
  g.window_start = from;
  g.window_end = to;
  return g;
}

}  // namespace

TEST_CASE("K distribution") {
  CHECK_THROWS_AS(KDistribution(std::vector<KDistribution::Entry>{}), ParameterError);
  CHECK_THROWS_AS(KDistribution({{kDay, 0.5}}), ParameterError);
  CHECK_THROWS_AS(KDistribution({{-1.0, 1.0}}), ParameterError);
  CHECK_THROWS_AS(KDistribution({{kDay, 1.5}, {kWeek, -0.5}}), ParameterError);

  const auto k = KDistribution::standard();
  RandomSource rng(1);
  std::map<Seconds, int> counts;
  for (int i = 0; i < 10000; ++i) ++counts[k.sample(rng)];
  CHECK(std::abs(counts[kDay] / 1e4 - 0.70) < 0.02);
  CHECK(std::abs(counts[kWeek] / 1e4 - 0.15) < 0.02);
  CHECK(std::abs(counts[6 * kHour] / 1e4 - 0.15) < 0.02);
}

TEST_CASE("build_group on a clique") {
  const auto k10 = generate_caveman(1, 10);
  auto p = small_params(1);
  RandomSource rng(2);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    const auto g = build_group(0, k10, p, rng);
    REQUIRE(g.attendance.size() == g.size());
    const double expected = static_cast<double>(g.size() - 1) / static_cast<double>(g.size());
    for (double a : g.attendance) REQUIRE(a == doctest::Approx(expected));
    if (g.size() == 5) ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("group invariants (property)") {
  RandomSource gen(3);
  for (int t = 0; t < 30; ++t) {
    RandomSource rng(gen.next_u64());
    const auto graph = generate_gaussian_random_partition(60 + gen.below(60), 15, 5, 0.5, 0.02, rng);
    auto p = small_params(20);
    p.horizon = (10 + gen.below(50)) * kDay;
    p.group_lifetime = (1 + gen.below(30)) * kDay;
    for (GroupId id = 0; id < 20; ++id) {
      const auto g = build_group(id, graph, p, rng);
      REQUIRE(g.size() >= 2);
      REQUIRE(std::is_sorted(g.members.begin(), g.members.end()));
      REQUIRE(g.gap_multiplier >= 1.0);
      REQUIRE(g.window_start >= 0.0);
      REQUIRE(g.window_end <= p.horizon + 1e-6);
      const double n = static_cast<double>(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) {
        REQUIRE(g.attendance[i] >= 1.0 / n - 1e-12);
        REQUIRE(g.attendance[i] <= (n - 1) / n + 1e-12);
        REQUIRE(g.attendance[i] ==
                doctest::Approx(static_cast<double>(known_count(graph, g.members[i], g.members)) / n));
      }
      const auto times = generate_meeting_times(g, p.sigma2, p.min_gap, rng);
      REQUIRE(std::adjacent_find(times.begin(), times.end(), std::greater_equal<>()) == times.end());
      for (Seconds x : times) {
        REQUIRE(x >= g.window_start);
        REQUIRE(x <= g.window_end);
      }
    }
  }
}

TEST_CASE("sizes from the GRM-1000 law") {
  // Rounded-size mean of TPL(2.42, 50, 2) by mpmath: 4.70804.
  auto p = small_params(5000);
  p.size = {2.42, 50.0, 2.0};
  RandomSource rng(4);
  double sum = 0;
  for (int i = 0; i < 5000; ++i) sum += static_cast<double>(draw_group_size(p.size, rng));
  CHECK(sum / 5000 == doctest::Approx(4.70804).epsilon(0.05));
}

TEST_CASE("meeting time recursion") {
  RandomSource rng(5);
  const auto exact = recurse_meeting_times(0.0, 10 * kDay, kDay, 0.0, 1.0, rng);
  REQUIRE(exact.size() == 11);
  for (std::size_t i = 0; i < exact.size(); ++i) CHECK(exact[i] == static_cast<double>(i) * kDay);

  double gap_sum = 0;
  std::size_t gaps = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto t = generate_meeting_times(fixed_group(kDay, 1.0, 0.0, 10 * kDay), kHour * kHour, 1.0, rng);
    for (std::size_t j = 1; j < t.size(); ++j) {
      gap_sum += t[j] - t[j - 1];
      ++gaps;
    }
  }
  CHECK(std::abs(gap_sum / gaps - kDay) < 0.5 * kHour);

  const auto one = generate_meeting_times(fixed_group(kDay, 3.0, 0.0, 2 * kDay), 0.0, 1.0, rng);
  CHECK(one.size() == 1);

  // large variance: increments below min_gap are redrawn, times stay increasing
  const auto noisy = recurse_meeting_times(0.0, 30 * kDay, kHour, 100 * kDay * kDay, 60.0, rng);
  for (std::size_t j = 1; j < noisy.size(); ++j) CHECK(noisy[j] - noisy[j - 1] >= 60.0);
}

TEST_CASE("meeting durations") {
  auto p = small_params(1);
  RandomSource rng(6);
  std::vector<double> d(100000);
  for (auto& x : d) {
    x = draw_meeting_duration(p, rng);
    REQUIRE(x >= p.duration.x_min);
  }
  CHECK(fit_tpl(d, p.duration.x_min).dist.alpha == doctest::Approx(2.0).epsilon(0.05));

  p.duration = {2.0, 60.0, 60.0};
  for (auto& x : d) x = draw_meeting_duration(p, rng);
  std::nth_element(d.begin(), d.begin() + 99000, d.end());
  // mpmath: the 99th percentile of x^-2 e^-x on [1, inf) is 3.574
  CHECK(d[99000] < 6 * 60.0);
  CHECK(d[99000] / 60.0 == doctest::Approx(3.574).epsilon(0.03));
}

TEST_CASE("attendance realization") {
  RandomSource rng(7);
  Group full = fixed_group(kDay, 1.0, 0.0, kDay);
  full.members = {0, 1, 2, 3, 4};
  full.attendance.assign(5, 1.0);
  CHECK(realize_attendance(full, rng) == full.members);

  Group clique = full;
  clique.attendance.assign(5, 0.8);
  Group sparse = full;
  sparse.members.resize(10);
  std::iota(sparse.members.begin(), sparse.members.end(), 0u);
  sparse.attendance.assign(10, 0.1);
  double a = 0, b = 0;
  for (int i = 0; i < 10000; ++i) {
    a += static_cast<double>(realize_attendance(clique, rng).size());
    b += static_cast<double>(realize_attendance(sparse, rng).size());
  }
  CHECK(std::abs(a / 1e4 - 4.0) < 0.05);
  CHECK(std::abs(b / 1e4 - 1.0) < 0.05);
}

TEST_CASE("attendance is independent across members") {
  RandomSource rng(8);
  Group g = fixed_group(kDay, 1.0, 0.0, kDay);
  g.attendance = {0.3, 0.6};
  std::array<std::array<double, 2>, 2> obs{};
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto a = realize_attendance(g, rng);
    const bool x = std::find(a.begin(), a.end(), 0u) != a.end();
    const bool y = std::find(a.begin(), a.end(), 1u) != a.end();
    obs[x][y] += 1;
  }
  double chi2 = 0;
  const double px[2] = {0.7, 0.3}, py[2] = {0.4, 0.6};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double e = n * px[i] * py[j];
      chi2 += (obs[i][j] - e) * (obs[i][j] - e) / e;
    }
  }
  CHECK(chi2 < 16.27);  // chi-square, 3 dof, p = 0.001
}

TEST_CASE("build_schedule") {
  const auto graph = generate_caveman(10, 10);
  RandomSource rng(9);
  CHECK(build_schedule(graph, small_params(0), rng).meetings.empty());

  auto p = small_params(1);
  p.sigma2 = 0.0;
  const auto one = build_schedule(graph, p, rng);
  const auto& g = one.groups.at(0);
  REQUIRE(one.meetings.size() >= 1);
  for (std::size_t i = 1; i < one.meetings.size(); ++i) {
    CHECK(one.meetings[i].start - one.meetings[i - 1].start ==
          doctest::Approx(g.regularity * g.gap_multiplier));
  }

  p = small_params(500);
  RandomSource r100(10);
  const auto grp = generate_gaussian_random_partition(100, 20, 10, 0.5, 0.01, r100);
  const auto s = build_schedule(grp, p, r100);
  CHECK(s.groups.size() == 500);
  CHECK_FALSE(s.meetings.empty());
  std::vector<Seconds> busy(grp.node_count(), -1.0);
  for (std::size_t i = 0; i < s.meetings.size(); ++i) {
    const auto& m = s.meetings[i];
    REQUIRE(m.start >= 0.0);
    REQUIRE(m.start <= 60 * kDay);
    REQUIRE(m.duration > 0.0);
    const auto& grp_of = s.groups[m.group_id];
    REQUIRE(m.start >= grp_of.window_start);
    REQUIRE(m.start <= grp_of.window_end);
    REQUIRE(std::includes(grp_of.members.begin(), grp_of.members.end(), m.attendees.begin(),
                          m.attendees.end()));
    if (i > 0) REQUIRE(s.meetings[i - 1].start <= m.start);
    for (NodeId v : m.attendees) {
      REQUIRE(busy[v] <= m.start);  // no double booking survives
      busy[v] = m.end();
    }
  }
}

TEST_CASE("gaps of daily groups cluster near multiples of 24 h") {
  auto p = small_params(300);
  p.k_distribution = KDistribution({{kDay, 1.0}});
  const auto graph = generate_caveman(30, 10);
  RandomSource rng(11);
  const auto s = build_schedule(graph, p, rng);
  std::map<GroupId, std::vector<Seconds>> starts;
  for (const auto& m : s.meetings) starts[m.group_id].push_back(m.start);
  std::size_t near = 0, total = 0;
  for (const auto& [id, t] : starts) {
    for (std::size_t i = 1; i < t.size(); ++i) {
      const double gap = t[i] - t[i - 1];
      const double m = std::max(1.0, std::round(gap / kDay));
      near += std::abs(gap - m * kDay) <= 3 * kHour;
      ++total;
    }
  }
  REQUIRE(total > 0);
  CHECK(static_cast<double>(near) / static_cast<double>(total) >= 0.6);
}

TEST_CASE("more groups than nodes in the GRM-1000 setting") {
  auto p = small_params(5000);
  p.size = {2.42, 50.0, 2.0};
  RandomSource rng(12);
  const auto graph = generate_gaussian_random_partition(1000, 20, 10, 0.5, 0.01, rng);
  const auto s = build_schedule(graph, p, rng);
  CHECK(s.groups.size() > graph.node_count());
}
