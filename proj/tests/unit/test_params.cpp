#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "grm/params.hpp"

using namespace grm;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({"node_count": 10, "num_groups": 5})";

bool mentions(const ConfigError& e, const std::string& needle) {
  return std::any_of(e.problems().begin(), e.problems().end(),
                     [&](const std::string& p) { return p.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("durations") {
  CHECK(parse_duration("90") == 90);
  CHECK(parse_duration("90s") == 90);
  CHECK(parse_duration("2m") == 120);
  CHECK(parse_duration("1.5h") == 5400);
  CHECK(parse_duration("30d") == 30 * kDay);
  CHECK(parse_duration(" 1w ") == kWeek);
  CHECK_THROWS_AS(parse_duration(""), ParameterError);
  CHECK_THROWS_AS(parse_duration("h"), ParameterError);
  CHECK_THROWS_AS(parse_duration("3x"), ParameterError);
  CHECK_THROWS_AS(parse_duration("1e999d"), ParameterError);
}

TEST_CASE("minimal config keeps defaults") {
  const auto p = parse_parameters(kMinimal);
  CHECK(p.node_count == 10u);
  CHECK(p.num_groups == 5u);
  CHECK(p.sim_duration == 60 * kDay);
  CHECK(p.size.alpha == 2.24);
  CHECK(p.k_distribution.entries().size() == 3);
  CHECK(p.contact_mode == ContactMode::Meeting);
}

TEST_CASE("comments, nulls and underscore keys") {
  const auto p = parse_parameters(R"(
    // leading comment
    {
      "_comment": "ignored",
      "node_count": 10, /* inline */ "num_groups": 5,
      "gamma": null,
      "sigma2": "30m^2",
      "social": {"_why": 1, "model": "caveman", "caves": 2, "cave_size": 5}
    })");
  CHECK(p.gamma == 2.0);
  CHECK(p.sigma2 == 1800.0 * 1800.0);
  CHECK(p.social.model == "caveman");
}

TEST_CASE("every problem is reported") {
  try {
    parse_parameters(R"({"num_groups": 5, "speed": -1, "gmt": {"alpha": 0.5}, "color": "red",
                         "grid": {"cells_x": 0, "depth": 3}, "sim_duration": "soon"})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "color: unknown key"));
    CHECK(mentions(e, "grid.depth: unknown key"));
    CHECK(mentions(e, "sim_duration"));
  }
  try {
    parse_parameters(R"({"num_groups": 5, "speed": -1, "gmt": {"alpha": 0.5}, "grid": {"cells_x": 0}})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "node_count: required"));
    CHECK(mentions(e, "speed"));
    CHECK(mentions(e, "gmt.alpha"));
    CHECK(mentions(e, "grid.cells_x"));
    CHECK(e.problems().size() == 4);
  }
  CHECK_THROWS_AS(parse_parameters("{ not json"), ConfigError);
  CHECK_THROWS_AS(parse_parameters("[1, 2]"), ConfigError);
  CHECK_THROWS_AS(parse_parameters(R"({"node_count": 10, "num_groups": 5,
      "k_distribution": [{"period": "1d", "probability": 0.5}]})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_parameters(R"({"node_count": 10, "num_groups": 5,
      "social": {"model": "caveman", "caves": 3, "cave_size": 3}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_parameters(R"({"node_count": 10, "num_groups": 5, "size": {"x_min": 1}})"),
                  ConfigError);
}

TEST_CASE("dump and parse round trip") {
  for (const char* name : {"grm-100.json", "grm-1000.json"}) {
    const auto p = load_parameters(fs::path(GRM_SOURCE_DIR) / "configs" / name);
    const auto text = dump_parameters(p);
    const auto q = parse_parameters(text);
    CHECK(dump_parameters(q) == text);
    CHECK(q.node_count == p.node_count);
    CHECK(q.sigma2 == p.sigma2);
    CHECK(q.k_distribution.entries().size() == p.k_distribution.entries().size());
  }
  auto p = parse_parameters(kMinimal);
  const auto with_null = dump_parameters(p, {"a note"}, {"num_groups"});
  CHECK(with_null.find("\"num_groups\": null") != std::string::npos);
  CHECK(with_null.find("a note") != std::string::npos);
  CHECK_THROWS_AS(parse_parameters(with_null), ConfigError);  // num_groups is required
}

TEST_CASE("file model paths resolve against the config") {
  const auto dir = fs::temp_directory_path() / "grm_test_params";
  fs::create_directories(dir);
  std::ofstream(dir / "cfg.json")
      << R"({"num_groups": 3, "social": {"model": "file", "file": "g.edges", "communities_file": "g.comm"}})";
  const auto p = load_parameters(dir / "cfg.json");
  CHECK(p.social.file == dir / "g.edges");
  CHECK(p.social.communities_file == dir / "g.comm");
  CHECK_FALSE(p.node_count);
  CHECK_THROWS(load_parameters(dir / "missing.json"));
}
