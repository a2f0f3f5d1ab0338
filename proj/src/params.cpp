#include "grm/params.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "grm/io.hpp"

namespace grm {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out = "invalid configuration:";
  for (const auto& s : items) out += "\n  " + s;
  return out;
}

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

class Reader {
 public:
  std::vector<std::string> problems;

  void check_keys(const Json& obj, const std::string& where, std::initializer_list<const char*> keys) {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : obj.items()) {
      if (!k.empty() && k.front() == '_') continue;
      if (!allowed.count(k)) problems.push_back(where + k + ": unknown key");
    }
  }

  const Json* find(const Json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return nullptr;
    return &*it;
  }

  void number(const Json& obj, const std::string& where, const char* key, double& out) {
    if (const Json* v = find(obj, key)) {
      if (v->is_number()) {
        out = v->get<double>();
      } else {
        problems.push_back(where + key + ": expected a number");
      }
    }
  }

  template <typename T>
  void count(const Json& obj, const std::string& where, const char* key, T& out) {
    if (const Json* v = find(obj, key)) {
      if (v->is_number_unsigned() || (v->is_number_integer() && v->get<long long>() >= 0)) {
        out = static_cast<T>(v->get<unsigned long long>());
      } else {
        problems.push_back(where + key + ": expected a non-negative integer");
      }
    }
  }

  void duration(const Json& obj, const std::string& where, const char* key, Seconds& out) {
    if (const Json* v = find(obj, key)) {
      try {
        if (v->is_number()) {
          out = v->get<double>();
        } else if (v->is_string()) {
          out = parse_duration(v->get<std::string>());
        } else {
          problems.push_back(where + key + ": expected a duration");
        }
      } catch (const ParameterError& e) {
        problems.push_back(where + key + ": " + e.what());
      }
    }
  }

  void variance(const Json& obj, const std::string& where, const char* key, double& out) {
    if (const Json* v = find(obj, key)) {
      if (v->is_number()) {
        out = v->get<double>();
        return;
      }
      if (v->is_string()) {
        std::string s = v->get<std::string>();
        if (s.size() > 2 && s.ends_with("^2")) {
          try {
            const double d = parse_duration(std::string_view(s).substr(0, s.size() - 2));
            out = d * d;
            return;
          } catch (const ParameterError&) {
          }
        }
      }
      problems.push_back(where + key + ": expected seconds squared or a duration followed by ^2");
    }
  }

  void string(const Json& obj, const std::string& where, const char* key, std::string& out) {
    if (const Json* v = find(obj, key)) {
      if (v->is_string()) {
        out = v->get<std::string>();
      } else {
        problems.push_back(where + key + ": expected a string");
      }
    }
  }

  const Json* object(const Json& obj, const std::string& where, const char* key) {
    const Json* v = find(obj, key);
    if (v && !v->is_object()) {
      problems.push_back(where + key + ": expected an object");
      return nullptr;
    }
    return v;
  }
};

void need(std::vector<std::string>& problems, bool ok, const std::string& message) {
  if (!ok) problems.push_back(message);
}

void check_tpl(std::vector<std::string>& p, const std::string& name, double alpha, double beta,
               double x_min) {
  need(p, alpha > 1.0, name + ".alpha: must be > 1");
  need(p, beta > 0.0, name + ".beta: must be positive");
  need(p, x_min > 0.0, name + ".x_min: must be positive");
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : ParameterError(join(problems)), problems_(std::move(problems)) {}

std::optional<ContactMode> parse_contact_mode(std::string_view name) {
  if (name == "meeting") return ContactMode::Meeting;
  if (name == "proximity") return ContactMode::Proximity;
  return std::nullopt;
}

std::string_view to_string(ContactMode mode) {
  return mode == ContactMode::Meeting ? "meeting" : "proximity";
}

Seconds parse_duration(std::string_view text) {
  const auto t = io::trim(text);
  if (t.empty()) throw ParameterError("empty duration");
  double scale = 1.0;
  std::string_view number = t;
  switch (t.back()) {
    case 's': scale = 1.0; number.remove_suffix(1); break;
    case 'm': scale = kMinute; number.remove_suffix(1); break;
    case 'h': scale = kHour; number.remove_suffix(1); break;
    case 'd': scale = kDay; number.remove_suffix(1); break;
    case 'w': scale = kWeek; number.remove_suffix(1); break;
    default: break;
  }
  const auto v = io::parse_double(io::trim(number));
  if (!v || !std::isfinite(*v)) {
    throw ParameterError("malformed duration '" + std::string(text) + "' (units: s, m, h, d, w)");
  }
  return *v * scale;
}

void ParameterSet::validate() const {
  std::vector<std::string> p;
  const bool from_file = social.model == "file";
  if (!node_count && !from_file) p.push_back("node_count: required");
  if (node_count) need(p, *node_count >= 2, "node_count: must be at least 2");
  if (!num_groups) p.push_back("num_groups: required");
  need(p, sim_duration > 0.0, "sim_duration: must be positive");
  need(p, group_duration > 0.0, "group_duration: must be positive");
  need(p, grid.cells_x > 0, "grid.cells_x: must be positive");
  need(p, grid.cells_y > 0, "grid.cells_y: must be positive");
  need(p, grid.cell_size > 0.0, "grid.cell_size: must be positive");
  need(p, gmt_alpha > 1.0, "gmt.alpha: must be > 1");
  need(p, gmt_beta > 0.0, "gmt.beta: must be positive");
  check_tpl(p, "duration", duration.alpha, duration.beta, duration.x_min);
  check_tpl(p, "size", size.alpha, size.beta, size.x_min);
  need(p, size.x_min >= 2.0, "size.x_min: must be at least 2");
  need(p, !k_distribution.entries().empty(), "k_distribution: needs at least one entry");
  need(p, sigma2 >= 0.0, "sigma2: must be non-negative");
  need(p, gamma > 0.0, "gamma: must be positive");
  need(p, speed > 0.0, "speed: must be positive");
  need(p, radio_range > 0.0, "contacts.radio_range: must be positive");
  need(p, time_step > 0.0, "contacts.time_step: must be positive");

  const std::size_t n = node_count.value_or(0);
  if (social.model == "gaussian_random_partition") {
    need(p, social.mean_cluster_size >= 1.0, "social.mean_cluster_size: must be at least 1");
    need(p, social.shape > 0.0, "social.shape: must be positive");
  } else if (social.model == "barabasi_albert") {
    need(p, social.attachment >= 1, "social.attachment: must be at least 1");
    need(p, social.attachment < n, "social.attachment: must be below node_count");
  } else if (social.model == "caveman") {
    need(p, social.caves * social.cave_size == n,
         "social: caves * cave_size must equal node_count");
    need(p, social.rewire >= 0.0 && social.rewire <= 1.0, "social.rewire: must be in [0, 1]");
  } else if (social.model == "random_partition") {
    std::size_t total = 0;
    for (auto s : social.cluster_sizes) total += s;
    need(p, total == n, "social.cluster_sizes: must sum to node_count");
  } else if (from_file) {
    need(p, !social.file.empty(), "social.file: required for the file model");
  } else {
    p.push_back("social.model: unknown model '" + social.model + "'");
  }
  if (social.model == "gaussian_random_partition" || social.model == "random_partition") {
    need(p, social.p_in >= 0.0 && social.p_in <= 1.0, "social.p_in: must be in [0, 1]");
    need(p, social.p_out >= 0.0 && social.p_out <= 1.0, "social.p_out: must be in [0, 1]");
  }
  if (!p.empty()) throw ConfigError(std::move(p));
}

GroupParams ParameterSet::group_params() const {
  GroupParams g;
  g.num_groups = num_groups.value_or(0);
  g.horizon = sim_duration;
  g.group_lifetime = group_duration;
  g.size = size;
  g.gmt_alpha = gmt_alpha;
  g.gmt_beta = gmt_beta;
  g.duration = duration;
  g.k_distribution = k_distribution;
  g.sigma2 = sigma2;
  return g;
}

MovementParams ParameterSet::movement_params() const {
  return MovementParams{speed, sim_duration};
}

ParameterSet parse_parameters(std::string_view json_text, std::string_view source) {
  Json j;
  try {
    j = Json::parse(json_text.begin(), json_text.end(), nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw ConfigError({std::string(source) + ": " + e.what()});
  }
  if (!j.is_object()) throw ConfigError({std::string(source) + ": top level must be an object"});

  ParameterSet ps;
  Reader r;
  r.check_keys(j, "", {"node_count", "num_groups", "seed", "sim_duration", "group_duration", "grid",
                       "gmt", "duration", "size", "k_distribution", "sigma2", "gamma", "speed",
                       "contacts", "social"});
  if (r.find(j, "node_count")) {
    std::size_t n = 0;
    r.count(j, "", "node_count", n);
    ps.node_count = n;
  }
  if (r.find(j, "num_groups")) {
    std::size_t n = 0;
    r.count(j, "", "num_groups", n);
    ps.num_groups = n;
  }
  r.count(j, "", "seed", ps.seed);
  r.duration(j, "", "sim_duration", ps.sim_duration);
  r.duration(j, "", "group_duration", ps.group_duration);
  if (const Json* g = r.object(j, "", "grid")) {
    r.check_keys(*g, "grid.", {"cells_x", "cells_y", "cell_size"});
    r.count(*g, "grid.", "cells_x", ps.grid.cells_x);
    r.count(*g, "grid.", "cells_y", ps.grid.cells_y);
    r.number(*g, "grid.", "cell_size", ps.grid.cell_size);
  }
  if (const Json* g = r.object(j, "", "gmt")) {
    r.check_keys(*g, "gmt.", {"alpha", "beta"});
    r.number(*g, "gmt.", "alpha", ps.gmt_alpha);
    r.duration(*g, "gmt.", "beta", ps.gmt_beta);
  }
  if (const Json* d = r.object(j, "", "duration")) {
    r.check_keys(*d, "duration.", {"alpha", "beta", "x_min"});
    r.number(*d, "duration.", "alpha", ps.duration.alpha);
    r.duration(*d, "duration.", "beta", ps.duration.beta);
    r.duration(*d, "duration.", "x_min", ps.duration.x_min);
  }
  if (const Json* s = r.object(j, "", "size")) {
    r.check_keys(*s, "size.", {"alpha", "beta", "x_min"});
    r.number(*s, "size.", "alpha", ps.size.alpha);
    r.number(*s, "size.", "beta", ps.size.beta);
    r.number(*s, "size.", "x_min", ps.size.x_min);
  }
  if (const Json* k = r.find(j, "k_distribution")) {
    if (!k->is_array()) {
      r.problems.push_back("k_distribution: expected an array of {period, probability}");
    } else {
      std::vector<KDistribution::Entry> entries;
      const std::size_t before = r.problems.size();
      for (std::size_t i = 0; i < k->size(); ++i) {
        const std::string where = "k_distribution[" + std::to_string(i) + "].";
        const Json& e = (*k)[i];
        if (!e.is_object()) {
          r.problems.push_back(where + ": expected an object");
          continue;
        }
        r.check_keys(e, where, {"period", "probability"});
        KDistribution::Entry entry{0.0, -1.0};
        r.duration(e, where, "period", entry.period);
        r.number(e, where, "probability", entry.probability);
        entries.push_back(entry);
      }
      if (r.problems.size() == before) {
        try {
          ps.k_distribution = KDistribution(std::move(entries));
        } catch (const ParameterError& e) {
          r.problems.push_back(e.what());
        }
      }
    }
  }
  r.variance(j, "", "sigma2", ps.sigma2);
  r.number(j, "", "gamma", ps.gamma);
  r.number(j, "", "speed", ps.speed);
  if (const Json* c = r.object(j, "", "contacts")) {
    r.check_keys(*c, "contacts.", {"mode", "radio_range", "time_step"});
    std::string mode(to_string(ps.contact_mode));
    r.string(*c, "contacts.", "mode", mode);
    if (auto m = parse_contact_mode(mode)) {
      ps.contact_mode = *m;
    } else {
      r.problems.push_back("contacts.mode: expected meeting or proximity");
    }
    r.number(*c, "contacts.", "radio_range", ps.radio_range);
    r.duration(*c, "contacts.", "time_step", ps.time_step);
  }
  if (const Json* s = r.object(j, "", "social")) {
    r.check_keys(*s, "social.", {"model", "mean_cluster_size", "shape", "p_in", "p_out", "attachment",
                                 "caves", "cave_size", "rewire", "cluster_sizes", "file",
                                 "communities_file"});
    r.string(*s, "social.", "model", ps.social.model);
    r.number(*s, "social.", "mean_cluster_size", ps.social.mean_cluster_size);
    r.number(*s, "social.", "shape", ps.social.shape);
    r.number(*s, "social.", "p_in", ps.social.p_in);
    r.number(*s, "social.", "p_out", ps.social.p_out);
    r.count(*s, "social.", "attachment", ps.social.attachment);
    r.count(*s, "social.", "caves", ps.social.caves);
    r.count(*s, "social.", "cave_size", ps.social.cave_size);
    r.number(*s, "social.", "rewire", ps.social.rewire);
    if (const Json* cs = r.find(*s, "cluster_sizes")) {
      if (cs->is_array() && std::all_of(cs->begin(), cs->end(),
                                        [](const Json& x) { return x.is_number_unsigned(); })) {
        ps.social.cluster_sizes = cs->get<std::vector<std::size_t>>();
      } else {
        r.problems.push_back("social.cluster_sizes: expected an array of non-negative integers");
      }
    }
    std::string file;
    r.string(*s, "social.", "file", file);
    ps.social.file = file;
    std::string communities;
    r.string(*s, "social.", "communities_file", communities);
    if (!communities.empty()) ps.social.communities_file = communities;
  }
  if (!r.problems.empty()) throw ConfigError(std::move(r.problems));
  ps.validate();
  return ps;
}

ParameterSet load_parameters(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  ParameterSet ps = parse_parameters(ss.str(), path.string());
  if (ps.social.model == "file") {
    if (ps.social.file.is_relative()) ps.social.file = path.parent_path() / ps.social.file;
    if (ps.social.communities_file && ps.social.communities_file->is_relative()) {
      ps.social.communities_file = path.parent_path() / *ps.social.communities_file;
    }
  }
  return ps;
}

std::string dump_parameters(const ParameterSet& ps, const std::vector<std::string>& notes,
                            const std::vector<std::string>& unavailable) {
  OrderedJson j;
  if (!notes.empty()) j["_notes"] = notes;
  j["node_count"] = ps.node_count ? OrderedJson(*ps.node_count) : OrderedJson(nullptr);
  j["num_groups"] = ps.num_groups ? OrderedJson(*ps.num_groups) : OrderedJson(nullptr);
  j["seed"] = ps.seed;
  j["sim_duration"] = ps.sim_duration;
  j["group_duration"] = ps.group_duration;
  j["grid"] = {{"cells_x", ps.grid.cells_x}, {"cells_y", ps.grid.cells_y},
               {"cell_size", ps.grid.cell_size}};
  j["gmt"] = {{"alpha", ps.gmt_alpha}, {"beta", ps.gmt_beta}};
  j["duration"] = {{"alpha", ps.duration.alpha}, {"beta", ps.duration.beta},
                   {"x_min", ps.duration.x_min}};
  j["size"] = {{"alpha", ps.size.alpha}, {"beta", ps.size.beta}, {"x_min", ps.size.x_min}};
  OrderedJson k = OrderedJson::array();
  for (const auto& e : ps.k_distribution.entries()) {
    k.push_back({{"period", e.period}, {"probability", e.probability}});
  }
  j["k_distribution"] = k;
  j["sigma2"] = ps.sigma2;
  j["gamma"] = ps.gamma;
  j["speed"] = ps.speed;
  j["contacts"] = {{"mode", std::string(to_string(ps.contact_mode))},
                   {"radio_range", ps.radio_range},
                   {"time_step", ps.time_step}};
  OrderedJson s;
  s["model"] = ps.social.model;
  if (ps.social.model == "gaussian_random_partition" || ps.social.model == "random_partition") {
    if (ps.social.model == "gaussian_random_partition") {
      s["mean_cluster_size"] = ps.social.mean_cluster_size;
      s["shape"] = ps.social.shape;
    } else {
      s["cluster_sizes"] = ps.social.cluster_sizes;
    }
    s["p_in"] = ps.social.p_in;
    s["p_out"] = ps.social.p_out;
  } else if (ps.social.model == "barabasi_albert") {
    s["attachment"] = ps.social.attachment;
  } else if (ps.social.model == "caveman") {
    s["caves"] = ps.social.caves;
    s["cave_size"] = ps.social.cave_size;
    s["rewire"] = ps.social.rewire;
  } else if (ps.social.model == "file") {
    s["file"] = ps.social.file.string();
    if (ps.social.communities_file) s["communities_file"] = ps.social.communities_file->string();
  }
  j["social"] = s;
  for (const auto& key : unavailable) {
    if (j.contains(key)) j[key] = nullptr;
  }
  return j.dump(2) + "\n";
}

}  // namespace grm
