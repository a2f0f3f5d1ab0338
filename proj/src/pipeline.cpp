#include "grm/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <json.hpp>

#include "grm/io.hpp"

namespace grm {

namespace {

using OrderedJson = nlohmann::ordered_json;

constexpr std::uint64_t kSocialStream = 1;
constexpr std::uint64_t kGroupStream = 2;
constexpr std::uint64_t kHomeStream = 3;
constexpr std::uint64_t kPlaceStream = 4;
constexpr std::uint64_t kWorkloadStream = 5;

OrderedJson manifest_header(const char* command) {
  OrderedJson m;
  m["tool"] = "grm";
  m["version"] = kVersion;
  m["command"] = command;
  return m;
}

void write_manifest(const OrderedJson& manifest, const std::filesystem::path& path) {
  io::TextWriter w(path);
  w.write(manifest.dump(2) + "\n");
  w.close();
}

std::filesystem::path sibling_manifest(const std::filesystem::path& out) {
  return std::filesystem::path(out.string() + ".manifest.json");
}

std::string_view format_name(TraceFormat f) {
  return f == TraceFormat::OneConnections ? "one" : "csv";
}

}  // namespace

SocialGraph build_social_graph(const ParameterSet& params, RandomSource& rng) {
  const auto& s = params.social;
  const std::size_t n = params.node_count.value_or(0);
  if (s.model == "gaussian_random_partition") {
    return generate_gaussian_random_partition(n, s.mean_cluster_size, s.shape, s.p_in, s.p_out, rng);
  }
  if (s.model == "barabasi_albert") return generate_barabasi_albert(n, s.attachment, rng);
  if (s.model == "caveman") return generate_caveman(s.caves, s.cave_size, s.rewire, rng);
  if (s.model == "random_partition") {
    return generate_random_partition(s.cluster_sizes, s.p_in, s.p_out, rng);
  }
  if (s.model == "file") {
    auto loaded = load_social_graph(s.file, s.communities_file);
    if (params.node_count && *params.node_count != loaded.graph.node_count()) {
      throw ConfigError({"node_count: " + std::to_string(*params.node_count) + " but " +
                         s.file.string() + " has " +
                         std::to_string(loaded.graph.node_count()) + " nodes"});
    }
    return std::move(loaded.graph);
  }
  throw ConfigError({"social.model: unknown model '" + s.model + "'"});
}

Scenario simulate(const ParameterSet& params) {
  params.validate();
  const RandomSource master(params.seed);
  Scenario sc;
  RandomSource social_rng = master.derive(kSocialStream);
  sc.graph = build_social_graph(params, social_rng);
  const std::size_t n = sc.graph.node_count();

  RandomSource group_rng = master.derive(kGroupStream);
  sc.schedule = build_schedule(sc.graph, params.group_params(), group_rng);
  RandomSource home_rng = master.derive(kHomeStream);
  sc.homes = assign_homes(n, params.grid, home_rng);
  RandomSource place_rng = master.derive(kPlaceStream);
  assign_meeting_cells(sc.schedule, params.grid, sc.homes, params.gamma, place_rng);
  sc.itineraries = build_itineraries(sc.schedule, params.grid, sc.homes, params.movement_params());
  if (params.contact_mode == ContactMode::Meeting) {
    sc.trace = extract_contacts_meeting(presence_windows(sc.itineraries), n, params.sim_duration);
  } else {
    sc.trace = extract_contacts_proximity(sc.itineraries, params.radio_range, params.time_step,
                                          params.sim_duration);
  }
  spdlog::info("simulated {} nodes, {} groups, {} meetings, {} contacts", n,
               sc.schedule.groups.size(), sc.schedule.meetings.size(), sc.trace.events.size());
  return sc;
}

Scenario run_generate(const ParameterSet& params, const std::filesystem::path& out_dir,
                      const GenerateOptions& options) {
  Scenario sc = simulate(params);
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> outputs;
  auto emit = [&](const std::string& name) { outputs.push_back(name); return out_dir / name; };

  write_one_movement(sc.itineraries, options.movement_step.value_or(params.time_step),
                     params.grid.width(), params.grid.height(), emit("movement.one"));
  write_one_connections(sc.trace, emit("connections.one"));
  write_contact_csv(sc.trace, emit("contacts.csv"));
  write_schedule(sc.schedule, emit("schedule.txt"));
  save_social_graph(sc.graph, emit("social.edges"));
  if (sc.graph.has_labels()) save_communities(sc.graph, emit("social.communities"));

  OrderedJson m = manifest_header("generate");
  m["summary"] = std::to_string(sc.graph.node_count()) + " nodes, " +
                 std::to_string(sc.schedule.groups.size()) + " groups";
  m["seed"] = params.seed;
  m["config"] = OrderedJson::parse(dump_parameters(params));
  OrderedJson inputs = OrderedJson::object();
  if (options.config_path) {
    inputs[options.config_path->filename().string()] = io::sha256_file(*options.config_path);
  }
  if (params.social.model == "file") {
    inputs[params.social.file.filename().string()] = io::sha256_file(params.social.file);
  }
  m["inputs"] = inputs;
  m["counts"] = {{"nodes", sc.graph.node_count()},
                 {"groups", sc.schedule.groups.size()},
                 {"meetings", sc.schedule.meetings.size()},
                 {"contacts", sc.trace.events.size()}};
  OrderedJson digests = OrderedJson::object();
  for (const auto& name : outputs) digests[name] = io::sha256_file(out_dir / name);
  m["outputs"] = digests;
  write_manifest(m, out_dir / "manifest.json");
  return sc;
}

ParameterSet fitted_parameters(const ContactTrace& trace, const ExtractedParameters& ex,
                               std::vector<std::string>& unavailable) {
  ParameterSet ps;
  if (trace.node_count >= 2) {
    ps.node_count = trace.node_count;
  } else {
    unavailable.push_back("node_count");
  }
  if (ex.detected_groups > 0) {
    ps.num_groups = ex.detected_groups;
  } else {
    unavailable.push_back("num_groups");
  }
  if (trace.horizon > 0.0) {
    ps.sim_duration = trace.horizon;
    ps.group_duration = std::min(ps.group_duration, trace.horizon);
  } else {
    unavailable.push_back("sim_duration");
  }
  if (ex.duration) {
    ps.duration = *ex.duration;
  } else {
    unavailable.push_back("duration");
  }
  if (ex.size) {
    ps.size = *ex.size;
  } else {
    unavailable.push_back("size");
  }
  if (ex.gmt) {
    ps.gmt_alpha = ex.gmt->alpha;
    ps.gmt_beta = ex.gmt->beta;
  } else {
    unavailable.push_back("gmt");
  }
  if (ex.k_distribution) {
    ps.k_distribution = *ex.k_distribution;
  } else {
    unavailable.push_back("k_distribution");
  }
  return ps;
}

ExtractedParameters run_fit(const std::filesystem::path& trace_path, TraceFormat format,
                            const std::filesystem::path& out_path,
                            const ExtractionOptions& options) {
  const ContactTrace trace = read_contact_trace(trace_path, format);
  ExtractedParameters ex = extract_parameters(trace, options);
  std::vector<std::string> unavailable;
  const ParameterSet ps = fitted_parameters(trace, ex, unavailable);
  std::vector<std::string> notes = ex.notes;
  for (const auto& key : unavailable) {
    notes.push_back(key + ": not estimable from this trace; null means the default is used");
  }
  notes.push_back("social: not estimable from contacts; default model");
  if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());
  io::TextWriter w(out_path);
  w.write(dump_parameters(ps, notes, unavailable));
  w.close();

  OrderedJson m = manifest_header("fit");
  m["inputs"] = {{trace_path.filename().string(), io::sha256_file(trace_path)}};
  m["format"] = format_name(format);
  m["detection"] = {{"window", options.detection.window},
                    {"min_size", options.detection.min_size},
                    {"similarity_threshold", options.detection.similarity_threshold}};
  m["outputs"] = {{out_path.filename().string(), io::sha256_file(out_path)}};
  write_manifest(m, sibling_manifest(out_path));
  for (const auto& n : ex.notes) spdlog::warn("fit: {}", n);
  return ex;
}

std::optional<Analysis> parse_analysis(std::string_view name) {
  if (name == "ict") return Analysis::Ict;
  if (name == "cd") return Analysis::Cd;
  if (name == "remeeting") return Analysis::Remeeting;
  if (name == "communities") return Analysis::Communities;
  if (name == "fit") return Analysis::FitReport;
  return std::nullopt;
}

namespace {

void report_fits(std::vector<std::pair<std::string, std::string>>& rows, const std::string& label,
                 std::vector<double> samples, Seconds x_min) {
  std::erase_if(samples, [&](double x) { return !(x >= x_min); });
  rows.emplace_back(label + "_samples", std::to_string(samples.size()));
  if (samples.size() < kFitMinSamples) {
    rows.emplace_back(label + "_fit", "unavailable");
    return;
  }
  try {
    const auto tpl = fit_tpl(samples, x_min);
    const auto ex = fit_exponential(samples, x_min);
    rows.emplace_back(label + "_tpl_alpha", io::format_exact(tpl.dist.alpha));
    rows.emplace_back(label + "_tpl_beta", io::format_exact(tpl.dist.beta));
    rows.emplace_back(label + "_tpl_ks", io::format_exact(ks_statistic(samples, tpl.dist)));
    rows.emplace_back(label + "_exp_rate", io::format_exact(ex.rate));
    rows.emplace_back(label + "_exp_ks",
                      io::format_exact(ks_statistic(samples, [&](double x) { return ex.cdf(x); })));
  } catch (const FitError& e) {
    rows.emplace_back(label + "_fit", std::string("failed: ") + e.what());
  }
}

}  // namespace

void run_analyze(const std::filesystem::path& trace_path, TraceFormat format,
                 const std::filesystem::path& out_dir, const AnalyzeOptions& options) {
  const ContactTrace trace = read_contact_trace(trace_path, format);
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> outputs;
  const auto want = [&](Analysis a) { return options.only.count(a) > 0; };

  if (want(Analysis::Ict)) {
    write_ccdf(compute_ccdf(intercontact_samples(trace)), out_dir / "ict_ccdf.csv");
    outputs.push_back("ict_ccdf.csv");
  }
  if (want(Analysis::Cd)) {
    write_ccdf(compute_ccdf(contact_duration_samples(trace)), out_dir / "cd_ccdf.csv");
    outputs.push_back("cd_ccdf.csv");
  }
  std::optional<std::vector<DetectedGroup>> groups;
  if (want(Analysis::Remeeting) || want(Analysis::FitReport)) {
    groups = detect_groups(trace, options.detection);
  }
  if (want(Analysis::Remeeting)) {
    write_histogram(remeeting_pdf(*groups, options.remeeting_bin, options.remeeting_horizon),
                    out_dir / "remeeting.csv");
    outputs.push_back("remeeting.csv");
  }
  std::optional<std::vector<Community>> communities;
  if (want(Analysis::Communities) || want(Analysis::FitReport)) {
    communities = clique_percolation(trace, options.clique_size, options.min_total_contact);
  }
  if (want(Analysis::Communities)) {
    write_communities(*communities, out_dir / "communities.csv");
    outputs.push_back("communities.csv");
  }
  if (want(Analysis::FitReport)) {
    std::vector<std::pair<std::string, std::string>> rows;
    rows.emplace_back("nodes", std::to_string(trace.node_count));
    rows.emplace_back("contacts", std::to_string(trace.events.size()));
    rows.emplace_back("horizon_seconds", io::format_exact(trace.horizon));
    report_fits(rows, "ict", intercontact_samples(trace), options.time_x_min);
    report_fits(rows, "cd", contact_duration_samples(trace), options.time_x_min);
    rows.emplace_back("detected_groups", std::to_string(groups->size()));
    rows.emplace_back("communities", std::to_string(communities->size()));
    io::TextWriter w(out_dir / "fit_report.csv");
    std::string buf = "key,value\n";
    for (const auto& [k, v] : rows) buf += k + "," + v + "\n";
    w.write(buf);
    w.close();
    outputs.push_back("fit_report.csv");
  }

  OrderedJson m = manifest_header("analyze");
  m["inputs"] = {{trace_path.filename().string(), io::sha256_file(trace_path)}};
  m["format"] = format_name(format);
  m["options"] = {{"window", options.detection.window},
                  {"min_size", options.detection.min_size},
                  {"similarity_threshold", options.detection.similarity_threshold},
                  {"remeeting_bin", options.remeeting_bin},
                  {"remeeting_horizon", options.remeeting_horizon},
                  {"clique_size", options.clique_size},
                  {"min_total_contact", options.min_total_contact},
                  {"time_x_min", options.time_x_min}};
  OrderedJson digests = OrderedJson::object();
  for (const auto& name : outputs) digests[name] = io::sha256_file(out_dir / name);
  m["outputs"] = digests;
  write_manifest(m, out_dir / "manifest.json");
}

std::vector<ReplayMetrics> forward_experiment(const ContactTrace& trace,
                                              const ForwardOptions& options) {
  if (!(options.warmup_fraction >= 0.0 && options.warmup_fraction < 1.0)) {
    throw ParameterError("forward: warm-up fraction must be in [0, 1)");
  }
  const Seconds warm_end = options.warmup_fraction * trace.horizon;
  const ContactTrace warm = trace_prefix(trace, warm_end);
  std::vector<std::unique_ptr<Protocol>> owned;
  for (const auto& name : options.protocols) {
    if (name == "flooding") {
      owned.push_back(std::make_unique<Flooding>());
    } else if (name == "bubblerap") {
      BubbleRapOptions bo;
      bo.centrality = options.centrality;
      owned.push_back(std::make_unique<BubbleRap>(warm, bo));
    } else if (name == "groupsnet") {
      GroupsNetOptions go;
      go.recency_window = options.recency_window;
      owned.push_back(std::make_unique<GroupsNet>(warm, go));
    } else {
      throw ParameterError("forward: unknown protocol '" + name + "'");
    }
  }
  std::vector<const Protocol*> protocols;
  for (const auto& p : owned) protocols.push_back(p.get());
  RandomSource rng = RandomSource(options.seed).derive(kWorkloadStream);
  const auto workload =
      make_workload(trace.node_count, options.messages, warm_end, trace.horizon, rng);
  return ttl_sweep(trace, protocols, workload, options.ttls, options.granularity);
}

std::vector<ReplayMetrics> run_forward(const std::filesystem::path& trace_path, TraceFormat format,
                                       const std::filesystem::path& out_path,
                                       const ForwardOptions& options) {
  const ContactTrace trace = read_contact_trace(trace_path, format);
  auto rows = forward_experiment(trace, options);
  if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());
  write_metrics(rows, out_path);

  OrderedJson m = manifest_header("forward");
  m["inputs"] = {{trace_path.filename().string(), io::sha256_file(trace_path)}};
  m["format"] = format_name(format);
  m["seed"] = options.seed;
  m["warmup_fraction"] = options.warmup_fraction;
  m["messages"] = options.messages;
  m["protocols"] = options.protocols;
  std::vector<double> hours;
  for (Seconds t : options.ttls) hours.push_back(t / kHour);
  m["ttl_hours"] = hours;
  m["granularity"] = options.granularity == Granularity::Interval ? "interval" : "contact-start";
  m["centrality"] = options.centrality == Centrality::AggregatedDegree ? "aggregated" : "windowed";
  m["recency_window"] = options.recency_window;
  m["outputs"] = {{out_path.filename().string(), io::sha256_file(out_path)}};
  write_manifest(m, sibling_manifest(out_path));
  return rows;
}

}  // namespace grm
