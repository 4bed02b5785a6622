#ifndef BLOCKZOO_HARNESS_HPP
#define BLOCKZOO_HARNESS_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "blockzoo/graph.hpp"
#include "blockzoo/io.hpp"
#include "blockzoo/lqr.hpp"
#include "blockzoo/objective.hpp"
#include "blockzoo/scenario.hpp"
#include "blockzoo/schedule.hpp"
#include "blockzoo/zoo.hpp"

namespace blockzoo {

/// Rejected configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numeric failure during a run (CLI exit code 3).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  // [scenario]
  std::string scenario = "formation";  // "formation" or "chain"
  int n_agents = 10;
  double gamma = 0.99;
  double theta = 1.0;
  std::vector<int> leaders;   // empty = default odd ids
  std::string system_file;    // optional explicit system JSON (formation)
  double chain_target = 1.0;  // chain scenario
  double chain_sigma = 0.1;

  // [graphs]
  std::string cost_file;     // optional graph files override the defaults
  std::string sensing_file;
  std::string cluster_mode = "random";  // "random" or "lowest"
  int cluster_trials = 20;
  std::uint64_t cluster_seed = 1;

  // [zoo]
  double step_size = 1e-6;
  double radius = 1.0;          // shared r_i (per-agent list overrides)
  std::vector<double> radii;
  double w_base = 0.0;
  WeightCapPolicy caps;
  long iterations = 1000;       // T_K
  double guard_threshold = 1e8;

  // [lqr]
  long rollout_horizon = 50;    // T_J
  std::string algorithm = "distributed";  // distributed | baseline | both
  int n_avg = 1;
  int n_repeat = 0;             // > 0 turns on repeat-variance recording
  bool record_exact_cost = true;
  bool record_exact_gradient = false;

  // [output]
  std::string out_dir = "out";
  int n_seeds = 1;
  std::uint64_t base_seed = 1;
  std::vector<std::uint64_t> seeds;  // explicit list overrides base_seed+i

  std::vector<std::uint64_t> seed_list() const {
    if (!seeds.empty()) return seeds;
    std::vector<std::uint64_t> s(n_seeds);
    for (int i = 0; i < n_seeds; ++i) s[i] = base_seed + std::uint64_t(i);
    return s;
  }

  ZooConfig zoo_config(int n) const {
    ZooConfig z;
    z.step_size = step_size;
    z.radii = radii.empty() ? std::vector<double>(size_t(n), radius) : radii;
    z.w_base = w_base;
    z.caps = caps;
    z.iterations = iterations;
    z.guard_threshold = guard_threshold;
    return z;
  }

  LqrRunOptions lqr_options() const {
    LqrRunOptions o;
    o.rollout_horizon = rollout_horizon;
    o.record_exact_cost = record_exact_cost;
    o.record_exact_gradient = record_exact_gradient;
    o.n_repeat = n_repeat;
    return o;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["scenario"] = {{"name", scenario},       {"n_agents", n_agents},
                     {"gamma", gamma},         {"theta", theta},
                     {"leaders", leaders},     {"system_file", system_file},
                     {"chain_target", chain_target},
                     {"chain_sigma", chain_sigma}};
    j["graphs"] = {{"cost_file", cost_file},
                   {"sensing_file", sensing_file},
                   {"cluster_mode", cluster_mode},
                   {"cluster_trials", cluster_trials},
                   {"cluster_seed", cluster_seed}};
    j["zoo"] = {{"step_size", step_size},
                {"radius", radius},
                {"radii", radii},
                {"w_base", w_base},
                {"iterations", iterations},
                {"guard_threshold", guard_threshold},
                {"caps",
                 {{"enabled", caps.enabled},
                  {"rho0", caps.rho0},
                  {"T0", caps.T0},
                  {"eps_bar", caps.eps_bar}}}};
    j["lqr"] = {{"rollout_horizon", rollout_horizon},
                {"algorithm", algorithm},
                {"n_avg", n_avg},
                {"n_repeat", n_repeat},
                {"record_exact_cost", record_exact_cost},
                {"record_exact_gradient", record_exact_gradient}};
    j["output"] = {{"dir", out_dir},
                   {"n_seeds", n_seeds},
                   {"base_seed", base_seed},
                   {"seeds", seeds}};
    return j;
  }

  static ExperimentConfig from_json(nlohmann::json j) {
    // A manifest wraps the config under "config"; accept both.
    if (j.contains("config")) j = j.at("config");
    ExperimentConfig c;
    try {
      if (j.contains("scenario")) {
        const auto& s = j.at("scenario");
        if (s.contains("name")) c.scenario = s.at("name").get<std::string>();
        if (s.contains("n_agents")) c.n_agents = s.at("n_agents").get<int>();
        if (s.contains("gamma")) c.gamma = s.at("gamma").get<double>();
        if (s.contains("theta")) c.theta = s.at("theta").get<double>();
        if (s.contains("leaders")) c.leaders = s.at("leaders").get<std::vector<int>>();
        if (s.contains("system_file"))
          c.system_file = s.at("system_file").get<std::string>();
        if (s.contains("chain_target"))
          c.chain_target = s.at("chain_target").get<double>();
        if (s.contains("chain_sigma"))
          c.chain_sigma = s.at("chain_sigma").get<double>();
      }
      if (j.contains("graphs")) {
        const auto& g = j.at("graphs");
        if (g.contains("cost_file")) c.cost_file = g.at("cost_file").get<std::string>();
        if (g.contains("sensing_file"))
          c.sensing_file = g.at("sensing_file").get<std::string>();
        if (g.contains("cluster_mode"))
          c.cluster_mode = g.at("cluster_mode").get<std::string>();
        if (g.contains("cluster_trials"))
          c.cluster_trials = g.at("cluster_trials").get<int>();
        if (g.contains("cluster_seed"))
          c.cluster_seed = g.at("cluster_seed").get<std::uint64_t>();
      }
      if (j.contains("zoo")) {
        const auto& z = j.at("zoo");
        if (z.contains("step_size")) c.step_size = z.at("step_size").get<double>();
        if (z.contains("radius")) c.radius = z.at("radius").get<double>();
        if (z.contains("radii")) c.radii = z.at("radii").get<std::vector<double>>();
        if (z.contains("w_base")) c.w_base = z.at("w_base").get<double>();
        if (z.contains("iterations")) c.iterations = z.at("iterations").get<long>();
        if (z.contains("guard_threshold"))
          c.guard_threshold = z.at("guard_threshold").get<double>();
        if (z.contains("caps")) {
          const auto& cp = z.at("caps");
          if (cp.contains("enabled")) c.caps.enabled = cp.at("enabled").get<bool>();
          if (cp.contains("rho0")) c.caps.rho0 = cp.at("rho0").get<double>();
          if (cp.contains("T0")) c.caps.T0 = cp.at("T0").get<int>();
          if (cp.contains("eps_bar")) c.caps.eps_bar = cp.at("eps_bar").get<double>();
        }
      }
      if (j.contains("lqr")) {
        const auto& l = j.at("lqr");
        if (l.contains("rollout_horizon"))
          c.rollout_horizon = l.at("rollout_horizon").get<long>();
        if (l.contains("algorithm"))
          c.algorithm = l.at("algorithm").get<std::string>();
        if (l.contains("n_avg")) c.n_avg = l.at("n_avg").get<int>();
        if (l.contains("n_repeat")) c.n_repeat = l.at("n_repeat").get<int>();
        if (l.contains("record_exact_cost"))
          c.record_exact_cost = l.at("record_exact_cost").get<bool>();
        if (l.contains("record_exact_gradient"))
          c.record_exact_gradient = l.at("record_exact_gradient").get<bool>();
      }
      if (j.contains("output")) {
        const auto& o = j.at("output");
        if (o.contains("dir")) c.out_dir = o.at("dir").get<std::string>();
        if (o.contains("n_seeds")) c.n_seeds = o.at("n_seeds").get<int>();
        if (o.contains("base_seed"))
          c.base_seed = o.at("base_seed").get<std::uint64_t>();
        if (o.contains("seeds"))
          c.seeds = o.at("seeds").get<std::vector<std::uint64_t>>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config parse error: ") + e.what());
    }
    c.validate();
    return c;
  }

  void validate() const {
    if (scenario != "formation" && scenario != "chain")
      throw ConfigError("unknown scenario '" + scenario + "'");
    if (n_agents < 2) throw ConfigError("n_agents must be >= 2");
    if (gamma <= 0.0 || gamma > 1.0) throw ConfigError("gamma must be in (0,1]");
    if (step_size < 0.0) throw ConfigError("step_size must be >= 0");
    if (radius <= 0.0) throw ConfigError("radius must be > 0");
    for (double r : radii)
      if (r <= 0.0) throw ConfigError("all radii must be > 0");
    if (!radii.empty() && int(radii.size()) != n_agents)
      throw ConfigError("radii list length must equal n_agents");
    if (iterations < 1) throw ConfigError("iterations must be >= 1");
    if (rollout_horizon < 1) throw ConfigError("rollout_horizon must be >= 1");
    if (n_seeds < 1 && seeds.empty()) throw ConfigError("n_seeds must be >= 1");
    if (n_avg < 1) throw ConfigError("n_avg must be >= 1");
    if (n_repeat < 0) throw ConfigError("n_repeat must be >= 0");
    if (cluster_trials < 1) throw ConfigError("cluster_trials must be >= 1");
    if (cluster_mode != "random" && cluster_mode != "lowest")
      throw ConfigError("cluster_mode must be 'random' or 'lowest'");
    if (algorithm != "distributed" && algorithm != "baseline" &&
        algorithm != "both")
      throw ConfigError("algorithm must be distributed|baseline|both");
    if (guard_threshold <= 0.0) throw ConfigError("guard_threshold must be > 0");
    for (const std::string& f : {cost_file, sensing_file, system_file})
      if (!f.empty() && !std::filesystem::exists(f))
        throw ConfigError("referenced file does not exist: " + f);
  }
};

inline ExperimentConfig load_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = load_json_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return ExperimentConfig::from_json(j);
}

// ---------------------------------------------------------------------------
// Shared setup: scenario, clustering, schedule
// ---------------------------------------------------------------------------

inline DirectedGraph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open graph file: " + path);
  try {
    return DirectedGraph::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError(std::string(e.what()) + " (" + path + ")");
  }
}

inline Clustering choose_clustering(const DirectedGraph& graph,
                                    const ExperimentConfig& cfg) {
  Rng rng = Rng::stream(cfg.cluster_seed, 0, 0);
  if (cfg.cluster_mode == "lowest")
    return cluster_non_adjacent(graph, rng, ClusterMode::LowestIndex);
  return min_cluster_trials(graph, cfg.cluster_trials, rng);
}

struct PreparedLqr {
  FormationScenario scenario;
  std::vector<LocalCostSpec> specs;
  Clustering clustering;
  UpdateSchedule schedule;
};

inline PreparedLqr prepare_lqr(const ExperimentConfig& cfg) {
  PreparedLqr p;
  try {
    if (!cfg.system_file.empty()) {
      std::vector<int> leaders;
      p.scenario.system = system_from_json(load_json_file(cfg.system_file), &leaders);
      p.scenario.leaders = leaders;
      p.scenario.sensing = p.scenario.system.sensing;
      p.scenario.cost = p.scenario.system.cost_graph();
      p.scenario.learning = build_learning_graph(p.scenario.cost, p.scenario.sensing);
      // Default start: identity-style stabilizer only makes sense for the
      // formation block structure; explicit systems start from zero.
      p.scenario.k0 = DistributedGain(p.scenario.sensing,
                                      p.scenario.system.input_dim,
                                      p.scenario.system.state_dim);
    } else {
      std::vector<std::pair<int, int>> cost_edges, sensing_edges;
      if (!cfg.cost_file.empty())
        cost_edges = non_loop_edges(load_graph_file(cfg.cost_file));
      if (!cfg.sensing_file.empty())
        sensing_edges = non_loop_edges(load_graph_file(cfg.sensing_file));
      p.scenario = build_formation_scenario(cfg.n_agents, cost_edges,
                                            sensing_edges, cfg.leaders,
                                            cfg.gamma, cfg.theta);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  p.specs = build_local_costs(p.scenario.system, p.scenario.learning);
  p.clustering = choose_clustering(p.scenario.learning, cfg);
  if (!validate_clustering(p.scenario.learning, p.clustering).valid())
    throw ConfigError("clustering invalid for the learning graph");
  p.schedule = make_cyclic_schedule(p.clustering.size(), cfg.iterations);
  if (!validate_schedule(p.schedule, p.clustering.size()).valid())
    throw ConfigError("schedule violates the periodic-update assumption");
  return p;
}

// ---------------------------------------------------------------------------
// Experiment runner
// ---------------------------------------------------------------------------

struct SeedOutcome {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::string trace_file;     // distributed (or chain) trace
  std::string baseline_file;  // baseline trace, when run
  std::string band_file;      // repeat-variance band, when recorded
  double final_cost = std::numeric_limits<double>::quiet_NaN();
  double best_cost = std::numeric_limits<double>::quiet_NaN();
  long guard_count = 0;
};

struct ExperimentResult {
  std::string out_dir;
  std::vector<SeedOutcome> outcomes;
  nlohmann::json summary;

  bool all_ok() const {
    return std::all_of(outcomes.begin(), outcomes.end(),
                       [](const SeedOutcome& s) { return s.ok; });
  }
};

namespace detail {

inline void write_trace_file(const std::string& path, const RunTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace: " + path);
  trace.write_csv(out);
}

inline void write_band_file(const std::string& path,
                            const std::vector<double>& lo,
                            const std::vector<double>& hi) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write band file: " + path);
  out << "iter,lookahead_min,lookahead_max\n";
  out.precision(17);
  for (size_t k = 0; k < lo.size(); ++k)
    out << k << "," << lo[k] << "," << hi[k] << "\n";
}

inline std::vector<double> trace_costs(const RunTrace& trace) {
  std::vector<double> v;
  v.reserve(trace.records.size());
  for (const auto& r : trace.records) v.push_back(r.f_exact);
  return v;
}

/// Per-iteration median/min/max across seeds (the shaded-band data).
inline nlohmann::json aggregate_bands(const std::vector<std::vector<double>>& runs) {
  nlohmann::json out;
  std::vector<double> med, lo, hi;
  if (runs.empty()) return {{"median", med}, {"min", lo}, {"max", hi}};
  const size_t T = runs[0].size();
  for (size_t k = 0; k < T; ++k) {
    std::vector<double> col;
    for (const auto& r : runs)
      if (k < r.size() && std::isfinite(r[k])) col.push_back(r[k]);
    if (col.empty()) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      med.push_back(nan); lo.push_back(nan); hi.push_back(nan);
      continue;
    }
    std::sort(col.begin(), col.end());
    lo.push_back(col.front());
    hi.push_back(col.back());
    const size_t m = col.size() / 2;
    med.push_back(col.size() % 2 ? col[m] : 0.5 * (col[m - 1] + col[m]));
  }
  return {{"median", med}, {"min", lo}, {"max", hi}};
}

}  // namespace detail

/// Runs the configured experiment across seeds and writes per-seed trace
/// CSVs, an aggregate summary, and a manifest into cfg.out_dir. A failing
/// seed is recorded and the remaining seeds still run.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const std::vector<std::uint64_t> seeds = cfg.seed_list();

  ExperimentResult result;
  result.out_dir = cfg.out_dir;
  result.outcomes.resize(seeds.size());

  nlohmann::json clustering_json = nlohmann::json::array();
  std::vector<std::vector<double>> dist_runs, base_runs;
  std::vector<std::vector<double>> dist_runs_store(seeds.size()),
      base_runs_store(seeds.size());

  if (cfg.scenario == "chain") {
    const NetworkedObjective obj =
        make_displacement_chain(cfg.n_agents, cfg.chain_target, cfg.chain_sigma);
    const Clustering clustering = choose_clustering(obj.graph, cfg);
    if (!validate_clustering(obj.graph, clustering).valid())
      throw ConfigError("clustering invalid for the objective graph");
    const UpdateSchedule sched =
        make_cyclic_schedule(clustering.size(), cfg.iterations);
    clustering_json = clustering.clusters;
    const ZooConfig zoo = cfg.zoo_config(cfg.n_agents);

    detail::parallel_indices(int(seeds.size()), configured_threads(), [&](int s) {
      SeedOutcome& o = result.outcomes[size_t(s)];
      o.seed = seeds[size_t(s)];
      try {
        const RunTrace trace = run_async_zoo(obj, clustering, sched, zoo,
                                             obj.zero_point(), o.seed, 1);
        o.trace_file = cfg.out_dir + "/seed_" + std::to_string(o.seed) + ".csv";
        detail::write_trace_file(o.trace_file, trace);
        const std::vector<double> costs = detail::trace_costs(trace);
        dist_runs_store[size_t(s)] = costs;
        o.final_cost = costs.empty() ? 0.0 : costs.back();
        o.best_cost = *std::min_element(costs.begin(), costs.end());
        o.guard_count = trace.guard_count;
        o.ok = true;
      } catch (const std::exception& e) {
        o.error = e.what();
      }
    });
  } else {
    const PreparedLqr p = prepare_lqr(cfg);
    clustering_json = p.clustering.clusters;
    const ZooConfig zoo = cfg.zoo_config(cfg.n_agents);
    const LqrRunOptions opt = cfg.lqr_options();
    const bool run_dist = cfg.algorithm != "baseline";
    const bool run_base = cfg.algorithm != "distributed";

    detail::parallel_indices(int(seeds.size()), configured_threads(), [&](int s) {
      SeedOutcome& o = result.outcomes[size_t(s)];
      o.seed = seeds[size_t(s)];
      try {
        if (run_dist) {
          const LqrRunResult run =
              run_async_lqr(p.scenario.system, p.specs, p.scenario.learning,
                            p.clustering, p.schedule, zoo, p.scenario.k0,
                            o.seed, opt, 1);
          o.trace_file = cfg.out_dir + "/seed_" + std::to_string(o.seed) + ".csv";
          detail::write_trace_file(o.trace_file, run.trace);
          if (!run.lookahead_min.empty()) {
            o.band_file =
                cfg.out_dir + "/seed_" + std::to_string(o.seed) + "_band.csv";
            detail::write_band_file(o.band_file, run.lookahead_min,
                                    run.lookahead_max);
          }
          const std::vector<double> costs = detail::trace_costs(run.trace);
          dist_runs_store[size_t(s)] = costs;
          o.final_cost = costs.empty() ? 0.0 : costs.back();
          o.best_cost = *std::min_element(costs.begin(), costs.end());
          o.guard_count = run.trace.guard_count;
          save_json_file(
              cfg.out_dir + "/seed_" + std::to_string(o.seed) + "_gain.json",
              gain_to_json(run.final_gain));
        }
        if (run_base) {
          const LqrRunResult run = centralized_zoo_baseline(
              p.scenario.system, zoo, p.scenario.k0, cfg.n_avg, o.seed, opt);
          o.baseline_file =
              cfg.out_dir + "/seed_" + std::to_string(o.seed) + "_baseline.csv";
          detail::write_trace_file(o.baseline_file, run.trace);
          base_runs_store[size_t(s)] = detail::trace_costs(run.trace);
          if (!run_dist) {
            const auto& costs = base_runs_store[size_t(s)];
            o.final_cost = costs.empty() ? 0.0 : costs.back();
            o.best_cost = *std::min_element(costs.begin(), costs.end());
            o.guard_count = run.trace.guard_count;
          }
        }
        o.ok = true;
      } catch (const std::exception& e) {
        o.error = e.what();
      }
    });
  }

  for (auto& r : dist_runs_store)
    if (!r.empty()) dist_runs.push_back(std::move(r));
  for (auto& r : base_runs_store)
    if (!r.empty()) base_runs.push_back(std::move(r));

  nlohmann::json manifest;
  manifest["config"] = cfg.to_json();
  manifest["config"]["output"]["seeds"] = seeds;  // pin for reproduction
  manifest["clustering"] = clustering_json;
  nlohmann::json per_seed = nlohmann::json::array();
  for (const auto& o : result.outcomes)
    per_seed.push_back({{"seed", o.seed},
                        {"ok", o.ok},
                        {"error", o.error},
                        {"trace_file", o.trace_file},
                        {"baseline_file", o.baseline_file},
                        {"band_file", o.band_file},
                        {"final_cost", o.final_cost},
                        {"best_cost", o.best_cost},
                        {"guard_count", o.guard_count}});
  manifest["seeds"] = per_seed;
  save_json_file(cfg.out_dir + "/manifest.json", manifest);

  nlohmann::json summary;
  summary["scenario"] = cfg.scenario;
  summary["n_seeds"] = seeds.size();
  summary["clustering"] = clustering_json;
  if (!dist_runs.empty()) summary["distributed"] = detail::aggregate_bands(dist_runs);
  if (!base_runs.empty()) summary["baseline"] = detail::aggregate_bands(base_runs);
  save_json_file(cfg.out_dir + "/summary.json", summary);
  result.summary = summary;
  return result;
}

// ---------------------------------------------------------------------------
// Reporting
// ---------------------------------------------------------------------------

/// Parses a trace CSV back into per-row values; malformed rows raise an
/// error naming the line number.
inline std::vector<IterationRecord> parse_trace_csv(std::istream& in,
                                                    const std::string& path) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty trace file");
  if (line != "iter,cluster,f_exact,grad_sq_active,guarded,seed_counter")
    throw std::runtime_error(path + ":1: unexpected header '" + line + "'");
  std::vector<IterationRecord> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    IterationRecord r;
    try {
      if (fields.size() != 6) throw std::invalid_argument("field count");
      // std::stod (unlike stream extraction) accepts nan/inf fields.
      r.iter = std::stol(fields[0]);
      r.cluster = std::stoi(fields[1]);
      r.f_exact = std::stod(fields[2]);
      r.grad_sq_active = std::stod(fields[3]);
      r.guarded = std::stoi(fields[4]) != 0;
      r.seed_counter = std::stoull(fields[5]);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": malformed trace row");
    }
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<IterationRecord> load_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  return parse_trace_csv(in, path);
}

/// Summarizes an artifact directory: final/best costs per seed, the exact
/// centralized-optimum floor for LQR scenarios, guard counts, and the
/// clustering used.
inline nlohmann::json report_summary(const std::string& dir, std::ostream& text) {
  const std::string manifest_path = dir + "/manifest.json";
  if (!std::filesystem::exists(manifest_path))
    throw std::runtime_error("missing file: " + manifest_path);
  const nlohmann::json manifest = load_json_file(manifest_path);
  const ExperimentConfig cfg = ExperimentConfig::from_json(manifest.at("config"));

  nlohmann::json rep;
  rep["scenario"] = cfg.scenario;
  rep["clustering"] = manifest.at("clustering");

  double jstar = std::numeric_limits<double>::quiet_NaN();
  if (cfg.scenario == "formation") {
    const PreparedLqr p = prepare_lqr(cfg);
    jstar = centralized_optimum(p.scenario.system).cost;
    rep["optimal_cost"] = jstar;
  }

  nlohmann::json seeds = nlohmann::json::array();
  text << "scenario: " << cfg.scenario << "\n";
  if (std::isfinite(jstar)) text << "optimal cost J*: " << jstar << "\n";
  for (const auto& s : manifest.at("seeds")) {
    nlohmann::json e = s;
    const std::string trace_file = s.at("trace_file").get<std::string>();
    if (!trace_file.empty()) {
      const auto rows = load_trace_csv(trace_file);
      e["iterations"] = rows.size();
      double best = std::numeric_limits<double>::infinity();
      long guards = 0;
      for (const auto& r : rows) {
        if (std::isfinite(r.f_exact)) best = std::min(best, r.f_exact);
        guards += r.guarded ? 1 : 0;
      }
      e["best_cost"] = best;
      e["guard_count"] = guards;
      if (!rows.empty()) e["final_cost"] = rows.back().f_exact;
      if (std::isfinite(jstar) && jstar > 0.0 && !rows.empty())
        e["final_to_optimal_ratio"] = rows.back().f_exact / jstar;
    }
    text << "seed " << s.at("seed") << ": ok=" << s.at("ok").get<bool>()
         << " final=" << e.value("final_cost", std::nan(""))
         << " best=" << e.value("best_cost", std::nan(""))
         << " guards=" << e.value("guard_count", 0L) << "\n";
    seeds.push_back(e);
  }
  rep["seeds"] = seeds;
  return rep;
}

}  // namespace blockzoo

#endif  // BLOCKZOO_HARNESS_HPP
