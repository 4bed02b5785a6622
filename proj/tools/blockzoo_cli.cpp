// Command-line front end: clustering, generic ZOO runs, distributed LQR
// learning, the centralized baseline, estimator diagnostics, parameter
// advice, exact oracles, and artifact reporting.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "blockzoo/advisor.hpp"
#include "blockzoo/diagnostics.hpp"
#include "blockzoo/harness.hpp"

namespace {

using blockzoo::ConfigError;
using nlohmann::json;

struct GlobalArgs {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int trials = 0;
};

blockzoo::ExperimentConfig resolve_config(const GlobalArgs& g,
                                          const std::string& scenario = "") {
  blockzoo::ExperimentConfig cfg;
  if (!g.config.empty()) cfg = blockzoo::load_config(g.config);
  if (!scenario.empty()) cfg.scenario = scenario;
  if (g.seed_set) {
    cfg.base_seed = g.seed;
    cfg.seeds.clear();
  }
  if (!g.out.empty()) cfg.out_dir = g.out;
  if (g.trials > 0) cfg.n_seeds = g.trials;
  cfg.validate();
  return cfg;
}

int run_cluster(const GlobalArgs& g, const std::string& graph_file) {
  blockzoo::DirectedGraph graph = blockzoo::load_graph_file(graph_file);
  blockzoo::Rng rng = blockzoo::Rng::stream(g.seed_set ? g.seed : 1, 0, 0);
  const int trials = g.trials > 0 ? g.trials : 20;
  const blockzoo::Clustering c = blockzoo::min_cluster_trials(graph, trials, rng);
  const blockzoo::ClusterValidity v = blockzoo::validate_clustering(graph, c);
  json out{{"clusters", c.clusters},
           {"n_clusters", c.size()},
           {"largest_cluster", c.largest_cluster()},
           {"valid", v.valid()}};
  std::cout << out.dump(2) << "\n";
  if (!g.out.empty()) blockzoo::save_json_file(g.out, out);
  return v.valid() ? 0 : 3;
}

int run_experiment_cmd(const GlobalArgs& g, const std::string& scenario,
                       const std::string& algorithm) {
  blockzoo::ExperimentConfig cfg = resolve_config(g, scenario);
  if (!algorithm.empty()) cfg.algorithm = algorithm;
  const blockzoo::ExperimentResult res = blockzoo::run_experiment(cfg);
  std::cout << res.summary.dump(2) << "\n";
  for (const auto& o : res.outcomes)
    if (!o.ok)
      std::cerr << "seed " << o.seed << " failed: " << o.error << "\n";
  return res.all_ok() ? 0 : 3;
}

int run_variance(const GlobalArgs& g) {
  // Local vs global one-point estimator covariances on a small chain
  // objective at a fixed point, plus the analytic leading-term gap.
  blockzoo::ExperimentConfig cfg = resolve_config(g, "chain");
  const long draws = g.trials > 0 ? g.trials : 100000;
  const std::uint64_t seed = g.seed_set ? g.seed : 1;
  const blockzoo::NetworkedObjective obj = blockzoo::make_displacement_chain(
      cfg.n_agents, cfg.chain_target, cfg.chain_sigma);
  const blockzoo::BlockVector x = obj.zero_point();
  const double r = cfg.radius;
  const int agent = 1;
  const int qi = obj.block_dims[agent - 1];
  int q_total = 0;
  for (int qq : obj.block_dims) q_total += qq;

  auto local = [&](blockzoo::Rng& rng) {
    const Eigen::VectorXd xi = obj.sample_noise(rng);
    const Eigen::VectorXd u = blockzoo::sample_unit_sphere(qi, rng);
    blockzoo::BlockVector p = x;
    p.set_block(agent, Eigen::VectorXd(x.block(agent) + r * u));
    return Eigen::VectorXd(blockzoo::one_point_gradient(
        obj.local_observation(agent, p, xi), u, qi, r));
  };
  auto global = [&](blockzoo::Rng& rng) {
    const Eigen::VectorXd xi = obj.sample_noise(rng);
    const Eigen::VectorXd z = blockzoo::sample_unit_sphere(q_total, rng);
    blockzoo::BlockVector p = x;
    int off = 0;
    double h = 0.0;
    for (int j = 1; j <= obj.n_agents; ++j) {
      p.set_block(j, Eigen::VectorXd(x.block(j) +
                                     r * z.segment(off, obj.block_dims[j - 1])));
      off += obj.block_dims[j - 1];
    }
    for (int j = 1; j <= obj.n_agents; ++j) h += obj.local_observation(j, p, xi);
    h *= 0.5;  // every chain edge shows up in exactly two local costs
    return Eigen::VectorXd((double(q_total) / r) * h *
                           z.segment(0, qi));  // agent 1 block
  };

  const auto rep_l = blockzoo::mc_covariance(local, draws, seed, 1);
  const auto rep_g = blockzoo::mc_covariance(global, draws, seed, 2);
  const auto gap = blockzoo::covariance_gap(rep_l, rep_g, 0.0);
  json out{{"local", rep_l.to_json()},
           {"global", rep_g.to_json()},
           {"gap", gap.to_json()}};
  std::cout << out.dump(2) << "\n";
  if (!g.out.empty()) blockzoo::save_json_file(g.out, out);
  return 0;
}

int run_advise(const GlobalArgs& g) {
  if (g.config.empty()) throw ConfigError("advise requires --config");
  const json j = blockzoo::load_json_file(g.config);
  if (!j.contains("advisor")) throw ConfigError("config needs an 'advisor' section");
  const json a = j.at("advisor");
  blockzoo::AdvisorInput in;
  try {
    in.epsilon = a.at("epsilon").get<double>();
    in.alpha = a.at("alpha").get<double>();
    in.gamma_conf = a.at("gamma").get<double>();
    in.nu = a.at("nu").get<double>();
    in.phi0 = a.at("phi0").get<double>();
    in.lambda0 = a.at("lambda0").get<double>();
    in.rho0 = a.at("rho0").get<double>();
    in.c = a.at("c").get<double>();
    in.f_x0 = a.at("f_x0").get<double>();
    in.f0_x0 = a.at("f0_x0").get<double>();
    in.N0 = a.at("N0").get<int>();
    in.q_plus = a.at("q_plus").get<int>();
    if (a.contains("r_minus")) in.r_minus = a.at("r_minus").get<double>();
    if (a.contains("T0")) in.T0 = a.at("T0").get<int>();
    if (a.contains("eps_bar")) in.eps_bar = a.at("eps_bar").get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("advisor section: ") + e.what());
  }
  blockzoo::AdvisorOutput outp;
  try {
    outp = blockzoo::advise_parameters(in);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  json out{{"iterations", outp.iterations},
           {"step_size", outp.step_size},
           {"radius_cap", outp.radius_cap},
           {"gradient_bound", outp.gradient_bound},
           {"failure_probability", outp.failure_probability},
           {"w_cap_eta", outp.w_cap_eta},
           {"w_cap_rho_coeff", outp.w_cap_rho_coeff}};
  if (outp.w_cap_window_coeff) out["w_cap_window_coeff"] = *outp.w_cap_window_coeff;
  if (outp.step_size_window_cap)
    out["step_size_window_cap"] = *outp.step_size_window_cap;
  std::cout << out.dump(2) << "\n";
  if (!g.out.empty()) blockzoo::save_json_file(g.out, out);
  return 0;
}

int run_oracle(const GlobalArgs& g, const std::string& gain_file) {
  blockzoo::ExperimentConfig cfg = resolve_config(g, "formation");
  const blockzoo::PreparedLqr p = blockzoo::prepare_lqr(cfg);
  blockzoo::DistributedGain gain = p.scenario.k0;
  if (!gain_file.empty())
    gain = blockzoo::gain_from_json(blockzoo::load_json_file(gain_file));
  json out;
  out["stable"] = blockzoo::is_schur_stable(p.scenario.system, gain);
  if (out["stable"].get<bool>()) {
    out["cost"] = blockzoo::exact_cost(p.scenario.system, gain);
    const blockzoo::DistributedGain grad =
        blockzoo::exact_gradient(p.scenario.system, gain);
    out["gradient_norm"] = grad.vec().norm();
  }
  const blockzoo::CentralizedOptimum opt =
      blockzoo::centralized_optimum(p.scenario.system);
  out["optimal_cost"] = opt.cost;
  out["system"] = blockzoo::system_to_json(p.scenario.system, p.scenario.leaders);
  std::cout << out.dump(2) << "\n";
  if (!g.out.empty()) blockzoo::save_json_file(g.out, out);
  return 0;
}

int run_report(const GlobalArgs& g, const std::string& dir_arg) {
  const std::string dir = !dir_arg.empty() ? dir_arg : g.out;
  if (dir.empty()) throw ConfigError("report needs a directory (--out or argument)");
  const json rep = blockzoo::report_summary(dir, std::cout);
  blockzoo::save_json_file(dir + "/report.json", rep);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed zeroth-order block-coordinate optimization toolkit"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--config", g.config, "JSON config file");
  auto* seed_opt = app.add_option("--seed", g.seed, "master seed");
  app.add_option("--out", g.out, "output directory or file");
  app.add_option("--trials", g.trials, "trial / seed / draw count");

  std::string graph_file, gain_file, report_dir;
  auto* c_cluster = app.add_subcommand("cluster", "non-adjacent clustering of a graph");
  c_cluster->add_option("graph", graph_file, "graph file")->required();
  auto* c_learn = app.add_subcommand("learn", "generic ZOO on built-in objectives");
  auto* c_lqr = app.add_subcommand("lqr", "asynchronous distributed LQR learning");
  auto* c_base = app.add_subcommand("baseline", "centralized one-point baseline");
  auto* c_var = app.add_subcommand("variance", "estimator covariance diagnostics");
  auto* c_adv = app.add_subcommand("advise", "step-size / radius / horizon advisor");
  auto* c_orc = app.add_subcommand("oracle", "exact cost, gradient, and optimum");
  c_orc->add_option("--gain", gain_file, "gain checkpoint JSON");
  auto* c_rep = app.add_subcommand("report", "summarize an artifact directory");
  c_rep->add_option("dir", report_dir, "artifact directory");

  // Let "--config"/"--seed"/"--out"/"--trials" appear after the subcommand name.
  for (CLI::App* sub : app.get_subcommands(nullptr)) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);
  g.seed_set = seed_opt->count() > 0;

  try {
    if (c_cluster->parsed()) return run_cluster(g, graph_file);
    if (c_learn->parsed()) return run_experiment_cmd(g, "chain", "");
    if (c_lqr->parsed()) return run_experiment_cmd(g, "formation", "distributed");
    if (c_base->parsed()) return run_experiment_cmd(g, "formation", "baseline");
    if (c_var->parsed()) return run_variance(g);
    if (c_adv->parsed()) return run_advise(g);
    if (c_orc->parsed()) return run_oracle(g, gain_file);
    if (c_rep->parsed()) return run_report(g, report_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
