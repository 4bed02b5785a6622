#ifndef BLOCKZOO_ZOO_HPP
#define BLOCKZOO_ZOO_HPP

#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "blockzoo/block_vector.hpp"
#include "blockzoo/graph.hpp"
#include "blockzoo/objective.hpp"
#include "blockzoo/rng.hpp"
#include "blockzoo/schedule.hpp"

namespace blockzoo {

/// One-point gradient estimate: (q_i / r_i) * h * u.
inline Eigen::VectorXd one_point_gradient(double h_value, const Eigen::VectorXd& u,
                                          int q_i, double r_i) {
  if (r_i <= 0.0) throw std::invalid_argument("one_point_gradient: r_i must be > 0");
  return (double(q_i) / r_i) * h_value * u;
}

/// Extrapolated point x + w (x - x_prev).
inline Eigen::VectorXd extrapolate(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& x_prev, double w) {
  if (x.size() != x_prev.size())
    throw std::invalid_argument("extrapolate: dimension mismatch");
  return x + w * (x - x_prev);
}

/// Caps on the extrapolation weight. The step-size-cube-root and cluster-size
/// caps are always applied when rho0 > 0; the window cap needs T0 >= 2 and
/// eps_bar > 0.
inline double effective_weight(double w_base, double delta_norm, double eta,
                               int n_cluster_agents, double rho0, int T0 = 0,
                               double eps_bar = 0.0) {
  if (delta_norm <= 0.0) return 0.0;
  double w = w_base;
  if (rho0 > 0.0) {
    const double cap18 =
        std::min(std::pow(eta, 1.5), rho0 / (2.0 * std::sqrt(double(n_cluster_agents)))) /
        delta_norm;
    w = std::min(w, cap18);
  }
  if (T0 >= 2 && eps_bar > 0.0) {
    const double cap19 = eps_bar / (2.0 * (T0 - 1) * n_cluster_agents * delta_norm);
    w = std::min(w, cap19);
  }
  return w;
}

/// Cap parameters for the extrapolation weight; disabled (all zero) means the
/// base weight is used as-is (still zero on a block's first update).
struct WeightCapPolicy {
  bool enabled = false;
  double rho0 = 0.0;
  int T0 = 0;
  double eps_bar = 0.0;
};

struct ZooConfig {
  double step_size = 0.0;       // eta
  std::vector<double> radii;    // r_i per agent
  double w_base = 0.0;          // extrapolation base weight in [0,1)
  WeightCapPolicy caps;
  long iterations = 0;          // T
  double guard_threshold = 1e8; // clamp for observation blow-up
};

struct IterationRecord {
  long iter = 0;
  int cluster = 0;
  double f_exact = std::numeric_limits<double>::quiet_NaN();
  double grad_sq_active = std::numeric_limits<double>::quiet_NaN();
  bool guarded = false;
  std::uint64_t seed_counter = 0;
  // per active agent: (agent id, ||g_i||)
  std::vector<std::pair<int, double>> estimate_norms;
};

struct RunTrace {
  std::vector<IterationRecord> records;
  BlockVector final_point;
  long guard_count = 0;

  void write_csv(std::ostream& out) const {
    out << "iter,cluster,f_exact,grad_sq_active,guarded,seed_counter\n";
    out.precision(17);
    for (const auto& r : records) {
      out << r.iter << "," << r.cluster << "," << r.f_exact << ","
          << r.grad_sq_active << "," << (r.guarded ? 1 : 0) << ","
          << r.seed_counter << "\n";
    }
  }
};

/// Thread cap: BLOCKZOO_THREADS if set, otherwise 1.
inline int configured_threads() {
  if (const char* env = std::getenv("BLOCKZOO_THREADS")) {
    const int t = std::atoi(env);
    if (t >= 1) return t;
  }
  return 1;
}

namespace detail {

/// Runs fn(i) for each index in [0, count), split over up to n_threads
/// threads. Each index writes disjoint state, so the result is identical to
/// the sequential order.
template <typename Fn>
void parallel_indices(int count, int n_threads, Fn&& fn) {
  if (n_threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  const int workers = std::min(n_threads, count);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      for (int i = w; i < count; i += workers) fn(i);
    });
  }
  for (auto& t : threads) t.join();
}

}  // namespace detail

/// Asynchronous zeroth-order block-coordinate descent. At step k one cluster
/// is active; each of its agents independently draws a sphere sample,
/// observes its local cost at the extrapolated, perturbed point (against the
/// pre-update state of everyone else), and takes a one-point gradient step.
/// All randomness is drawn from streams keyed by (seed, agent, iteration), so
/// traces are bit-identical regardless of intra-cluster parallelism.
inline RunTrace run_async_zoo(const NetworkedObjective& obj,
                              const Clustering& clustering,
                              const UpdateSchedule& sched, const ZooConfig& cfg,
                              const BlockVector& x0, std::uint64_t seed,
                              int n_threads = configured_threads()) {
  if (!validate_clustering(obj.graph, clustering).valid())
    throw std::invalid_argument("run_async_zoo: invalid clustering");
  if (sched.length() != cfg.iterations)
    throw std::invalid_argument("run_async_zoo: schedule length != iterations");
  if (int(cfg.radii.size()) != obj.n_agents)
    throw std::invalid_argument("run_async_zoo: radii size mismatch");
  if (x0.dims() != obj.block_dims)
    throw std::invalid_argument("run_async_zoo: x0 block dims mismatch");
  if (cfg.step_size < 0.0) throw std::invalid_argument("run_async_zoo: eta < 0");

  constexpr std::uint64_t kNoiseStream = 0;  // agent ids start at 1

  BlockVector x = x0;
  // Previous value of each block before its last update; empty until the
  // block has been updated once (extrapolation weight treated as 0).
  std::vector<bool> has_prev(obj.n_agents, false);
  BlockVector x_prev = x0;

  RunTrace trace;
  trace.records.reserve(cfg.iterations);

  for (long k = 0; k < cfg.iterations; ++k) {
    const int zk = sched.order[k];
    if (zk < 1 || zk > clustering.size())
      throw std::invalid_argument("run_async_zoo: schedule index out of range");
    const std::vector<int>& active = clustering.clusters[zk - 1];

    Rng noise_rng = Rng::stream(seed, kNoiseStream, std::uint64_t(k));
    const Eigen::VectorXd xi =
        obj.noise_dim > 0 ? obj.sample_noise(noise_rng) : Eigen::VectorXd();

    IterationRecord rec;
    rec.iter = k;
    rec.cluster = zk;
    rec.seed_counter = noise_rng.draws();
    rec.estimate_norms.resize(active.size());

    if (obj.has_oracle()) {
      rec.f_exact = obj.exact_value(x);
      const BlockVector grad = obj.exact_gradient(x);
      double gsq = 0.0;
      for (int i : active) gsq += grad.block(i).squaredNorm();
      rec.grad_sq_active = gsq;
    }

    struct AgentResult {
      Eigen::VectorXd new_block;
      Eigen::VectorXd old_block;
      double g_norm = 0.0;
      bool guarded = false;
      std::uint64_t draws = 0;
    };
    std::vector<AgentResult> results(active.size());

    detail::parallel_indices(int(active.size()), n_threads, [&](int idx) {
      const int i = active[idx];
      const int qi = obj.block_dims[i - 1];
      const double ri = cfg.radii[i - 1];
      Rng rng_i = Rng::stream(seed, std::uint64_t(i), std::uint64_t(k));

      double w = 0.0;
      if (has_prev[i - 1] && cfg.w_base > 0.0) {
        const double delta = (x.block(i) - x_prev.block(i)).norm();
        w = cfg.caps.enabled
                ? effective_weight(cfg.w_base, delta, cfg.step_size, int(active.size()),
                                   cfg.caps.rho0, cfg.caps.T0, cfg.caps.eps_bar)
                : (delta > 0.0 ? cfg.w_base : 0.0);
      }
      const Eigen::VectorXd x_hat =
          has_prev[i - 1] ? extrapolate(x.block(i), x_prev.block(i), w) : x.block(i);

      const Eigen::VectorXd u = sample_unit_sphere(qi, rng_i);
      BlockVector probe = x;  // x_{-i} stays at the pre-update state
      probe.set_block(i, Eigen::VectorXd(x_hat + ri * u));
      double h = obj.local_observation(i, probe, xi);
      bool guarded = false;
      if (!(h <= cfg.guard_threshold)) {  // also catches NaN
        h = cfg.guard_threshold;
        guarded = true;
      }
      const Eigen::VectorXd g = one_point_gradient(h, u, qi, ri);

      results[idx].old_block = x.block(i);
      results[idx].new_block = x_hat - cfg.step_size * g;
      results[idx].g_norm = g.norm();
      results[idx].guarded = guarded;
      results[idx].draws = rng_i.draws();
    });

    for (size_t idx = 0; idx < active.size(); ++idx) {
      const int i = active[idx];
      x_prev.set_block(i, results[idx].old_block);
      x.set_block(i, results[idx].new_block);
      has_prev[i - 1] = true;
      rec.estimate_norms[idx] = {i, results[idx].g_norm};
      rec.guarded = rec.guarded || results[idx].guarded;
      rec.seed_counter += results[idx].draws;
    }
    if (rec.guarded) ++trace.guard_count;
    trace.records.push_back(std::move(rec));
  }

  trace.final_point = x;
  return trace;
}

}  // namespace blockzoo

#endif  // BLOCKZOO_ZOO_HPP
