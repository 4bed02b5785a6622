#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "blockzoo/lqr.hpp"
#include "blockzoo/scenario.hpp"
#include "helpers.hpp"

using namespace blockzoo;
using namespace blockzoo::testing;

namespace {

struct Chain3Setup {
  MasLqrSystem sys;
  DirectedGraph learning{1, true};
  std::vector<LocalCostSpec> specs;
  Clustering clustering;

  explicit Chain3Setup(double gamma = 1.0) : sys(chain3_system(gamma)) {
    learning = build_learning_graph(sys.cost_graph(), sys.sensing);
    specs = build_local_costs(sys, learning);
    clustering.clusters = {{1, 3}, {2}};
    REQUIRE(validate_clustering(learning, clustering).valid());
  }
};

ZooConfig chain3_config(long iterations, double eta, double radius) {
  ZooConfig cfg;
  cfg.step_size = eta;
  cfg.radii = std::vector<double>(3, radius);
  cfg.iterations = iterations;
  return cfg;
}

}  // namespace

TEST_CASE("zero step size leaves the gain and the trace flat") {
  Chain3Setup s;
  const ZooConfig cfg = chain3_config(6, 0.0, 0.1);
  const DistributedGain k0 = chain3_gain(s.sys, 0.6, 0.7, 0.5);
  const LqrRunResult res =
      run_async_lqr(s.sys, s.specs, s.learning, s.clustering,
                    make_cyclic_schedule(2, 6), cfg, k0, 11);
  REQUIRE((res.final_gain.vec() - k0.vec()).norm() == 0.0);
  for (const auto& rec : res.trace.records)
    REQUIRE(rec.f_exact == Catch::Approx(res.trace.records[0].f_exact));
}

TEST_CASE("updates stay on the sensing sparsity pattern") {
  const FormationScenario sc = build_formation_scenario(4);
  const auto specs = build_local_costs(sc.system, sc.learning);
  Rng crng(7);
  const Clustering c = min_cluster_trials(sc.learning, 20, crng);
  ZooConfig cfg;
  cfg.step_size = 1e-7;
  cfg.radii = std::vector<double>(4, 0.05);
  cfg.iterations = 12;
  const LqrRunResult res =
      run_async_lqr(sc.system, specs, sc.learning, c,
                    make_cyclic_schedule(c.size(), 12), cfg, sc.k0, 3);
  const Eigen::MatrixXd dense = res.final_gain.assemble();
  // Off-pattern entries must be exactly zero bits, not merely small.
  for (int i = 1; i <= 4; ++i) {
    const auto& nbrs = res.final_gain.sensing_neighbors(i);
    for (int j = 1; j <= 4; ++j) {
      if (std::find(nbrs.begin(), nbrs.end(), j) != nbrs.end()) continue;
      REQUIRE(dense.block((i - 1) * 2, (j - 1) * 4, 2, 4).lpNorm<Eigen::Infinity>() ==
              0.0);
    }
  }
}

TEST_CASE("an unstable initial gain is rejected") {
  Chain3Setup s;
  const ZooConfig cfg = chain3_config(4, 1e-6, 0.1);
  const DistributedGain k0 = chain3_gain(s.sys, 0.0, 0.0, 0.0);  // a = 1.1
  REQUIRE_THROWS_AS(run_async_lqr(s.sys, s.specs, s.learning, s.clustering,
                                  make_cyclic_schedule(2, 4), cfg, k0, 1),
                    std::invalid_argument);
}

TEST_CASE("mismatched schedule or radii are rejected") {
  Chain3Setup s;
  const DistributedGain k0 = chain3_gain(s.sys, 0.6, 0.7, 0.5);
  ZooConfig cfg = chain3_config(4, 1e-6, 0.1);
  REQUIRE_THROWS_AS(run_async_lqr(s.sys, s.specs, s.learning, s.clustering,
                                  make_cyclic_schedule(2, 5), cfg, k0, 1),
                    std::invalid_argument);
  cfg.radii.pop_back();
  REQUIRE_THROWS_AS(run_async_lqr(s.sys, s.specs, s.learning, s.clustering,
                                  make_cyclic_schedule(2, 4), cfg, k0, 1),
                    std::invalid_argument);
}

TEST_CASE("learning runs are deterministic and thread-count independent") {
  Chain3Setup s;
  const ZooConfig cfg = chain3_config(30, 1e-5, 0.1);
  const DistributedGain k0 = chain3_gain(s.sys, 0.6, 0.7, 0.5);
  const UpdateSchedule sched = make_cyclic_schedule(2, 30);
  const LqrRunResult r1 =
      run_async_lqr(s.sys, s.specs, s.learning, s.clustering, sched, cfg, k0, 42, {}, 1);
  const LqrRunResult r2 =
      run_async_lqr(s.sys, s.specs, s.learning, s.clustering, sched, cfg, k0, 42, {}, 4);
  REQUIRE(r1.final_gain.vec() == r2.final_gain.vec());
  std::ostringstream c1, c2;
  r1.trace.write_csv(c1);
  r2.trace.write_csv(c2);
  REQUIRE(c1.str() == c2.str());

  const LqrRunResult r3 =
      run_async_lqr(s.sys, s.specs, s.learning, s.clustering, sched, cfg, k0, 43, {}, 1);
  REQUIRE((r3.final_gain.vec() - r1.final_gain.vec()).norm() > 0.0);
}

TEST_CASE("inactive agents hold their gain blocks") {
  Chain3Setup s;
  const DistributedGain k0 = chain3_gain(s.sys, 0.6, 0.7, 0.5);
  // One iteration activates cluster 1 = {1, 3}; agent 2 must not move.
  ZooConfig cfg = chain3_config(1, 1e-4, 0.1);
  const LqrRunResult res =
      run_async_lqr(s.sys, s.specs, s.learning, s.clustering,
                    make_cyclic_schedule(2, 1), cfg, k0, 5);
  REQUIRE(res.final_gain.vec_block(2) == k0.vec_block(2));
  REQUIRE((res.final_gain.vec_block(1) - k0.vec_block(1)).norm() > 0.0);
  REQUIRE((res.final_gain.vec_block(3) - k0.vec_block(3)).norm() > 0.0);
}

TEST_CASE("learning decreases the exact cost on the three-agent chain") {
  Chain3Setup s(0.9);
  const DistributedGain k0 = chain3_gain(s.sys, 0.3, 0.3, 0.3);
  const long T = 2000;
  ZooConfig cfg = chain3_config(T, 2e-5, 0.1);
  LqrRunOptions opt;
  opt.rollout_horizon = 60;
  const LqrRunResult res =
      run_async_lqr(s.sys, s.specs, s.learning, s.clustering,
                    make_cyclic_schedule(2, T), cfg, k0, 2024, opt);
  auto window_mean = [&](long lo, long hi) {
    double sum = 0.0;
    for (long k = lo; k < hi; ++k) sum += res.trace.records[k].f_exact;
    return sum / double(hi - lo);
  };
  const double head = window_mean(0, 100);
  const double tail = window_mean(T - 100, T);
  INFO("head mean " << head << " tail mean " << tail);
  REQUIRE(tail < 0.9 * head);
  REQUIRE(res.trace.guard_count == 0);
}

TEST_CASE("repeat-variance mode records per-iteration lookahead bands") {
  Chain3Setup s;
  const DistributedGain k0 = chain3_gain(s.sys, 0.6, 0.7, 0.5);
  ZooConfig cfg = chain3_config(10, 1e-5, 0.1);
  LqrRunOptions opt;
  opt.n_repeat = 4;
  const LqrRunResult res =
      run_async_lqr(s.sys, s.specs, s.learning, s.clustering,
                    make_cyclic_schedule(2, 10), cfg, k0, 8, opt);
  REQUIRE(res.lookahead_min.size() == 10);
  REQUIRE(res.lookahead_max.size() == 10);
  for (size_t k = 0; k < 10; ++k) {
    REQUIRE(res.lookahead_min[k] <= res.lookahead_max[k]);
    REQUIRE(res.lookahead_min[k] > 0.0);
  }
  // Without repeats the bands stay empty.
  const LqrRunResult plain =
      run_async_lqr(s.sys, s.specs, s.learning, s.clustering,
                    make_cyclic_schedule(2, 10), cfg, k0, 8);
  REQUIRE(plain.lookahead_min.empty());
}

TEST_CASE("guard clamps runaway rollouts and counts them") {
  Chain3Setup s;
  const DistributedGain k0 = chain3_gain(s.sys, 0.6, 0.7, 0.5);
  ZooConfig cfg = chain3_config(4, 0.0, 0.1);
  cfg.guard_threshold = 1e-6;  // everything trips the guard
  const LqrRunResult res =
      run_async_lqr(s.sys, s.specs, s.learning, s.clustering,
                    make_cyclic_schedule(2, 4), cfg, k0, 9);
  REQUIRE(res.trace.guard_count == 4);
  for (const auto& rec : res.trace.records) REQUIRE(rec.guarded);
}

TEST_CASE("centralized baseline decreases the cost on a scalar plant") {
  const MasLqrSystem sys = scalar_system(0.9, 1.0, 1.0, 1.0, 1.0);
  const DistributedGain k0 = scalar_gain(sys, 0.1);
  ZooConfig cfg;
  cfg.step_size = 5e-4;
  cfg.radii = {0.05};
  cfg.iterations = 800;
  LqrRunOptions opt;
  opt.rollout_horizon = 80;
  const LqrRunResult res = centralized_zoo_baseline(sys, cfg, k0, 4, 77, opt);
  auto window_mean = [&](long lo, long hi) {
    double sum = 0.0;
    for (long k = lo; k < hi; ++k) sum += res.trace.records[k].f_exact;
    return sum / double(hi - lo);
  };
  REQUIRE(window_mean(700, 800) < 0.9 * window_mean(0, 100));
}

TEST_CASE("baseline validates its inputs") {
  const MasLqrSystem sys = scalar_system(1.1, 1.0, 1.0, 1.0, 1.0);
  ZooConfig cfg;
  cfg.step_size = 1e-4;
  cfg.radii = {0.1};
  cfg.iterations = 2;
  REQUIRE_THROWS_AS(centralized_zoo_baseline(sys, cfg, scalar_gain(sys, 0.0), 1, 1),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(centralized_zoo_baseline(sys, cfg, scalar_gain(sys, 0.6), 0, 1),
                    std::invalid_argument);
}

TEST_CASE("baseline is deterministic in the seed") {
  const MasLqrSystem sys = scalar_system(0.9, 1.0, 1.0, 1.0, 1.0);
  const DistributedGain k0 = scalar_gain(sys, 0.5);
  ZooConfig cfg;
  cfg.step_size = 1e-4;
  cfg.radii = {0.05};
  cfg.iterations = 25;
  const LqrRunResult a = centralized_zoo_baseline(sys, cfg, k0, 3, 5);
  const LqrRunResult b = centralized_zoo_baseline(sys, cfg, k0, 3, 5);
  const LqrRunResult c = centralized_zoo_baseline(sys, cfg, k0, 3, 6);
  REQUIRE(a.final_gain.vec() == b.final_gain.vec());
  REQUIRE((a.final_gain.vec() - c.final_gain.vec()).norm() > 0.0);
}
