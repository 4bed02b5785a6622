#ifndef BLOCKZOO_DIAGNOSTICS_HPP
#define BLOCKZOO_DIAGNOSTICS_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "blockzoo/objective.hpp"
#include "blockzoo/rng.hpp"
#include "blockzoo/zoo.hpp"

namespace blockzoo {

// ---------------------------------------------------------------------------
// Monte-Carlo moments
// ---------------------------------------------------------------------------

/// One draw of a gradient estimator plus the randomness that produced it.
struct EstimatorSample {
  Eigen::VectorXd estimate;
  std::string kind;           // "local" or "global"
  Eigen::VectorXd direction;  // u_i or z
  Eigen::VectorXd noise;      // xi (may be empty)
};

struct CovarianceReport {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  double trace = 0.0;
  long samples = 0;
  Eigen::VectorXd se_mean;  // per-coordinate standard error of the mean
  double se_trace = 0.0;    // standard error of the trace estimate

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["samples"] = samples;
    j["trace"] = trace;
    j["se_trace"] = se_trace;
    j["mean"] = std::vector<double>(mean.data(), mean.data() + mean.size());
    j["se_mean"] = std::vector<double>(se_mean.data(), se_mean.data() + se_mean.size());
    return j;
  }
};

namespace detail {

/// Kahan-compensated accumulator for a fixed-size vector.
struct KahanVec {
  Eigen::VectorXd sum, comp;
  explicit KahanVec(long n)
      : sum(Eigen::VectorXd::Zero(n)), comp(Eigen::VectorXd::Zero(n)) {}
  void add(const Eigen::VectorXd& v) {
    for (long i = 0; i < v.size(); ++i) {
      const double y = v[i] - comp[i];
      const double t = sum[i] + y;
      comp[i] = (t - sum[i]) - y;
      sum[i] = t;
    }
  }
  void merge(const KahanVec& o) { add(o.sum); add(Eigen::VectorXd(-o.comp)); }
};

struct KahanScalar {
  double sum = 0.0, comp = 0.0;
  void add(double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

}  // namespace detail

/// Sample mean/covariance of an estimator over M i.i.d. draws. The sampler is
/// called with a counter-keyed RNG per draw, so draws are independent of
/// thread count and the two passes (mean, then covariance) see the same
/// randomness. Reduction uses compensated summation merged in thread order.
inline CovarianceReport mc_covariance(
    const std::function<Eigen::VectorXd(Rng&)>& sampler, long M,
    std::uint64_t seed, std::uint64_t stream = 1,
    int n_threads = configured_threads()) {
  if (M < 2) throw std::invalid_argument("mc_covariance: need M >= 2 draws");

  Rng probe = Rng::stream(seed, stream, 0);
  const Eigen::VectorXd first = sampler(probe);
  const long q = first.size();

  const int workers = std::max(1, int(std::min<long>(n_threads, M)));
  std::vector<detail::KahanVec> mean_parts(workers, detail::KahanVec(q));

  detail::parallel_indices(workers, workers, [&](int w) {
    for (long j = w; j < M; j += workers) {
      Rng rng = Rng::stream(seed, stream, std::uint64_t(j));
      mean_parts[w].add(sampler(rng));
    }
  });
  detail::KahanVec mean_acc(q);
  for (const auto& p : mean_parts) mean_acc.merge(p);
  const Eigen::VectorXd mean = mean_acc.sum / double(M);

  std::vector<detail::KahanVec> cov_parts(workers, detail::KahanVec(q * q));
  std::vector<detail::KahanScalar> tr2_parts(workers);  // sum of ||d||^4
  detail::parallel_indices(workers, workers, [&](int w) {
    for (long j = w; j < M; j += workers) {
      Rng rng = Rng::stream(seed, stream, std::uint64_t(j));
      const Eigen::VectorXd d = sampler(rng) - mean;
      const Eigen::MatrixXd outer = d * d.transpose();
      cov_parts[w].add(Eigen::Map<const Eigen::VectorXd>(outer.data(), q * q));
      const double s = d.squaredNorm();
      tr2_parts[w].add(s * s);
    }
  });
  detail::KahanVec cov_acc(q * q);
  detail::KahanScalar tr2_acc;
  for (const auto& p : cov_parts) cov_acc.merge(p);
  for (const auto& p : tr2_parts) tr2_acc.add(p.sum);

  CovarianceReport rep;
  rep.samples = M;
  rep.mean = mean;
  rep.covariance =
      Eigen::Map<const Eigen::MatrixXd>(cov_acc.sum.data(), q, q) / double(M - 1);
  rep.covariance = 0.5 * (rep.covariance + rep.covariance.transpose()).eval();
  rep.trace = rep.covariance.trace();
  rep.se_mean = (rep.covariance.diagonal() / double(M)).cwiseSqrt();
  // Var of per-draw ||d||^2 gives the band on the trace estimate.
  const double mean_tr = rep.trace * double(M - 1) / double(M);
  const double var_tr =
      std::max(0.0, tr2_acc.sum / double(M) - mean_tr * mean_tr);
  rep.se_trace = std::sqrt(var_tr / double(M));
  return rep;
}

// ---------------------------------------------------------------------------
// Local-vs-global estimator covariance gap
// ---------------------------------------------------------------------------

struct CovarianceGapReport {
  double empirical_gap = 0.0;   // trace(Cov global) - trace(Cov local)
  double predicted_gap = 0.0;   // caller-supplied leading term
  double ratio = 0.0;           // empirical / predicted (0 when predicted = 0)
  double se_gap = 0.0;          // combined standard error
  double significance = 0.0;    // gap / se, in sigmas
  double min_gap_eigenvalue = 0.0;

  nlohmann::json to_json() const {
    return nlohmann::json{{"empirical_gap", empirical_gap},
                          {"predicted_gap", predicted_gap},
                          {"ratio", ratio},
                          {"se_gap", se_gap},
                          {"significance_sigma", significance},
                          {"min_gap_eigenvalue", min_gap_eigenvalue}};
  }
};

inline CovarianceGapReport covariance_gap(const CovarianceReport& local,
                                          const CovarianceReport& global,
                                          double predicted_leading_term) {
  if (local.mean.size() != global.mean.size())
    throw std::invalid_argument("covariance_gap: block dimension mismatch");
  CovarianceGapReport rep;
  rep.empirical_gap = global.trace - local.trace;
  rep.predicted_gap = predicted_leading_term;
  rep.ratio = predicted_leading_term != 0.0
                  ? rep.empirical_gap / predicted_leading_term
                  : 0.0;
  rep.se_gap = std::hypot(local.se_trace, global.se_trace);
  rep.significance = rep.se_gap > 0.0 ? rep.empirical_gap / rep.se_gap : 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(global.covariance -
                                                    local.covariance);
  rep.min_gap_eigenvalue = es.eigenvalues().minCoeff();
  return rep;
}

// ---------------------------------------------------------------------------
// Finite-difference oracle
// ---------------------------------------------------------------------------

inline Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h) {
  if (h <= 0.0) throw std::invalid_argument("finite_difference_gradient: h > 0");
  Eigen::VectorXd g(x.size());
  for (long j = 0; j < x.size(); ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    g[j] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Bias audit (smoothing bias of the one-point estimator)
// ---------------------------------------------------------------------------

struct BiasAuditReport {
  int agent = 0;
  double radius = 0.0;
  long samples = 0;
  double bias_norm = 0.0;   // || MC mean of g_i - grad_i f(x) ||
  double bound = 0.0;       // phi_x * r_i
  double band = 0.0;        // 3 * combined standard error of the mean
  bool pass = false;

  nlohmann::json to_json() const {
    return nlohmann::json{{"agent", agent},   {"radius", radius},
                          {"samples", samples}, {"bias_norm", bias_norm},
                          {"bound", bound},   {"band_3sigma", band},
                          {"pass", pass}};
  }
};

/// Checks || E[g_i] - grad_{x_i} f(x) || <= phi_x r_i + 3 sigma_MC, where g_i
/// is the one-point local estimator at smoothing radius r_i.
inline BiasAuditReport bias_audit(const NetworkedObjective& obj,
                                  const BlockVector& x, int agent, double r_i,
                                  long M, std::uint64_t seed, double phi_x,
                                  int n_threads = configured_threads()) {
  if (M < 10000) throw std::invalid_argument("bias_audit: M >= 10^4 required");
  if (!obj.has_oracle())
    throw std::invalid_argument("bias_audit: objective needs an exact oracle");
  const int qi = obj.block_dims[agent - 1];

  auto sampler = [&](Rng& rng) {
    const Eigen::VectorXd xi =
        obj.noise_dim > 0 ? obj.sample_noise(rng) : Eigen::VectorXd();
    const Eigen::VectorXd u = sample_unit_sphere(qi, rng);
    BlockVector probe = x;
    probe.set_block(agent, Eigen::VectorXd(x.block(agent) + r_i * u));
    return Eigen::VectorXd(one_point_gradient(
        obj.local_observation(agent, probe, xi), u, qi, r_i));
  };
  const CovarianceReport mc = mc_covariance(sampler, M, seed, 1, n_threads);

  BiasAuditReport rep;
  rep.agent = agent;
  rep.radius = r_i;
  rep.samples = M;
  rep.bias_norm = (mc.mean - obj.exact_gradient(x).block(agent)).norm();
  rep.bound = phi_x * r_i;
  rep.band = 3.0 * mc.se_mean.norm();
  rep.pass = rep.bias_norm <= rep.bound + rep.band;
  return rep;
}

// ---------------------------------------------------------------------------
// Gradient-bound audit over a run trace
// ---------------------------------------------------------------------------

struct GradientBoundConstants {
  std::vector<int> block_dims;       // q_i
  std::vector<double> radii;         // r_i
  std::vector<double> alpha_f_x0;    // alpha_i f_i(x^0)
  double c = 0.0;
  double lambda0 = 0.0;
  double rho0 = 0.0;

  double bound(int agent) const {
    return (double(block_dims[agent - 1]) / radii[agent - 1]) * c *
           (alpha_f_x0[agent - 1] + lambda0 * rho0);
  }
};

struct GradientBoundViolation {
  long iter = 0;
  int agent = 0;
  double norm = 0.0;
  double bound = 0.0;
};

struct GradientBoundReport {
  long checked = 0;
  std::vector<GradientBoundViolation> violations;
  bool pass() const { return violations.empty(); }

  nlohmann::json to_json() const {
    nlohmann::json v = nlohmann::json::array();
    for (const auto& x : violations)
      v.push_back({{"iter", x.iter}, {"agent", x.agent}, {"norm", x.norm},
                   {"bound", x.bound}});
    return nlohmann::json{{"checked", checked}, {"pass", pass()},
                          {"violations", v}};
  }
};

/// Verifies every recorded per-agent estimate norm against
/// (q_i/r_i) c (alpha_i f_i(x^0) + lambda0 rho0).
inline GradientBoundReport gradient_bound_audit(const RunTrace& trace,
                                                const GradientBoundConstants& k) {
  GradientBoundReport rep;
  for (const auto& rec : trace.records) {
    for (const auto& [agent, norm] : rec.estimate_norms) {
      ++rep.checked;
      const double b = k.bound(agent);
      if (norm > b)
        rep.violations.push_back({rec.iter, agent, norm, b});
    }
  }
  return rep;
}

inline void write_text_report(std::ostream& out, const std::string& title,
                              const nlohmann::json& j) {
  out << "== " << title << " ==\n";
  for (auto it = j.begin(); it != j.end(); ++it)
    out << "  " << it.key() << ": " << it.value().dump() << "\n";
}

}  // namespace blockzoo

#endif  // BLOCKZOO_DIAGNOSTICS_HPP
