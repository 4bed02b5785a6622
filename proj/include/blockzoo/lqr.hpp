#ifndef BLOCKZOO_LQR_HPP
#define BLOCKZOO_LQR_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "blockzoo/graph.hpp"
#include "blockzoo/rng.hpp"
#include "blockzoo/zoo.hpp"

namespace blockzoo {

// ---------------------------------------------------------------------------
// Linear-algebra helpers
// ---------------------------------------------------------------------------

inline double spectral_radius(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// X = sum_{t>=0} M^t' C M^t by doubling:
///   S <- S + M' S M,  M <- M^2
/// converges quadratically for spectral radius < 1. Residual is checked
/// against X = C + M' X M.
inline Eigen::MatrixXd lyapunov_sum(const Eigen::MatrixXd& m,
                                    const Eigen::MatrixXd& c,
                                    double tol = 1e-13, int max_doublings = 200) {
  Eigen::MatrixXd s = c;
  Eigen::MatrixXd mk = m;
  bool converged = false;
  for (int it = 0; it < max_doublings; ++it) {
    const Eigen::MatrixXd update = mk.transpose() * s * mk;
    s += update;
    if (update.norm() <= tol * (1.0 + s.norm())) {
      converged = true;
      break;
    }
    mk = mk * mk;
  }
  if (!converged || !s.allFinite())
    throw std::runtime_error("lyapunov_sum: series did not converge "
                             "(unstable matrix?)");
  const double resid = (s - c - m.transpose() * s * m).norm();
  if (!(resid <= 1e-12 * (1.0 + s.norm())))
    throw std::runtime_error("lyapunov_sum: residual " + std::to_string(resid) +
                             " did not converge (unstable matrix?)");
  return s;
}

/// X = sum_{t>=0} M^t C M^t' (the transposed-recursion variant, used for the
/// discounted state-correlation matrix).
inline Eigen::MatrixXd lyapunov_sum_transposed(const Eigen::MatrixXd& m,
                                               const Eigen::MatrixXd& c,
                                               double tol = 1e-13) {
  return lyapunov_sum(m.transpose(), c, tol);
}

// ---------------------------------------------------------------------------
// System and gain types
// ---------------------------------------------------------------------------

/// Multi-agent discounted LQR model with decoupled block dynamics
/// x_i(t+1) = A_i x_i(t) + B_i u_i(t) and quadratic cost built from the
/// blockwise (Khatri-Rao) product Q = G (.) Qtilde plus block-diagonal R.
struct MasLqrSystem {
  int n_agents = 0;   // N
  int state_dim = 0;  // n per agent
  int input_dim = 0;  // m per agent

  std::vector<Eigen::MatrixXd> A;  // n x n blocks
  std::vector<Eigen::MatrixXd> B;  // n x m blocks
  double discount = 1.0;           // gamma in (0, 1]

  Eigen::MatrixXd G;       // N x N, PSD, nonzeros define the cost graph
  Eigen::MatrixXd Qtilde;  // nN x nN, PSD
  std::vector<Eigen::MatrixXd> R;  // m x m, PD

  DirectedGraph sensing{1, true};

  /// Componentwise std-dev of the truncated-normal initial state.
  double init_state_sigma = 1.0;

  int total_state_dim() const { return n_agents * state_dim; }
  int total_input_dim() const { return n_agents * input_dim; }

  Eigen::MatrixXd state_matrix() const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(total_state_dim(), total_state_dim());
    for (int i = 0; i < n_agents; ++i)
      a.block(i * state_dim, i * state_dim, state_dim, state_dim) = A[i];
    return a;
  }

  Eigen::MatrixXd input_matrix() const {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(total_state_dim(), total_input_dim());
    for (int i = 0; i < n_agents; ++i)
      b.block(i * state_dim, i * input_dim, state_dim, input_dim) = B[i];
    return b;
  }

  /// Q = G (.) Qtilde: block (i,j) equals G(i,j) * Qtilde block (i,j).
  Eigen::MatrixXd state_cost() const { return khatri_rao_mask(G); }

  Eigen::MatrixXd khatri_rao_mask(const Eigen::MatrixXd& mask) const {
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(total_state_dim(), total_state_dim());
    for (int i = 0; i < n_agents; ++i)
      for (int j = 0; j < n_agents; ++j)
        q.block(i * state_dim, j * state_dim, state_dim, state_dim) =
            mask(i, j) *
            Qtilde.block(i * state_dim, j * state_dim, state_dim, state_dim);
    return q;
  }

  Eigen::MatrixXd input_cost() const {
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(total_input_dim(), total_input_dim());
    for (int i = 0; i < n_agents; ++i)
      r.block(i * input_dim, i * input_dim, input_dim, input_dim) = R[i];
    return r;
  }

  /// Cost graph: undirected graph of nonzero G entries, with self-loops.
  DirectedGraph cost_graph() const {
    DirectedGraph g(n_agents, true);
    for (int i = 1; i <= n_agents; ++i)
      for (int j = 1; j <= n_agents; ++j)
        if (std::abs(G(i - 1, j - 1)) > 0.0) g.add_edge(i, j);
    return g;
  }

  /// Second moment of the initial state (i.i.d. truncated normal at +-3).
  Eigen::MatrixXd sigma_x() const {
    const double v = init_state_sigma * init_state_sigma * truncated_normal_variance(3.0);
    return v * Eigen::MatrixXd::Identity(total_state_dim(), total_state_dim());
  }

  Eigen::VectorXd sample_initial_state(Rng& rng) const {
    return init_state_sigma * rng.truncated_normal_vector(total_state_dim());
  }

  /// Bound on lambda_max(x0 x0') = ||x0||^2 over the truncated support.
  double initial_state_sq_bound() const {
    const double b = 3.0 * init_state_sigma;
    return b * b * total_state_dim();
  }

  void validate() const {
    if (n_agents < 1 || state_dim < 1 || input_dim < 1)
      throw std::invalid_argument("MasLqrSystem: bad dimensions");
    if (int(A.size()) != n_agents || int(B.size()) != n_agents ||
        int(R.size()) != n_agents)
      throw std::invalid_argument("MasLqrSystem: block count mismatch");
    if (discount <= 0.0 || discount > 1.0)
      throw std::invalid_argument("MasLqrSystem: discount must be in (0,1]");
    if (G.rows() != n_agents || G.cols() != n_agents)
      throw std::invalid_argument("MasLqrSystem: G must be N x N");
    if (!G.isApprox(G.transpose(), 1e-12))
      throw std::invalid_argument("MasLqrSystem: G must be symmetric");
    if (sensing.size() != n_agents || !sensing.has_self_loops())
      throw std::invalid_argument("MasLqrSystem: sensing graph must have self-loops");
  }
};

/// Gain restricted to the sensing sparsity pattern: agent i's compact block
/// K~_i maps the stacked states of its sorted sensing neighborhood to u_i.
/// The vectorized form stacks vec(K~_i) (column-major) per agent.
class DistributedGain {
 public:
  DistributedGain() = default;

  DistributedGain(const DirectedGraph& sensing, int input_dim, int state_dim)
      : n_(sensing.size()), m_(input_dim), nstate_(state_dim) {
    nbrs_.resize(n_);
    blocks_.resize(n_);
    for (int i = 1; i <= n_; ++i) {
      const std::set<int> in = sensing.in(i);
      nbrs_[i - 1].assign(in.begin(), in.end());  // sorted
      blocks_[i - 1] =
          Eigen::MatrixXd::Zero(m_, nstate_ * long(nbrs_[i - 1].size()));
    }
  }

  int n_agents() const { return n_; }
  int input_dim() const { return m_; }
  int state_dim() const { return nstate_; }

  const std::vector<int>& sensing_neighbors(int i) const { return nbrs_[i - 1]; }

  /// q_i = m * n * |N_S^i|
  int block_dim(int i) const { return int(blocks_[i - 1].size()); }

  int total_dim() const {
    int q = 0;
    for (const auto& b : blocks_) q += int(b.size());
    return q;
  }

  const Eigen::MatrixXd& compact_block(int i) const { return blocks_[i - 1]; }

  void set_compact_block(int i, const Eigen::MatrixXd& k) {
    if (k.rows() != blocks_[i - 1].rows() || k.cols() != blocks_[i - 1].cols())
      throw std::invalid_argument("DistributedGain: compact block shape mismatch");
    blocks_[i - 1] = k;
  }

  Eigen::VectorXd vec_block(int i) const {
    return Eigen::Map<const Eigen::VectorXd>(blocks_[i - 1].data(),
                                             blocks_[i - 1].size());
  }

  void set_vec_block(int i, const Eigen::VectorXd& v) {
    if (v.size() != blocks_[i - 1].size())
      throw std::invalid_argument("DistributedGain: vec block size mismatch");
    blocks_[i - 1] = Eigen::Map<const Eigen::MatrixXd>(
        v.data(), blocks_[i - 1].rows(), blocks_[i - 1].cols());
  }

  Eigen::VectorXd vec() const {
    Eigen::VectorXd v(total_dim());
    int off = 0;
    for (int i = 1; i <= n_; ++i) {
      v.segment(off, block_dim(i)) = vec_block(i);
      off += block_dim(i);
    }
    return v;
  }

  void set_vec(const Eigen::VectorXd& v) {
    if (v.size() != total_dim())
      throw std::invalid_argument("DistributedGain: vec size mismatch");
    int off = 0;
    for (int i = 1; i <= n_; ++i) {
      set_vec_block(i, Eigen::VectorXd(v.segment(off, block_dim(i))));
      off += block_dim(i);
    }
  }

  /// Assembled mN x nN gain with zeros off the sensing pattern.
  Eigen::MatrixXd assemble() const {
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(long(m_) * n_, long(nstate_) * n_);
    for (int i = 1; i <= n_; ++i) {
      for (size_t c = 0; c < nbrs_[i - 1].size(); ++c) {
        const int j = nbrs_[i - 1][c];
        k.block((i - 1) * m_, (j - 1) * nstate_, m_, nstate_) =
            blocks_[i - 1].middleCols(long(c) * nstate_, nstate_);
      }
    }
    return k;
  }

  /// Projects a dense mN x nN matrix onto the pattern (used for oracle
  /// gradients and the centralized baseline update).
  DistributedGain projected(const Eigen::MatrixXd& dense) const {
    DistributedGain out = *this;
    for (int i = 1; i <= n_; ++i) {
      Eigen::MatrixXd blk(m_, nstate_ * long(nbrs_[i - 1].size()));
      for (size_t c = 0; c < nbrs_[i - 1].size(); ++c) {
        const int j = nbrs_[i - 1][c];
        blk.middleCols(long(c) * nstate_, nstate_) =
            dense.block((i - 1) * m_, (j - 1) * nstate_, m_, nstate_);
      }
      out.blocks_[i - 1] = blk;
    }
    return out;
  }

  /// Whether a dense matrix already lies in the pattern space K_d.
  bool pattern_contains(const Eigen::MatrixXd& dense, double tol = 0.0) const {
    return (projected(dense).assemble() - dense).lpNorm<Eigen::Infinity>() <= tol;
  }

 private:
  int n_ = 0, m_ = 0, nstate_ = 0;
  std::vector<std::vector<int>> nbrs_;
  std::vector<Eigen::MatrixXd> blocks_;
};

// ---------------------------------------------------------------------------
// Model-based oracles (verification and baselines only; the learning path in
// run_async_lqr touches nothing below except rollout observations)
// ---------------------------------------------------------------------------

inline Eigen::MatrixXd assemble_closed_loop(const MasLqrSystem& sys,
                                            const DistributedGain& gain) {
  const Eigen::MatrixXd k = gain.assemble();
  if (k.rows() != sys.total_input_dim() || k.cols() != sys.total_state_dim())
    throw std::invalid_argument("assemble_closed_loop: dimension mismatch");
  return sys.state_matrix() - sys.input_matrix() * k;
}

/// Membership in K_s: spectral radius of sqrt(gamma) (A - B K) < 1.
inline bool is_schur_stable(const MasLqrSystem& sys, const DistributedGain& gain) {
  const double rho =
      std::sqrt(sys.discount) * spectral_radius(assemble_closed_loop(sys, gain));
  return rho < 1.0 - 1e-12;
}

/// Exact discounted cost J = <P, Sigma_x> with P solving the discounted
/// Lyapunov equation for the given state/input cost pair.
inline double exact_cost(const MasLqrSystem& sys, const DistributedGain& gain,
                         const Eigen::MatrixXd& state_cost,
                         const Eigen::MatrixXd& input_cost) {
  if (!is_schur_stable(sys, gain))
    throw std::runtime_error("exact_cost: gain is not in K_s");
  const Eigen::MatrixXd k = gain.assemble();
  const Eigen::MatrixXd m =
      std::sqrt(sys.discount) * assemble_closed_loop(sys, gain);
  const Eigen::MatrixXd c = state_cost + k.transpose() * input_cost * k;
  const Eigen::MatrixXd p = lyapunov_sum(m, c);
  return (p * sys.sigma_x()).trace();
}

inline double exact_cost(const MasLqrSystem& sys, const DistributedGain& gain) {
  return exact_cost(sys, gain, sys.state_cost(), sys.input_cost());
}

/// Exact policy gradient restricted to the sensing pattern:
///   grad = 2 (Rc K - Bb' P (Ab - Bb K)) Sigma_K,  Ab = sqrt(g) A, Bb = sqrt(g) B
/// projected onto K_d. Used only as a test oracle.
inline DistributedGain exact_gradient(const MasLqrSystem& sys,
                                      const DistributedGain& gain,
                                      const Eigen::MatrixXd& state_cost,
                                      const Eigen::MatrixXd& input_cost) {
  if (!is_schur_stable(sys, gain))
    throw std::runtime_error("exact_gradient: gain is not in K_s");
  const double sg = std::sqrt(sys.discount);
  const Eigen::MatrixXd k = gain.assemble();
  const Eigen::MatrixXd ab = sg * sys.state_matrix();
  const Eigen::MatrixXd bb = sg * sys.input_matrix();
  const Eigen::MatrixXd m = ab - bb * k;
  const Eigen::MatrixXd p =
      lyapunov_sum(m, Eigen::MatrixXd(state_cost + k.transpose() * input_cost * k));
  const Eigen::MatrixXd sigma_k = lyapunov_sum_transposed(m, sys.sigma_x());
  const Eigen::MatrixXd dense =
      2.0 * (input_cost * k - bb.transpose() * p * m) * sigma_k;
  return gain.projected(dense);
}

inline DistributedGain exact_gradient(const MasLqrSystem& sys,
                                      const DistributedGain& gain) {
  return exact_gradient(sys, gain, sys.state_cost(), sys.input_cost());
}

/// Dense centralized optimum by discounted Riccati fixed-point iteration on
/// (sqrt(g) A, sqrt(g) B). Returns the dense gain and its cost <P*, Sigma_x>.
struct CentralizedOptimum {
  Eigen::MatrixXd gain;  // dense mN x nN
  double cost = 0.0;
  Eigen::MatrixXd value_matrix;
};

inline CentralizedOptimum centralized_optimum(const MasLqrSystem& sys,
                                              double tol = 1e-12,
                                              long max_iter = 100000) {
  const double sg = std::sqrt(sys.discount);
  const Eigen::MatrixXd a = sg * sys.state_matrix();
  const Eigen::MatrixXd b = sg * sys.input_matrix();
  const Eigen::MatrixXd q = sys.state_cost();
  const Eigen::MatrixXd r = sys.input_cost();

  Eigen::MatrixXd p = q;
  double resid = std::numeric_limits<double>::infinity();
  for (long it = 0; it < max_iter; ++it) {
    const Eigen::MatrixXd btp = b.transpose() * p;
    const Eigen::MatrixXd gain_k = (r + btp * b).ldlt().solve(btp * a);
    const Eigen::MatrixXd next =
        q + a.transpose() * p * a - a.transpose() * p * b * gain_k;
    resid = (next - p).norm();
    p = 0.5 * (next + next.transpose());  // enforce symmetry
    if (resid <= tol * (1.0 + p.norm())) {
      CentralizedOptimum out;
      const Eigen::MatrixXd btp2 = b.transpose() * p;
      out.gain = (r + btp2 * b).ldlt().solve(btp2 * a);
      out.cost = (p * sys.sigma_x()).trace();
      out.value_matrix = p;
      return out;
    }
  }
  throw std::runtime_error("centralized_optimum: Riccati residual " +
                           std::to_string(resid) + " after max iterations");
}

// ---------------------------------------------------------------------------
// Local cost construction
// ---------------------------------------------------------------------------

/// Masked copy of G on the principal submatrix indexed by
/// S_i = union of cost neighborhoods over the sensing reach set of i.
inline Eigen::MatrixXd solve_Mi(const Eigen::MatrixXd& G, const ReachSet& reach,
                                const DirectedGraph& cost_graph) {
  const int n = int(G.rows());
  if (cost_graph.size() != n)
    throw std::invalid_argument("solve_Mi: dimension mismatch");
  std::set<int> support;
  for (int j : reach.members)
    for (int k : cost_graph.out(j)) support.insert(k);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int j : support)
    for (int k : support) m(j - 1, k - 1) = G(j - 1, k - 1);

  // Post-hoc feasibility checks; failure indicates inconsistent graphs.
  for (int j : reach.members)
    for (int k : cost_graph.out(j))
      if (m(j - 1, k - 1) != G(j - 1, k - 1))
        throw std::runtime_error("solve_Mi: equality constraint violated");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw std::runtime_error("solve_Mi: result not PSD");
  return m;
}

/// Per-agent reduced cost data: mask M_i, full-size Qhat_i / Rhat_i, and the
/// reduced principal blocks Qbar_i / Rbar_i over the learning neighborhood.
struct LocalCostSpec {
  int agent = 0;
  std::vector<int> learn_nbrs;  // sorted N_L^i
  Eigen::MatrixXd M;            // N x N mask
  Eigen::MatrixXd Qhat;         // nN x nN = M (.) Qtilde
  Eigen::MatrixXd Rhat;         // mN x mN, R_j blocks for j in N_L^i
  Eigen::MatrixXd Qbar;         // reduced state-cost block
  Eigen::MatrixXd Rbar;         // reduced input-cost block

  Eigen::VectorXd restrict_state(const Eigen::VectorXd& x, int n) const {
    Eigen::VectorXd r(long(learn_nbrs.size()) * n);
    for (size_t c = 0; c < learn_nbrs.size(); ++c)
      r.segment(long(c) * n, n) = x.segment(long(learn_nbrs[c] - 1) * n, n);
    return r;
  }

  Eigen::VectorXd restrict_input(const Eigen::VectorXd& u, int m) const {
    Eigen::VectorXd r(long(learn_nbrs.size()) * m);
    for (size_t c = 0; c < learn_nbrs.size(); ++c)
      r.segment(long(c) * m, m) = u.segment(long(learn_nbrs[c] - 1) * m, m);
    return r;
  }

  /// Reduced quadratic stage cost; equals x'Qhat x + u'Rhat u on full vectors.
  double stage_cost(const Eigen::VectorXd& x_reduced,
                    const Eigen::VectorXd& u_reduced) const {
    return x_reduced.dot(Qbar * x_reduced) + u_reduced.dot(Rbar * u_reduced);
  }
};

inline std::vector<LocalCostSpec> build_local_costs(const MasLqrSystem& sys,
                                                    const DirectedGraph& learning) {
  if (learning.size() != sys.n_agents)
    throw std::invalid_argument("build_local_costs: learning graph size mismatch");
  const DirectedGraph cost = sys.cost_graph();
  const int n = sys.state_dim;
  const int m = sys.input_dim;

  std::vector<LocalCostSpec> specs;
  specs.reserve(sys.n_agents);
  for (int i = 1; i <= sys.n_agents; ++i) {
    LocalCostSpec spec;
    spec.agent = i;
    const std::set<int> nl = learning.in(i);
    spec.learn_nbrs.assign(nl.begin(), nl.end());

    spec.M = solve_Mi(sys.G, reachable_set(sys.sensing, i), cost);
    spec.Qhat = sys.khatri_rao_mask(spec.M);

    spec.Rhat = Eigen::MatrixXd::Zero(sys.total_input_dim(), sys.total_input_dim());
    for (int j : spec.learn_nbrs)
      spec.Rhat.block((j - 1) * m, (j - 1) * m, m, m) = sys.R[j - 1];

    const long nb = long(spec.learn_nbrs.size());
    spec.Qbar = Eigen::MatrixXd::Zero(nb * n, nb * n);
    for (long a = 0; a < nb; ++a)
      for (long b = 0; b < nb; ++b)
        spec.Qbar.block(a * n, b * n, n, n) = spec.Qhat.block(
            long(spec.learn_nbrs[a] - 1) * n, long(spec.learn_nbrs[b] - 1) * n, n, n);
    spec.Rbar = Eigen::MatrixXd::Zero(nb * m, nb * m);
    for (long a = 0; a < nb; ++a)
      spec.Rbar.block(a * m, a * m, m, m) = sys.R[spec.learn_nbrs[a] - 1];
    specs.push_back(std::move(spec));
  }
  return specs;
}

// ---------------------------------------------------------------------------
// Rollouts
// ---------------------------------------------------------------------------

struct RolloutResult {
  double value = 0.0;  // H_{i,T_J}
  bool diverged = false;
  double max_state_norm = 0.0;
};

/// Simulates x(t+1) = (A - B K) x(t) for T_J steps, accumulating the
/// discounted reduced local cost. The guard clamps (and flags) runaway
/// observations instead of aborting.
inline RolloutResult rollout_local_cost(const MasLqrSystem& sys,
                                        const Eigen::MatrixXd& gain_matrix,
                                        const Eigen::VectorXd& x0, long horizon,
                                        const LocalCostSpec& spec,
                                        double guard_threshold = 1e8) {
  if (horizon < 1) throw std::invalid_argument("rollout_local_cost: T_J >= 1");
  const Eigen::MatrixXd a = sys.state_matrix();
  const Eigen::MatrixXd b = sys.input_matrix();
  RolloutResult out;
  Eigen::VectorXd x = x0;
  double discount_t = 1.0;
  for (long t = 0; t < horizon; ++t) {
    out.max_state_norm = std::max(out.max_state_norm, x.norm());
    const Eigen::VectorXd u = -gain_matrix * x;
    out.value += discount_t * spec.stage_cost(spec.restrict_state(x, sys.state_dim),
                                              spec.restrict_input(u, sys.input_dim));
    if (!(out.value <= guard_threshold)) {
      out.value = guard_threshold;
      out.diverged = true;
      break;
    }
    x = a * x + b * u;
    discount_t *= sys.discount;
  }
  return out;
}

/// Global-cost rollout (x'Qx + u'Ru), used by the centralized baseline.
inline RolloutResult rollout_global_cost(const MasLqrSystem& sys,
                                         const Eigen::MatrixXd& gain_matrix,
                                         const Eigen::VectorXd& x0, long horizon,
                                         double guard_threshold = 1e8) {
  if (horizon < 1) throw std::invalid_argument("rollout_global_cost: T_J >= 1");
  const Eigen::MatrixXd q = sys.state_cost();
  const Eigen::MatrixXd r = sys.input_cost();
  const Eigen::MatrixXd a = sys.state_matrix();
  const Eigen::MatrixXd b = sys.input_matrix();
  RolloutResult out;
  Eigen::VectorXd x = x0;
  double discount_t = 1.0;
  for (long t = 0; t < horizon; ++t) {
    out.max_state_norm = std::max(out.max_state_norm, x.norm());
    const Eigen::VectorXd u = -gain_matrix * x;
    out.value += discount_t * (x.dot(q * x) + u.dot(r * u));
    if (!(out.value <= guard_threshold)) {
      out.value = guard_threshold;
      out.diverged = true;
      break;
    }
    x = a * x + b * u;
    discount_t *= sys.discount;
  }
  return out;
}

/// Horizon guaranteeing a truncation error of at most eps_prime:
///   T_J >= 1/(2 (1 - kappa0)) log(alpha_i J_i(K0) lam_max / (lam_min eps')).
inline long required_horizon(double eps_prime, double kappa0,
                             double alpha_i_J_i_K0, double x0_sq_bound,
                             double sigma_x_min_eig) {
  if (eps_prime <= 0.0) throw std::invalid_argument("required_horizon: eps' > 0");
  if (kappa0 <= 0.0 || kappa0 >= 1.0)
    throw std::invalid_argument("required_horizon: kappa0 must be in (0,1)");
  const double arg = alpha_i_J_i_K0 * x0_sq_bound / (sigma_x_min_eig * eps_prime);
  if (arg <= 1.0) return 1;
  // The tiny slack absorbs roundoff when the ratio lands on an exact integer.
  const long t =
      long(std::ceil(std::log(arg) / (2.0 * (1.0 - kappa0)) - 1e-12));
  return std::max<long>(1, t);
}

// ---------------------------------------------------------------------------
// Learning algorithms
// ---------------------------------------------------------------------------

struct LqrRunOptions {
  long rollout_horizon = 50;  // T_J
  bool record_exact_cost = true;
  bool record_exact_gradient = false;
  /// > 0 enables repeat-variance mode: this many independent gradient
  /// estimates per iteration; the update uses their mean and the trace gains
  /// per-iteration lookahead cost bands.
  int n_repeat = 0;
};

struct LqrRunResult {
  RunTrace trace;
  DistributedGain final_gain;
  std::vector<double> lookahead_min;  // filled in repeat-variance mode
  std::vector<double> lookahead_max;
};

/// Asynchronous distributed LQR learning. Per iteration one cluster of the
/// learning graph is active; each active agent perturbs its own vectorized
/// gain block on the sphere, rolls out the coupled system for T_J steps while
/// everyone else holds, observes its discounted local cost, and takes a
/// one-point gradient step. Model-based oracles are used only for trace
/// bookkeeping, never in the update path.
inline LqrRunResult run_async_lqr(const MasLqrSystem& sys,
                                  const std::vector<LocalCostSpec>& specs,
                                  const DirectedGraph& learning,
                                  const Clustering& clustering,
                                  const UpdateSchedule& sched, const ZooConfig& cfg,
                                  const DistributedGain& k0, std::uint64_t seed,
                                  const LqrRunOptions& opt = {},
                                  int n_threads = configured_threads()) {
  sys.validate();
  if (!validate_clustering(learning, clustering).valid())
    throw std::invalid_argument("run_async_lqr: invalid clustering for learning graph");
  if (sched.length() != cfg.iterations)
    throw std::invalid_argument("run_async_lqr: schedule length != iterations");
  if (int(cfg.radii.size()) != sys.n_agents)
    throw std::invalid_argument("run_async_lqr: radii size mismatch");
  if (int(specs.size()) != sys.n_agents)
    throw std::invalid_argument("run_async_lqr: local cost spec count mismatch");
  if (!is_schur_stable(sys, k0))
    throw std::invalid_argument("run_async_lqr: K0 is not in K_s");

  DistributedGain gain = k0;
  DistributedGain gain_prev = k0;
  std::vector<bool> has_prev(sys.n_agents, false);

  LqrRunResult result;
  result.trace.records.reserve(cfg.iterations);
  const int repeats = std::max(1, opt.n_repeat);
  const bool variance_mode = opt.n_repeat > 0;

  for (long k = 0; k < cfg.iterations; ++k) {
    const int zk = sched.order[k];
    const std::vector<int>& active = clustering.clusters[zk - 1];

    Rng x0_rng = Rng::stream(seed, 0, std::uint64_t(k));
    std::vector<Eigen::VectorXd> x0s(repeats);
    for (int j = 0; j < repeats; ++j) x0s[j] = sys.sample_initial_state(x0_rng);

    IterationRecord rec;
    rec.iter = k;
    rec.cluster = zk;
    rec.seed_counter = x0_rng.draws();
    rec.estimate_norms.resize(active.size());

    if (opt.record_exact_cost) rec.f_exact = exact_cost(sys, gain);
    if (opt.record_exact_gradient) {
      const DistributedGain grad = exact_gradient(sys, gain);
      double gsq = 0.0;
      for (int i : active) gsq += grad.vec_block(i).squaredNorm();
      rec.grad_sq_active = gsq;
    }

    const Eigen::MatrixXd base_gain_matrix = gain.assemble();

    struct AgentResult {
      Eigen::VectorXd new_block;
      Eigen::VectorXd old_block;
      // per repeat: the update each single estimate alone would produce
      std::vector<Eigen::VectorXd> repeat_blocks;
      double g_norm = 0.0;
      bool guarded = false;
      std::uint64_t draws = 0;
    };
    std::vector<AgentResult> results(active.size());

    detail::parallel_indices(int(active.size()), n_threads, [&](int idx) {
      const int i = active[idx];
      const int qi = gain.block_dim(i);
      const double ri = cfg.radii[i - 1];
      Rng rng_i = Rng::stream(seed, std::uint64_t(i), std::uint64_t(k));

      double w = 0.0;
      const Eigen::VectorXd ki = gain.vec_block(i);
      if (has_prev[i - 1] && cfg.w_base > 0.0) {
        const double delta = (ki - gain_prev.vec_block(i)).norm();
        w = cfg.caps.enabled
                ? effective_weight(cfg.w_base, delta, cfg.step_size, int(active.size()),
                                   cfg.caps.rho0, cfg.caps.T0, cfg.caps.eps_bar)
                : (delta > 0.0 ? cfg.w_base : 0.0);
      }
      const Eigen::VectorXd k_hat =
          has_prev[i - 1] ? extrapolate(ki, gain_prev.vec_block(i), w) : ki;

      Eigen::VectorXd g_mean = Eigen::VectorXd::Zero(qi);
      AgentResult& res = results[idx];
      res.repeat_blocks.resize(repeats);
      for (int j = 0; j < repeats; ++j) {
        const Eigen::VectorXd d = sample_unit_sphere(qi, rng_i);
        DistributedGain perturbed = gain;
        perturbed.set_vec_block(i, Eigen::VectorXd(k_hat + ri * d));
        const RolloutResult ro =
            rollout_local_cost(sys, perturbed.assemble(), x0s[j],
                               opt.rollout_horizon, specs[i - 1],
                               cfg.guard_threshold);
        res.guarded = res.guarded || ro.diverged;
        const Eigen::VectorXd g = one_point_gradient(ro.value, d, qi, ri);
        g_mean += g;
        res.repeat_blocks[j] = k_hat - cfg.step_size * g;
      }
      g_mean /= double(repeats);
      res.old_block = ki;
      res.new_block = k_hat - cfg.step_size * g_mean;
      res.g_norm = g_mean.norm();
      res.draws = rng_i.draws();
    });

    if (variance_mode) {
      // Lookahead reading of the band: cost of the controller each single
      // estimate set would produce (all active agents applying repeat j).
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < repeats; ++j) {
        DistributedGain look = gain;
        for (size_t idx = 0; idx < active.size(); ++idx)
          look.set_vec_block(active[idx], results[idx].repeat_blocks[j]);
        double cost = std::numeric_limits<double>::quiet_NaN();
        if (is_schur_stable(sys, look)) cost = exact_cost(sys, look);
        if (std::isfinite(cost)) {
          lo = std::min(lo, cost);
          hi = std::max(hi, cost);
        } else {
          hi = std::numeric_limits<double>::infinity();
        }
      }
      result.lookahead_min.push_back(lo);
      result.lookahead_max.push_back(hi);
    }

    for (size_t idx = 0; idx < active.size(); ++idx) {
      const int i = active[idx];
      gain_prev.set_vec_block(i, results[idx].old_block);
      gain.set_vec_block(i, results[idx].new_block);
      has_prev[i - 1] = true;
      rec.estimate_norms[idx] = {i, results[idx].g_norm};
      rec.guarded = rec.guarded || results[idx].guarded;
      rec.seed_counter += results[idx].draws;
    }
    if (rec.guarded) ++result.trace.guard_count;
    result.trace.records.push_back(std::move(rec));
  }

  result.final_gain = gain;
  result.trace.final_point = BlockVector::from_flat(gain.vec(), {gain.total_dim()});
  return result;
}

/// Centralized one-point baseline: perturbs the full vectorized gain with a
/// single sphere sample in R^q and averages n_avg global-cost estimates per
/// step. The update stays on the K_d pattern because the perturbation lives
/// in pattern coordinates.
inline LqrRunResult centralized_zoo_baseline(const MasLqrSystem& sys,
                                             const ZooConfig& cfg,
                                             const DistributedGain& k0, int n_avg,
                                             std::uint64_t seed,
                                             const LqrRunOptions& opt = {}) {
  sys.validate();
  if (n_avg < 1) throw std::invalid_argument("centralized_zoo_baseline: n_avg >= 1");
  if (!is_schur_stable(sys, k0))
    throw std::invalid_argument("centralized_zoo_baseline: K0 is not in K_s");
  if (cfg.radii.empty())
    throw std::invalid_argument("centralized_zoo_baseline: need a radius");
  const double r = cfg.radii[0];
  const int q = k0.total_dim();

  DistributedGain gain = k0;
  LqrRunResult result;
  result.trace.records.reserve(cfg.iterations);
  const bool variance_mode = opt.n_repeat > 0;

  for (long k = 0; k < cfg.iterations; ++k) {
    Rng x0_rng = Rng::stream(seed, 0, std::uint64_t(k));
    Rng dir_rng = Rng::stream(seed, 1, std::uint64_t(k));

    IterationRecord rec;
    rec.iter = k;
    rec.cluster = 1;
    if (opt.record_exact_cost) rec.f_exact = exact_cost(sys, gain);

    Eigen::VectorXd g_mean = Eigen::VectorXd::Zero(q);
    const Eigen::VectorXd vec_k = gain.vec();
    bool guarded = false;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < n_avg; ++j) {
      const Eigen::VectorXd x0 = sys.sample_initial_state(x0_rng);
      const Eigen::VectorXd z = sample_unit_sphere(q, dir_rng);
      DistributedGain perturbed = gain;
      perturbed.set_vec(Eigen::VectorXd(vec_k + r * z));
      const RolloutResult ro = rollout_global_cost(
          sys, perturbed.assemble(), x0, opt.rollout_horizon, cfg.guard_threshold);
      guarded = guarded || ro.diverged;
      const Eigen::VectorXd g = (double(q) / r) * ro.value * z;
      g_mean += g;
      if (variance_mode) {
        DistributedGain look = gain;
        look.set_vec(Eigen::VectorXd(vec_k - cfg.step_size * g));
        double cost = std::numeric_limits<double>::quiet_NaN();
        if (is_schur_stable(sys, look)) cost = exact_cost(sys, look);
        if (std::isfinite(cost)) {
          lo = std::min(lo, cost);
          hi = std::max(hi, cost);
        } else {
          hi = std::numeric_limits<double>::infinity();
        }
      }
    }
    g_mean /= double(n_avg);
    gain.set_vec(Eigen::VectorXd(vec_k - cfg.step_size * g_mean));

    if (variance_mode) {
      result.lookahead_min.push_back(lo);
      result.lookahead_max.push_back(hi);
    }
    rec.estimate_norms = {{0, g_mean.norm()}};
    rec.guarded = guarded;
    if (guarded) ++result.trace.guard_count;
    rec.seed_counter = x0_rng.draws() + dir_rng.draws();
    result.trace.records.push_back(std::move(rec));
  }
  result.final_gain = gain;
  result.trace.final_point = BlockVector::from_flat(gain.vec(), {gain.total_dim()});
  return result;
}

}  // namespace blockzoo

#endif  // BLOCKZOO_LQR_HPP
