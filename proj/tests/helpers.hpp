#ifndef BLOCKZOO_TEST_HELPERS_HPP
#define BLOCKZOO_TEST_HELPERS_HPP

#include "blockzoo/lqr.hpp"
#include "blockzoo/rng.hpp"

namespace blockzoo::testing {

/// Single-agent scalar plant with E[x0^2] = 1.
inline MasLqrSystem scalar_system(double a, double b, double q, double r,
                                  double gamma = 1.0) {
  MasLqrSystem sys;
  sys.n_agents = 1;
  sys.state_dim = 1;
  sys.input_dim = 1;
  sys.discount = gamma;
  sys.A = {Eigen::MatrixXd::Constant(1, 1, a)};
  sys.B = {Eigen::MatrixXd::Constant(1, 1, b)};
  sys.G = Eigen::MatrixXd::Constant(1, 1, 1.0);
  sys.Qtilde = Eigen::MatrixXd::Constant(1, 1, q);
  sys.R = {Eigen::MatrixXd::Constant(1, 1, r)};
  sys.sensing = DirectedGraph(1, true);
  sys.init_state_sigma = 1.0 / std::sqrt(truncated_normal_variance(3.0));
  return sys;
}

inline DistributedGain scalar_gain(const MasLqrSystem& sys, double k) {
  DistributedGain g(sys.sensing, 1, 1);
  g.set_compact_block(1, Eigen::MatrixXd::Constant(1, 1, k));
  return g;
}

/// Three scalar agents on a cost chain 1-2-3, sensing self-loops only, each
/// plant open-loop unstable (a = 1.1) with b = 1, Q from the chain Laplacian
/// plus identity, R = I.
inline MasLqrSystem chain3_system(double gamma = 1.0) {
  MasLqrSystem sys;
  sys.n_agents = 3;
  sys.state_dim = 1;
  sys.input_dim = 1;
  sys.discount = gamma;
  for (int i = 0; i < 3; ++i) {
    sys.A.push_back(Eigen::MatrixXd::Constant(1, 1, 1.1));
    sys.B.push_back(Eigen::MatrixXd::Constant(1, 1, 1.0));
    sys.R.push_back(Eigen::MatrixXd::Constant(1, 1, 1.0));
  }
  sys.G.resize(3, 3);
  sys.G << 2, -1, 0, -1, 3, -1, 0, -1, 2;
  sys.Qtilde = Eigen::MatrixXd::Ones(3, 3);
  sys.sensing = DirectedGraph(3, true);
  return sys;
}

inline DistributedGain chain3_gain(const MasLqrSystem& sys, double k1, double k2,
                                   double k3) {
  DistributedGain g(sys.sensing, 1, 1);
  g.set_compact_block(1, Eigen::MatrixXd::Constant(1, 1, k1));
  g.set_compact_block(2, Eigen::MatrixXd::Constant(1, 1, k2));
  g.set_compact_block(3, Eigen::MatrixXd::Constant(1, 1, k3));
  return g;
}

/// Random stable gain on the sensing pattern by rejection sampling around a
/// stabilizing center.
inline DistributedGain random_stable_gain(const MasLqrSystem& sys,
                                          const DistributedGain& center,
                                          double spread, Rng& rng) {
  DistributedGain g = center;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Eigen::VectorXd v = center.vec();
    for (long j = 0; j < v.size(); ++j)
      v[j] += spread * (2.0 * rng.uniform01() - 1.0);
    g.set_vec(v);
    if (is_schur_stable(sys, g)) return g;
  }
  throw std::runtime_error("random_stable_gain: rejection sampling failed");
}

}  // namespace blockzoo::testing

#endif  // BLOCKZOO_TEST_HELPERS_HPP
