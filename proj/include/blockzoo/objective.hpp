#ifndef BLOCKZOO_OBJECTIVE_HPP
#define BLOCKZOO_OBJECTIVE_HPP

#include <functional>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "blockzoo/block_vector.hpp"
#include "blockzoo/graph.hpp"
#include "blockzoo/rng.hpp"

namespace blockzoo {

/// Networked stochastic objective: f(x) = E[h(x,xi)] decomposed into
/// per-agent nonnegative local observations h_i that depend only on the
/// blocks of x indexed by agent i's neighborhood in `graph`.
///
/// The exact oracle (value + gradient) is optional and used only for
/// verification; the optimizer path consumes `local_observation` alone.
struct NetworkedObjective {
  int n_agents = 0;
  std::vector<int> block_dims;  // q_i
  DirectedGraph graph{1, true};

  int noise_dim = 0;
  std::function<Eigen::VectorXd(Rng&)> sample_noise;
  std::function<double(int agent, const BlockVector& x, const Eigen::VectorXd& xi)>
      local_observation;

  /// Assumption-2 constant: h_i <= c * f_i almost surely.
  double observation_bound_c = 0.0;

  std::function<double(const BlockVector&)> exact_value;
  std::function<BlockVector(const BlockVector&)> exact_gradient;

  bool has_oracle() const { return bool(exact_value) && bool(exact_gradient); }

  BlockVector zero_point() const { return BlockVector(block_dims); }
};

/// Displacement-coupled objective over an undirected edge list:
///   h = sum_{(i,j)} ||x_i - x_j + xi_ij - d_ij||^2,
///   h_i = sum over edges incident to i.
/// Edge noise components are i.i.d. truncated N(0, sigma^2) at +-3 sigma,
/// so observations are bounded and Assumption 2 holds with finite c.
/// The chain version with scalar agents is the Example-1 test problem.
inline NetworkedObjective make_displacement_objective(
    int n_agents, const std::vector<int>& dims,
    const std::vector<std::pair<int, int>>& edges,
    const std::vector<Eigen::VectorXd>& offsets, double noise_sigma) {
  if (int(dims.size()) != n_agents)
    throw std::invalid_argument("make_displacement_objective: dims size mismatch");
  if (offsets.size() != edges.size())
    throw std::invalid_argument("make_displacement_objective: offsets size mismatch");
  for (size_t e = 0; e < edges.size(); ++e) {
    const auto [i, j] = edges[e];
    if (i < 1 || i > n_agents || j < 1 || j > n_agents || i == j)
      throw std::invalid_argument("make_displacement_objective: bad edge");
    if (dims[i - 1] != dims[j - 1] || offsets[e].size() != dims[i - 1])
      throw std::invalid_argument("make_displacement_objective: edge dim mismatch");
  }

  NetworkedObjective obj;
  obj.n_agents = n_agents;
  obj.block_dims = dims;
  obj.graph = DirectedGraph(n_agents, true);
  for (auto [i, j] : edges) obj.graph.add_undirected_edge(i, j);

  const int d = dims.empty() ? 0 : dims[0];
  obj.noise_dim = int(edges.size()) * d;
  const double trunc_var = noise_sigma * noise_sigma * truncated_normal_variance(3.0);

  obj.sample_noise = [n = obj.noise_dim, noise_sigma](Rng& rng) {
    return Eigen::VectorXd(noise_sigma * rng.truncated_normal_vector(n));
  };

  auto edge_residual = [edges, offsets, d](size_t e, const BlockVector& x,
                                           const Eigen::VectorXd& xi) {
    const auto [i, j] = edges[e];
    return Eigen::VectorXd(x.block(i) - x.block(j) + xi.segment(long(e) * d, d) -
                           offsets[e]);
  };

  obj.local_observation = [edges, edge_residual](int agent, const BlockVector& x,
                                                 const Eigen::VectorXd& xi) {
    double h = 0.0;
    for (size_t e = 0; e < edges.size(); ++e) {
      if (edges[e].first == agent || edges[e].second == agent)
        h += edge_residual(e, x, xi).squaredNorm();
    }
    return h;
  };

  // E[||x_i - x_j + xi - d||^2] = ||x_i - x_j - d||^2 + dim * Var(xi component).
  obj.exact_value = [edges, offsets, d, trunc_var](const BlockVector& x) {
    double f = 0.0;
    for (size_t e = 0; e < edges.size(); ++e) {
      const auto [i, j] = edges[e];
      f += (x.block(i) - x.block(j) - offsets[e]).squaredNorm() + d * trunc_var;
    }
    return f;
  };

  obj.exact_gradient = [n_agents, dims, edges, offsets](const BlockVector& x) {
    BlockVector g(dims);
    for (size_t e = 0; e < edges.size(); ++e) {
      const auto [i, j] = edges[e];
      const Eigen::VectorXd r = x.block(i) - x.block(j) - offsets[e];
      g.set_block(i, Eigen::VectorXd(g.block(i) + 2.0 * r));
      g.set_block(j, Eigen::VectorXd(g.block(j) - 2.0 * r));
    }
    return g;
  };

  // h_i <= c f_i a.s.: (r + b)^2 <= 2 r^2 + 2 b^2 per edge with |xi| <= b
  // componentwise, and f_i >= d * trunc_var per edge. b = 3 sigma.
  const double b2 = 9.0 * noise_sigma * noise_sigma;
  obj.observation_bound_c =
      noise_sigma > 0.0
          ? 2.0 + 2.0 * b2 / (noise_sigma * noise_sigma *
                              truncated_normal_variance(3.0))
          : 1.0;
  return obj;
}

/// Scalar-agent chain 1-2-...-n with common displacement target.
inline NetworkedObjective make_displacement_chain(int n_agents, double target,
                                                  double noise_sigma) {
  std::vector<int> dims(n_agents, 1);
  std::vector<std::pair<int, int>> edges;
  std::vector<Eigen::VectorXd> offsets;
  for (int i = 1; i < n_agents; ++i) {
    edges.emplace_back(i, i + 1);
    offsets.push_back(Eigen::VectorXd::Constant(1, target));
  }
  return make_displacement_objective(n_agents, dims, edges, offsets, noise_sigma);
}

}  // namespace blockzoo

#endif  // BLOCKZOO_OBJECTIVE_HPP
