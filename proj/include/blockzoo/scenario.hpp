#ifndef BLOCKZOO_SCENARIO_HPP
#define BLOCKZOO_SCENARIO_HPP

#include <deque>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "blockzoo/graph.hpp"
#include "blockzoo/lqr.hpp"

namespace blockzoo {

/// Formation-control learning problem: N planar robots with double-integrator
/// dynamics tracking target-relative coordinates, a ring-coupled quadratic
/// cost G = L + Lambda (graph Laplacian plus a leader anchor term), and a
/// pairwise sensing graph. All pieces are configurable; the defaults follow
/// the 10-robot study and replicate for larger N.
struct FormationScenario {
  MasLqrSystem system;
  DirectedGraph cost{1, true};
  DirectedGraph sensing{1, true};
  DirectedGraph learning{1, true};
  std::vector<int> leaders;
  DistributedGain k0;
};

/// True when every vertex is reachable from the leader set along sensing
/// edges (a spanning forest rooted in the leaders).
inline bool has_spanning_forest(const DirectedGraph& sensing,
                                const std::vector<int>& leaders) {
  std::set<int> seen;
  std::deque<int> queue;
  for (int l : leaders) {
    if (l < 1 || l > sensing.size()) return false;
    if (seen.insert(l).second) queue.push_back(l);
  }
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int w : sensing.out(v))
      if (seen.insert(w).second) queue.push_back(w);
  }
  return int(seen.size()) == sensing.size();
}

/// Builds the N-robot system. Empty edge lists select the defaults: cost ring
/// 1-2-...-N-1, sensing pairs (2k-1 -> 2k), leaders = odd ids. gamma is the
/// cost discount; theta scales the leader anchor Lambda.
inline FormationScenario build_formation_scenario(
    int n_robots, std::vector<std::pair<int, int>> cost_edges = {},
    std::vector<std::pair<int, int>> sensing_edges = {},
    std::vector<int> leaders = {}, double gamma = 0.99, double theta = 1.0) {
  if (n_robots < 2)
    throw std::invalid_argument("build_formation_scenario: need >= 2 robots");
  if (cost_edges.empty()) {
    for (int i = 1; i < n_robots; ++i) cost_edges.emplace_back(i, i + 1);
    if (n_robots > 2) cost_edges.emplace_back(n_robots, 1);
  }
  if (sensing_edges.empty()) {
    for (int i = 1; i + 1 <= n_robots; i += 2) sensing_edges.emplace_back(i, i + 1);
  }
  if (leaders.empty()) {
    for (int i = 1; i <= n_robots; i += 2) leaders.push_back(i);
  }
  if (leaders.empty())
    throw std::invalid_argument("build_formation_scenario: leaders nonempty");

  FormationScenario sc;
  sc.leaders = leaders;
  sc.cost = DirectedGraph(n_robots, true);
  for (auto [i, j] : cost_edges) sc.cost.add_undirected_edge(i, j);
  sc.sensing = DirectedGraph(n_robots, true);
  for (auto [i, j] : sensing_edges) sc.sensing.add_edge(i, j);
  if (!has_spanning_forest(sc.sensing, leaders))
    throw std::invalid_argument(
        "build_formation_scenario: sensing graph has no spanning forest from "
        "the leader set");
  sc.learning = build_learning_graph(sc.cost, sc.sensing);

  // G = L + Lambda: Laplacian of the cost graph plus theta on leader diagonals.
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n_robots, n_robots);
  for (int i = 1; i <= n_robots; ++i)
    for (int j : sc.cost.out(i))
      if (j != i) {
        g(i - 1, j - 1) = -1.0;
        g(i - 1, i - 1) += 1.0;
      }
  for (int l : leaders) g(l - 1, l - 1) += theta;

  MasLqrSystem& sys = sc.system;
  sys.n_agents = n_robots;
  sys.state_dim = 4;  // planar position + velocity
  sys.input_dim = 2;
  sys.discount = gamma;
  sys.G = g;
  sys.sensing = sc.sensing;

  const Eigen::Matrix2d id2 = Eigen::Matrix2d::Identity();
  for (int i = 1; i <= n_robots; ++i) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(4, 4);
    a.block(0, 2, 2, 2) = id2;  // r(t+1) = r(t) + v(t)
    sys.A.push_back(a);
    const double ci = double(i) / double(i + 1);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(4, 2);
    b.block(2, 0, 2, 2) = ci * id2;  // v(t+1) = v(t) + C_i u
    sys.B.push_back(b);
    sys.R.push_back(Eigen::MatrixXd::Identity(2, 2));
  }

  // State cost (L + Lambda) expanded to 4x4 state blocks: Qtilde block (i,j)
  // is I_4 everywhere so the blockwise product gives G(i,j) I_4.
  sys.Qtilde = Eigen::MatrixXd::Zero(4 * n_robots, 4 * n_robots);
  for (int i = 0; i < n_robots; ++i)
    for (int j = 0; j < n_robots; ++j)
      sys.Qtilde.block(4 * i, 4 * j, 4, 4) = Eigen::MatrixXd::Identity(4, 4);
  sys.validate();

  // Stabilizing decentralized start: Ktilde = (I2, 1.5 I2) on each robot's
  // own state, zero on sensed neighbors.
  Eigen::MatrixXd ktilde(2, 4);
  ktilde << id2, 1.5 * id2;
  sc.k0 = DistributedGain(sc.sensing, 2, 4);
  for (int i = 1; i <= n_robots; ++i) {
    const auto& nbrs = sc.k0.sensing_neighbors(i);
    Eigen::MatrixXd blk = Eigen::MatrixXd::Zero(2, 4 * long(nbrs.size()));
    for (size_t c = 0; c < nbrs.size(); ++c)
      if (nbrs[c] == i) blk.middleCols(4 * long(c), 4) = ktilde;
    sc.k0.set_compact_block(i, blk);
  }
  return sc;
}

}  // namespace blockzoo

#endif  // BLOCKZOO_SCENARIO_HPP
