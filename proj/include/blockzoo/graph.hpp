#ifndef BLOCKZOO_GRAPH_HPP
#define BLOCKZOO_GRAPH_HPP

#include <algorithm>
#include <deque>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "blockzoo/rng.hpp"

namespace blockzoo {

/// Directed graph on vertices 1..n. Self-loops are tracked explicitly; the
/// self-loop constructor flag forces (i,i) for every vertex, which is how the
/// sensing and learning graphs are built.
class DirectedGraph {
 public:
  DirectedGraph(int n_vertices, bool self_loops)
      : n_(n_vertices), self_loops_(self_loops), out_(n_vertices) {
    if (n_vertices < 1)
      throw std::invalid_argument("DirectedGraph: need at least one vertex");
    if (self_loops) {
      for (int i = 1; i <= n_; ++i) out_[i - 1].insert(i);
    }
  }

  int size() const { return n_; }
  bool has_self_loops() const { return self_loops_; }

  void add_edge(int i, int j) {
    check_vertex(i);
    check_vertex(j);
    out_[i - 1].insert(j);
  }

  void add_undirected_edge(int i, int j) {
    add_edge(i, j);
    add_edge(j, i);
  }

  bool has_edge(int i, int j) const {
    check_vertex(i);
    check_vertex(j);
    return out_[i - 1].count(j) > 0;
  }

  const std::set<int>& out(int i) const {
    check_vertex(i);
    return out_[i - 1];
  }

  /// In-neighbors of i, i.e. {j : (j,i) in E}. Matches the sensing-graph
  /// neighbor convention where (j,i) means i has access to x_j.
  std::set<int> in(int i) const {
    check_vertex(i);
    std::set<int> r;
    for (int j = 1; j <= n_; ++j)
      if (out_[j - 1].count(i)) r.insert(j);
    return r;
  }

  /// Symmetrized neighbor set excluding i itself: j such that (i,j) or (j,i)
  /// is an edge. This is the adjacency relation used for clustering.
  std::set<int> neighbors_sym(int i) const {
    check_vertex(i);
    std::set<int> r;
    for (int j : out_[i - 1])
      if (j != i) r.insert(j);
    for (int j = 1; j <= n_; ++j)
      if (j != i && out_[j - 1].count(i)) r.insert(j);
    return r;
  }

  bool is_symmetric() const {
    for (int i = 1; i <= n_; ++i)
      for (int j : out_[i - 1])
        if (!out_[j - 1].count(i)) return false;
    return true;
  }

  int edge_count() const {
    int c = 0;
    for (const auto& s : out_) c += int(s.size());
    return c;
  }

  /// Parses the text format:
  ///   n <N> directed|undirected selfloops|noselfloops
  ///   i j            (one edge per line, 1-based)
  /// Self-loops implied by the header need not be listed.
  static DirectedGraph parse(std::istream& in) {
    std::string header;
    if (!std::getline(in, header))
      throw std::invalid_argument("graph parse: missing header line");
    std::istringstream hs(header);
    std::string tag, direction, loops;
    int n = 0;
    hs >> tag >> n >> direction >> loops;
    if (tag != "n" || n < 1 || (direction != "directed" && direction != "undirected") ||
        (loops != "selfloops" && loops != "noselfloops"))
      throw std::invalid_argument("graph parse: bad header '" + header + "'");
    DirectedGraph g(n, loops == "selfloops");
    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      std::istringstream ls(line);
      int i, j;
      if (!(ls >> i)) continue;  // blank line
      if (!(ls >> j))
        throw std::invalid_argument("graph parse: bad edge at line " +
                                    std::to_string(lineno));
      if (i < 1 || i > n || j < 1 || j > n)
        throw std::invalid_argument("graph parse: vertex out of range at line " +
                                    std::to_string(lineno));
      g.add_edge(i, j);
      if (direction == "undirected") g.add_edge(j, i);
    }
    return g;
  }

  static DirectedGraph parse(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  void write(std::ostream& out) const {
    out << "n " << n_ << " directed "
        << (self_loops_ ? "selfloops" : "noselfloops") << "\n";
    for (int i = 1; i <= n_; ++i)
      for (int j : out_[i - 1])
        if (!(self_loops_ && i == j)) out << i << " " << j << "\n";
  }

 private:
  void check_vertex(int i) const {
    if (i < 1 || i > n_)
      throw std::invalid_argument("vertex id " + std::to_string(i) +
                                  " out of range [1," + std::to_string(n_) + "]");
  }

  int n_;
  bool self_loops_;
  std::vector<std::set<int>> out_;
};

/// Partition of the vertices into mutually non-adjacent clusters.
struct Clustering {
  std::vector<std::vector<int>> clusters;

  int size() const { return int(clusters.size()); }

  int largest_cluster() const {
    int m = 0;
    for (const auto& c : clusters) m = std::max<int>(m, int(c.size()));
    return m;
  }

  /// Cluster index (1-based) containing vertex i, or 0 if absent.
  int cluster_of(int i) const {
    for (int j = 0; j < size(); ++j)
      if (std::find(clusters[j].begin(), clusters[j].end(), i) != clusters[j].end())
        return j + 1;
    return 0;
  }
};

struct ReachSet {
  int source = 0;
  std::set<int> members;
};

/// Vertices reachable from i by directed paths, including i itself.
inline ReachSet reachable_set(const DirectedGraph& sensing, int i) {
  if (i < 1 || i > sensing.size())
    throw std::invalid_argument("reachable_set: invalid vertex id");
  ReachSet r;
  r.source = i;
  std::deque<int> queue{i};
  r.members.insert(i);
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (int w : sensing.out(v)) {
      if (r.members.insert(w).second) queue.push_back(w);
    }
  }
  return r;
}

/// Learning graph: edge (k,i) whenever k lies in the union of cost
/// neighborhoods over the agents reachable from i in the sensing graph.
inline DirectedGraph build_learning_graph(const DirectedGraph& cost,
                                          const DirectedGraph& sensing) {
  if (cost.size() != sensing.size())
    throw std::invalid_argument("build_learning_graph: vertex-count mismatch");
  if (!cost.is_symmetric())
    throw std::invalid_argument("build_learning_graph: cost graph must be undirected");
  DirectedGraph learning(cost.size(), true);
  for (int i = 1; i <= cost.size(); ++i) {
    const ReachSet reach = reachable_set(sensing, i);
    for (int j : reach.members)
      for (int k : cost.out(j)) learning.add_edge(k, i);
  }
  return learning;
}

enum class ClusterMode { Random, LowestIndex };

/// Greedy non-adjacent clustering. Repeatedly fills a cluster by picking an
/// unblocked vertex (randomly or lowest-index) and blocking its symmetrized
/// neighbors; self-loops never block.
inline Clustering cluster_non_adjacent(const DirectedGraph& graph, Rng& rng,
                                       ClusterMode mode = ClusterMode::Random) {
  const int n = graph.size();
  std::vector<std::set<int>> nbrs(n);
  for (int i = 1; i <= n; ++i) nbrs[i - 1] = graph.neighbors_sym(i);

  Clustering result;
  std::vector<bool> assigned(n, false);
  int n_assigned = 0;
  while (n_assigned < n) {
    std::vector<bool> blocked = assigned;
    int n_blocked = n_assigned;
    std::vector<int> cluster;
    while (n_blocked < n) {
      std::vector<int> candidates;
      candidates.reserve(n - n_blocked);
      for (int i = 1; i <= n; ++i)
        if (!blocked[i - 1]) candidates.push_back(i);
      int pick = candidates[0];
      if (mode == ClusterMode::Random)
        pick = candidates[rng.next_u64() % candidates.size()];
      cluster.push_back(pick);
      blocked[pick - 1] = true;
      ++n_blocked;
      for (int j : nbrs[pick - 1]) {
        if (!blocked[j - 1]) {
          blocked[j - 1] = true;
          ++n_blocked;
        }
      }
    }
    std::sort(cluster.begin(), cluster.end());
    for (int i : cluster) assigned[i - 1] = true;
    n_assigned += int(cluster.size());
    result.clusters.push_back(std::move(cluster));
  }
  return result;
}

/// Restart heuristic: best (fewest clusters) result over `trials` randomized
/// runs, with ties broken toward a smaller largest cluster.
inline Clustering min_cluster_trials(const DirectedGraph& graph, int trials,
                                     Rng& rng) {
  if (trials < 1) throw std::invalid_argument("min_cluster_trials: trials >= 1");
  Clustering best = cluster_non_adjacent(graph, rng, ClusterMode::Random);
  for (int t = 1; t < trials; ++t) {
    Clustering c = cluster_non_adjacent(graph, rng, ClusterMode::Random);
    if (c.size() < best.size() ||
        (c.size() == best.size() && c.largest_cluster() < best.largest_cluster()))
      best = std::move(c);
  }
  return best;
}

struct ClusterValidity {
  bool disjoint = false;
  bool covers = false;
  bool independent = false;

  bool valid() const { return disjoint && covers && independent; }

  std::string describe() const {
    std::ostringstream os;
    os << (valid() ? "valid" : "invalid") << " (disjoint=" << disjoint
       << ", covers=" << covers << ", independent=" << independent << ")";
    return os.str();
  }
};

/// Checks disjointness, coverage of all vertices, and within-cluster
/// independence (no symmetrized edge between distinct members).
inline ClusterValidity validate_clustering(const DirectedGraph& graph,
                                           const Clustering& c) {
  ClusterValidity v;
  const int n = graph.size();
  std::vector<int> count(n, 0);
  bool in_range = true;
  for (const auto& cl : c.clusters)
    for (int i : cl) {
      if (i < 1 || i > n) {
        in_range = false;
      } else {
        ++count[i - 1];
      }
    }
  v.disjoint = in_range &&
               std::all_of(count.begin(), count.end(), [](int k) { return k <= 1; });
  v.covers = in_range &&
             std::all_of(count.begin(), count.end(), [](int k) { return k >= 1; });
  v.independent = in_range;
  if (in_range) {
    for (const auto& cl : c.clusters)
      for (size_t a = 0; a < cl.size() && v.independent; ++a)
        for (size_t b = a + 1; b < cl.size(); ++b) {
          if (graph.has_edge(cl[a], cl[b]) || graph.has_edge(cl[b], cl[a])) {
            v.independent = false;
            break;
          }
        }
  }
  return v;
}

}  // namespace blockzoo

#endif  // BLOCKZOO_GRAPH_HPP
