#ifndef BLOCKZOO_IO_HPP
#define BLOCKZOO_IO_HPP

#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "blockzoo/graph.hpp"
#include "blockzoo/lqr.hpp"

namespace blockzoo {

// Matrices travel as {"rows", "cols", "data"} with row-major data.
inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  data.reserve(size_t(m.size()));
  for (long r = 0; r < m.rows(); ++r)
    for (long c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  j["data"] = std::move(data);
  return j;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const long rows = j.at("rows").get<long>();
  const long cols = j.at("cols").get<long>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (long(data.size()) != rows * cols)
    throw std::invalid_argument("matrix_from_json: data length mismatch");
  Eigen::MatrixXd m(rows, cols);
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c) m(r, c) = data[size_t(r * cols + c)];
  return m;
}

inline std::vector<std::pair<int, int>> non_loop_edges(const DirectedGraph& g) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i <= g.size(); ++i)
    for (int j : g.out(i))
      if (i != j) edges.emplace_back(i, j);
  return edges;
}

inline nlohmann::json system_to_json(const MasLqrSystem& sys,
                                     const std::vector<int>& leaders = {}) {
  nlohmann::json j;
  j["N"] = sys.n_agents;
  j["n"] = sys.state_dim;
  j["m"] = sys.input_dim;
  j["gamma"] = sys.discount;
  j["init_state_sigma"] = sys.init_state_sigma;
  j["A"] = nlohmann::json::array();
  j["B"] = nlohmann::json::array();
  j["R"] = nlohmann::json::array();
  for (int i = 0; i < sys.n_agents; ++i) {
    j["A"].push_back(matrix_to_json(sys.A[i]));
    j["B"].push_back(matrix_to_json(sys.B[i]));
    j["R"].push_back(matrix_to_json(sys.R[i]));
  }
  j["G"] = matrix_to_json(sys.G);
  j["Qtilde"] = matrix_to_json(sys.Qtilde);
  j["sensing_edges"] = non_loop_edges(sys.sensing);
  j["leaders"] = leaders;
  return j;
}

inline MasLqrSystem system_from_json(const nlohmann::json& j,
                                     std::vector<int>* leaders_out = nullptr) {
  MasLqrSystem sys;
  sys.n_agents = j.at("N").get<int>();
  sys.state_dim = j.at("n").get<int>();
  sys.input_dim = j.at("m").get<int>();
  sys.discount = j.at("gamma").get<double>();
  if (j.contains("init_state_sigma"))
    sys.init_state_sigma = j.at("init_state_sigma").get<double>();
  for (const auto& a : j.at("A")) sys.A.push_back(matrix_from_json(a));
  for (const auto& b : j.at("B")) sys.B.push_back(matrix_from_json(b));
  for (const auto& r : j.at("R")) sys.R.push_back(matrix_from_json(r));
  sys.G = matrix_from_json(j.at("G"));
  sys.Qtilde = matrix_from_json(j.at("Qtilde"));
  sys.sensing = DirectedGraph(sys.n_agents, true);
  for (const auto& e : j.at("sensing_edges"))
    sys.sensing.add_edge(e.at(0).get<int>(), e.at(1).get<int>());
  if (leaders_out && j.contains("leaders"))
    *leaders_out = j.at("leaders").get<std::vector<int>>();
  sys.validate();
  return sys;
}

/// Gain checkpoint: the sensing pattern (sorted neighbor ids per agent) and
/// each agent's compact block.
inline nlohmann::json gain_to_json(const DistributedGain& gain) {
  nlohmann::json j;
  j["N"] = gain.n_agents();
  j["m"] = gain.input_dim();
  j["n"] = gain.state_dim();
  j["pattern"] = nlohmann::json::array();
  j["blocks"] = nlohmann::json::array();
  for (int i = 1; i <= gain.n_agents(); ++i) {
    j["pattern"].push_back(gain.sensing_neighbors(i));
    j["blocks"].push_back(matrix_to_json(gain.compact_block(i)));
  }
  return j;
}

inline DistributedGain gain_from_json(const nlohmann::json& j) {
  const int n_agents = j.at("N").get<int>();
  DirectedGraph sensing(n_agents, true);
  const auto& pattern = j.at("pattern");
  if (int(pattern.size()) != n_agents)
    throw std::invalid_argument("gain_from_json: pattern size mismatch");
  for (int i = 1; i <= n_agents; ++i)
    for (const auto& nb : pattern[size_t(i - 1)])
      sensing.add_edge(nb.get<int>(), i);
  DistributedGain gain(sensing, j.at("m").get<int>(), j.at("n").get<int>());
  for (int i = 1; i <= n_agents; ++i)
    gain.set_compact_block(i, matrix_from_json(j.at("blocks")[size_t(i - 1)]));
  return gain;
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

inline void save_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace blockzoo

#endif  // BLOCKZOO_IO_HPP
