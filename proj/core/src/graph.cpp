#include "projnod/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "projnod/errors.hpp"
#include "projnod/linalg.hpp"

namespace projnod {

namespace {

constexpr double kSimpleGap = 1e-8;

std::string node_pair(Eigen::Index i, Eigen::Index k) {
  return "(" + std::to_string(i + 1) + ", " + std::to_string(k + 1) + ")";
}

void require_size(int n) {
  if (n < 2) throw DomainError("graph needs at least 2 nodes, got " + std::to_string(n));
}

}  // namespace

Graph::Graph(Eigen::MatrixXd adjacency, std::string label)
    : adjacency_(std::move(adjacency)), label_(std::move(label)) {
  if (adjacency_.rows() != adjacency_.cols()) {
    throw ValidationError("adjacency must be square, got " + std::to_string(adjacency_.rows()) + "x" +
                          std::to_string(adjacency_.cols()));
  }
  require_size(static_cast<int>(adjacency_.rows()));
  const auto n = adjacency_.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (!std::isfinite(adjacency_(i, k))) {
        throw ValidationError("adjacency entry " + node_pair(i, k) + " is not finite");
      }
    }
    if (adjacency_(i, i) != 0.0) {
      throw ValidationError("self-loop: adjacency diagonal at node " + std::to_string(i + 1) + " is nonzero");
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i + 1; k < n; ++k) {
      if (adjacency_(i, k) != adjacency_(k, i)) {
        throw ValidationError("adjacency is not symmetric at " + node_pair(i, k));
      }
    }
  }
}

std::vector<int> Graph::neighbors(int i) const {
  std::vector<int> out;
  for (int k = 0; k < size(); ++k) {
    if (adjacency_(i, k) != 0.0) out.push_back(k);
  }
  return out;
}

bool Graph::is_unsigned() const { return (adjacency_.array() >= 0.0).all(); }

bool Graph::is_unweighted() const {
  return ((adjacency_.array() == 0.0) || (adjacency_.array() == 1.0)).all();
}

std::optional<double> Graph::regular_degree() const {
  const Eigen::VectorXd sums = adjacency_.rowwise().sum();
  if (sums.maxCoeff() - sums.minCoeff() > 1e-12) return std::nullopt;
  return sums(0);
}

namespace graphs {

Graph circulant(int n, const std::vector<int>& offsets) {
  require_size(n);
  if (offsets.empty()) throw DomainError("circulant graph needs at least one offset");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int s : offsets) {
    const int r = ((s % n) + n) % n;
    if (r == 0) throw DomainError("circulant offset " + std::to_string(s) + " is zero mod " + std::to_string(n));
    for (int i = 0; i < n; ++i) {
      const int k = (i + r) % n;
      a(i, k) = 1.0;
      a(k, i) = 1.0;
    }
  }
  std::ostringstream label;
  label << "circulant(" << n;
  for (int s : offsets) label << "," << s;
  label << ")";
  return Graph(std::move(a), label.str());
}

Graph ring(int n) {
  require_size(n);
  Graph g = circulant(n, {1});
  return Graph(g.adjacency(), "ring(" + std::to_string(n) + ")");
}

Graph star(int n) {
  require_size(n);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  a.row(0).tail(n - 1).setOnes();
  a.col(0).tail(n - 1).setOnes();
  return Graph(std::move(a), "star(" + std::to_string(n) + ")");
}

Graph complete(int n) {
  require_size(n);
  Eigen::MatrixXd a = Eigen::MatrixXd::Ones(n, n);
  a.diagonal().setZero();
  return Graph(std::move(a), "complete(" + std::to_string(n) + ")");
}

Graph custom(const Eigen::MatrixXd& adjacency) { return Graph(adjacency, "custom"); }

Graph from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("graph JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("n") || !doc["n"].is_number_integer()) {
    throw ValidationError("graph JSON: expected integer field \"n\"");
  }
  const int n = doc["n"].get<int>();
  require_size(n);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  const auto& edges = doc.value("edges", nlohmann::json::array());
  if (!edges.is_array()) throw ValidationError("graph JSON: \"edges\" must be an array");
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& edge = edges[e];
    const std::string where = "graph JSON: edge #" + std::to_string(e + 1);
    if (!edge.is_array() || edge.size() < 2 || edge.size() > 3) {
      throw ValidationError(where + " must be [i, j] or [i, j, w]");
    }
    if (!edge[0].is_number_integer() || !edge[1].is_number_integer()) {
      throw ValidationError(where + " node ids must be integers");
    }
    const int i = edge[0].get<int>();
    const int j = edge[1].get<int>();
    const double w = edge.size() == 3 ? edge[2].get<double>() : 1.0;
    if (i < 1 || i > n || j < 1 || j > n) throw ValidationError(where + " node id out of range 1.." + std::to_string(n));
    if (i == j) throw ValidationError(where + " is a self-loop");
    a(i - 1, j - 1) = w;
    a(j - 1, i - 1) = w;
  }
  return Graph(std::move(a), doc.value("label", std::string("custom")));
}

Graph load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open graph file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

std::string to_json(const Graph& g) {
  nlohmann::json doc;
  doc["n"] = g.size();
  doc["edges"] = nlohmann::json::array();
  for (int i = 0; i < g.size(); ++i) {
    for (int k = i + 1; k < g.size(); ++k) {
      if (g.weight(i, k) != 0.0) doc["edges"].push_back({i + 1, k + 1, g.weight(i, k)});
    }
  }
  return doc.dump();
}

}  // namespace graphs

std::vector<std::vector<int>> connected_components(const Eigen::MatrixXd& adjacency) {
  const int n = static_cast<int>(adjacency.rows());
  std::vector<int> comp(n, -1);
  std::vector<std::vector<int>> out;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    const int id = static_cast<int>(out.size());
    out.emplace_back();
    std::queue<int> q;
    q.push(s);
    comp[s] = id;
    while (!q.empty()) {
      const int i = q.front();
      q.pop();
      out[id].push_back(i);
      for (int k = 0; k < n; ++k) {
        if (adjacency(i, k) != 0.0 && comp[k] < 0) {
          comp[k] = id;
          q.push(k);
        }
      }
    }
    std::sort(out[id].begin(), out[id].end());
  }
  return out;
}

bool is_connected(const Eigen::MatrixXd& adjacency) { return connected_components(adjacency).size() == 1; }

bool is_connected(const Graph& g) { return is_connected(g.adjacency()); }

BalanceResult is_structurally_balanced(const Graph& g) {
  if (!is_connected(g)) throw DomainError("structural balance is defined here for connected graphs only");
  const int n = g.size();
  std::vector<int> side(n, -1);
  side[0] = 0;
  std::queue<int> q;
  q.push(0);
  while (!q.empty()) {
    const int i = q.front();
    q.pop();
    for (int k : g.neighbors(i)) {
      const int want = g.weight(i, k) > 0.0 ? side[i] : 1 - side[i];
      if (side[k] < 0) {
        side[k] = want;
        q.push(k);
      } else if (side[k] != want) {
        return {false, std::nullopt};
      }
    }
  }
  Bipartition part;
  for (int i = 0; i < n; ++i) (side[i] == 0 ? part.first : part.second).push_back(i);
  return {true, part};
}

Eigen::VectorXd canonical_sign(Eigen::VectorXd v) {
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
  const double tol = 1e-12;
  if ((v.array() <= tol).all() && (v.array() < -tol).any()) {
    v = -v;
  } else if (!(v.array() >= -tol).all()) {
    Eigen::Index idx = 0;
    v.cwiseAbs().maxCoeff(&idx);
    if (v(idx) < 0.0) v = -v;
  }
  return v;
}

Eigenpair dominant_eigenpair(const Eigen::MatrixXd& symmetric) {
  const auto n = symmetric.rows();
  Eigenpair out;
  double second = 0.0;
  if (n <= linalg::kDenseLimit) {
    const auto spec = linalg::symmetric_spectrum(symmetric);
    out.value = spec.values(n - 1);
    out.vector = spec.vectors.col(n - 1);
    second = n > 1 ? spec.values(n - 2) : -std::numeric_limits<double>::infinity();
  } else {
    const auto pw = linalg::power_iteration(symmetric);
    out.value = pw.value;
    out.vector = pw.vector;
    second = pw.second;
  }
  const double scale = std::max(1.0, std::abs(out.value));
  out.simple = (out.value - second) > kSimpleGap * scale;
  out.vector = canonical_sign(out.vector);
  return out;
}

Eigenpair dominant_eigenpair(const Graph& g) { return dominant_eigenpair(g.adjacency()); }

}  // namespace projnod
