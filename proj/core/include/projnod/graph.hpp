#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace projnod {

/// Undirected, weighted, possibly signed simple graph stored as a dense
/// symmetric adjacency matrix. Immutable after construction.
class Graph {
 public:
  /// Validates symmetry, zero diagonal and finiteness; throws ValidationError
  /// (or DomainError when n < 2).
  explicit Graph(Eigen::MatrixXd adjacency, std::string label = "custom");

  int size() const { return static_cast<int>(adjacency_.rows()); }
  const Eigen::MatrixXd& adjacency() const { return adjacency_; }
  double weight(int i, int k) const { return adjacency_(i, k); }
  const std::string& label() const { return label_; }

  /// Neighbours of node i (nonzero weight, either sign), ascending.
  std::vector<int> neighbors(int i) const;

  bool is_unsigned() const;
  /// All weights in {0, 1}.
  bool is_unweighted() const;
  /// Common row sum when every row sums to the same value within 1e-12.
  std::optional<double> regular_degree() const;

 private:
  Eigen::MatrixXd adjacency_;
  std::string label_;
};

struct Eigenpair {
  double value = 0.0;
  Eigen::VectorXd vector;
  /// False when the relative gap to the nearest other eigenvalue is below 1e-8.
  bool simple = true;
};

struct Bipartition {
  std::vector<int> first;   // V1, contains node 0
  std::vector<int> second;  // V2, may be empty
};

struct BalanceResult {
  bool balanced = false;
  std::optional<Bipartition> partition;
};

namespace graphs {

Graph ring(int n);
/// Node 0 is the hub.
Graph star(int n);
Graph complete(int n);
/// Node i is joined to i +/- s (mod n) for every offset s.
Graph circulant(int n, const std::vector<int>& offsets);
Graph custom(const Eigen::MatrixXd& adjacency);

/// Parses `{"n": int, "edges": [[i, j, w], ...]}` with 1-based node indices.
Graph from_json(const std::string& text);
Graph load_json(const std::string& path);
std::string to_json(const Graph& g);

}  // namespace graphs

/// Every pair of nodes joined by a path of nonzero-weight edges.
bool is_connected(const Graph& g);
bool is_connected(const Eigen::MatrixXd& adjacency);

/// Connected components (0-based node ids, each sorted, ordered by smallest id).
std::vector<std::vector<int>> connected_components(const Eigen::MatrixXd& adjacency);

/// Sign-consistent BFS labelling. Throws DomainError for a disconnected graph.
BalanceResult is_structurally_balanced(const Graph& g);

/// Eigenpair of the largest (signed) eigenvalue with deterministic sign:
/// nonnegative when the vector admits it, otherwise largest-magnitude entry positive.
Eigenpair dominant_eigenpair(const Graph& g);
Eigenpair dominant_eigenpair(const Eigen::MatrixXd& symmetric);

/// Normalises to unit length and applies the sign convention above.
Eigen::VectorXd canonical_sign(Eigen::VectorXd v);

}  // namespace projnod
