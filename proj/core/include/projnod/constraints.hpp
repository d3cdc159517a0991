#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "projnod/graph.hpp"

namespace projnod {

/// Orthogonal projector onto range(basis), P = B (B^T B)^{-1} B^T.
/// The Gram matrix is factored by Cholesky and rejected (DomainError) when
/// its condition number exceeds kGramConditionLimit or a column is zero.
Eigen::MatrixXd projection_matrix(const Eigen::MatrixXd& basis);
Eigen::MatrixXd projection_matrix(const Eigen::VectorXd& vector);

inline constexpr double kGramConditionLimit = 1e12;

/// Per-agent constraint subspaces over a common option space.
class ConstraintSet {
 public:
  /// One basis (n_options x k_i) per agent.
  ConstraintSet(int n_options, std::vector<Eigen::MatrixXd> bases, std::string label = "custom");

  /// Every agent confined to span{p}.
  static ConstraintSet homogeneous(int n_agents, const Eigen::VectorXd& p);
  /// Rank-one set from one vector per agent.
  static ConstraintSet from_vectors(const std::vector<Eigen::VectorXd>& vectors, std::string label = "custom");

  /// `{"options": N_o, "vectors": {"1": [..], ...}, "default": [..]}`; an
  /// optional `"bases": {"i": [[col], [col]]}` gives higher-rank agents.
  static ConstraintSet from_json(const std::string& text, int n_agents);
  static ConstraintSet load_json(const std::string& path, int n_agents);

  int agents() const { return static_cast<int>(bases_.size()); }
  int options() const { return n_options_; }
  int rank(int agent) const { return static_cast<int>(bases_[agent].cols()); }
  bool is_rank_one() const;
  const std::string& label() const { return label_; }

  const Eigen::MatrixXd& basis(int agent) const { return bases_[agent]; }
  const Eigen::MatrixXd& projector(int agent) const { return projectors_[agent]; }
  Eigen::MatrixXd complement(int agent) const;

  /// p_i / |p_i|; UnsupportedRankError unless rank(agent) == 1.
  Eigen::VectorXd unit_vector(int agent) const;
  /// Row i holds the unit constraint vector of agent i (rank-one sets only).
  Eigen::MatrixXd unit_vectors() const;

  /// Projects each row Z_i onto its constraint subspace.
  Eigen::MatrixXd project(const Eigen::MatrixXd& state) const;
  /// Per-agent |P_i^perp Z_i|.
  Eigen::VectorXd violation(const Eigen::MatrixXd& state) const;

 private:
  int n_options_;
  std::vector<Eigen::MatrixXd> bases_;
  std::vector<Eigen::MatrixXd> projectors_;
  std::string label_;
};

struct EffectiveNetwork {
  Graph graph_prime;
  /// alignment(i, k) = p_i^T p_k for unit constraint vectors.
  Eigen::MatrixXd alignment;
};

/// [A']_ik = (p_i^T p_k) [A]_ik. Rank-one sets only.
EffectiveNetwork effective_adjacency(const Graph& g, const ConstraintSet& c);

struct BiasField {
  Eigen::MatrixXd raw;       // agents x options
  Eigen::VectorXd effective; // b_ei = p_i^T b_i
};

BiasField effective_bias(const ConstraintSet& c, const Eigen::MatrixXd& bias);

}  // namespace projnod
