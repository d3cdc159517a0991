#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "projnod/constraints.hpp"
#include "projnod/graph.hpp"
#include "projnod/sigmoid.hpp"

namespace projnod {

struct NodParams {
  double d = 0.3;      // damping
  double u = 0.14;     // attention
  double alpha = 1.0;  // self-reinforcement
  double gamma = 0.5;  // social weight
  Sigmoid sigmoid = tanh_sigmoid();

  /// Throws ValidationError unless d, u, alpha, gamma are finite and positive.
  void validate() const;
  NodParams with_attention(double attention) const;
};

/// Z_i' = P_i F_i(Z), F_ij = -d z_ij + S(u(alpha z_ij + gamma sum_k A_ik z_kj)) + b_ij.
/// State is agents x options. Any projector rank.
class FullSystem {
 public:
  FullSystem(const Graph& g, const ConstraintSet& c, NodParams p, Eigen::MatrixXd bias);

  Eigen::MatrixXd rhs(const Eigen::MatrixXd& state) const;
  /// Unprojected field F(Z).
  Eigen::MatrixXd raw_field(const Eigen::MatrixXd& state) const;

  const Graph& graph() const { return graph_; }
  const ConstraintSet& constraints() const { return constraints_; }
  const NodParams& params() const { return params_; }
  const Eigen::MatrixXd& bias() const { return bias_; }

 private:
  Graph graph_;
  ConstraintSet constraints_;
  NodParams params_;
  Eigen::MatrixXd bias_;
};

/// Effective-opinion dynamics under rank-one constraints:
/// y_i' = -d y_i + p_i^T S(u(alpha y_i p_i + gamma sum_k A_ik y_k p_k)) + b_ei.
class ReducedSystem {
 public:
  /// `effective_bias` has one entry per agent. Throws UnsupportedRankError.
  ReducedSystem(const Graph& g, const ConstraintSet& c, NodParams p, Eigen::VectorXd effective_bias);

  Eigen::VectorXd rhs(const Eigen::VectorXd& y) const;
  /// Analytic Jacobian d(rhs)/dy.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& y) const;

  ReducedSystem with_attention(double attention) const;

  int agents() const { return static_cast<int>(units_.rows()); }
  const Graph& graph() const { return graph_; }
  const ConstraintSet& constraints() const { return constraints_; }
  const NodParams& params() const { return params_; }
  const Eigen::VectorXd& effective_bias() const { return bias_; }
  /// Row i = unit constraint vector of agent i.
  const Eigen::MatrixXd& units() const { return units_; }

  /// Z_i = y_i p_i.
  Eigen::MatrixXd lift(const Eigen::VectorXd& y) const;

 private:
  Eigen::MatrixXd argument(const Eigen::VectorXd& y) const;

  Graph graph_;
  ConstraintSet constraints_;
  NodParams params_;
  Eigen::VectorXd bias_;
  Eigen::MatrixXd units_;
};

Eigen::MatrixXd full_rhs(const Eigen::MatrixXd& state, const Graph& g, const ConstraintSet& c,
                         const NodParams& p, const Eigen::MatrixXd& bias);
Eigen::VectorXd reduced_rhs(const Eigen::VectorXd& y, const Graph& g, const ConstraintSet& c,
                            const NodParams& p, const BiasField& bias);

struct IntegrationOptions {
  double horizon = 100.0;
  double dt = 0.01;
  int sample_every = 1;
  /// Project a full-system initial state onto the constraint subspaces.
  bool project_initial = true;
  /// Error instead of projecting when the initial state violates constraints.
  bool strict = false;
  /// Initial states with max_i |P_i^perp Z_i| above this count as violating.
  double violation_tol = 1e-12;

  void validate() const;
};

struct TrajectoryMetadata {
  double d = 0, u = 0, alpha = 0, gamma = 0;
  std::string sigmoid;
  std::string graph;
  std::string constraints;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> warnings;
};

struct Trajectory {
  std::vector<double> times;
  /// Agents x options per sample. For reduced runs this is the lifted state.
  std::vector<Eigen::MatrixXd> full;
  /// Effective opinions per sample; empty for full runs with rank > 1 agents.
  std::vector<Eigen::VectorXd> effective;
  TrajectoryMetadata meta;

  std::size_t samples() const { return times.size(); }
  bool has_effective() const { return !effective.empty(); }
};

/// Fixed-step RK4. The first and last instants are always sampled.
/// Throws DivergenceError on a non-finite state.
Trajectory integrate(const FullSystem& system, Eigen::MatrixXd initial, const IntegrationOptions& opts);
Trajectory integrate(const ReducedSystem& system, const Eigen::VectorXd& initial, const IntegrationOptions& opts);

/// Uniform draw in [-epsilon, epsilon]^(agents x options), then projected.
Eigen::MatrixXd seeded_initial_state(const ConstraintSet& c, std::uint64_t seed, double epsilon = 0.01);

/// Per-agent max over samples of |P_i^perp Z_i(t)|.
Eigen::VectorXd constraint_drift(const Trajectory& traj, const ConstraintSet& c);

/// Integrates both models from Z_i(0) = y_i(0) p_i and returns
/// max_t max_i |p_i^T Z_i(t) - y_i(t)|.
double full_reduced_equivalence(const Graph& g, const ConstraintSet& c, const NodParams& p,
                                const Eigen::MatrixXd& bias, const Eigen::VectorXd& initial_effective,
                                double horizon, double dt);

}  // namespace projnod
