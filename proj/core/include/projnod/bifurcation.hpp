#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "projnod/constraints.hpp"
#include "projnod/dynamics.hpp"
#include "projnod/graph.hpp"

namespace projnod {

struct CriticalAttention {
  double value = 0.0;
  /// u* > 0: the pitchfork opens as u increases.
  bool supercritical = true;
};

/// u* = d / (alpha + lambda gamma). DomainError when |alpha + lambda gamma| <= 1e-12.
CriticalAttention critical_attention(const NodParams& p, double lambda);

/// J = (u alpha - d) I + u gamma A'.
Eigen::MatrixXd jacobian_origin(const NodParams& p, const EffectiveNetwork& en, double u);

/// Cubic Lyapunov-Schmidt model h(x, u) = a (u - u*) x + b_cubic x^3 + unfold
/// of the reduced system around the neutral state, along eigenvector v of A'.
struct LsReduction {
  double u_star = 0.0;
  double a = 0.0;
  /// v^T (d^3 Phi)(v, v, v) at (0, u*).
  double third_derivative = 0.0;
  /// third_derivative / 6, the x^3 coefficient of h.
  double b_cubic = 0.0;
  /// v^T b_e.
  double unfold = 0.0;
  double lambda = 0.0;
  Eigen::VectorXd v;
  int mode = 0;
};

/// `mode` indexes eigenvalues of A' in descending order (0 = dominant).
/// Throws NonSimpleEigenvalueError when the chosen eigenvalue is repeated.
LsReduction ls_coefficients(const NodParams& p, const Graph& g, const ConstraintSet& c,
                            const Eigen::MatrixXd& bias, int mode = 0);

enum class Stability { Stable, Unstable, Marginal };
std::string to_string(Stability s);

struct DiagramPoint {
  int sample = 0;  // index into BifurcationDiagram::grid
  double u = 0.0;
  int branch = 0;
  Stability stability = Stability::Stable;
  double x_ls = 0.0;  // v^T y*
  Eigen::VectorXd y;
};

struct BifurcationDiagram {
  std::string method;  // "unfolding" or "newton"
  std::vector<double> grid;
  std::vector<DiagramPoint> points;
  /// Grid values where no equilibrium was found.
  std::vector<double> gaps;

  std::vector<const DiagramPoint*> at(int sample) const;
  int equilibria_at(int sample) const;
  int branch_count() const;
};

std::vector<double> linspace(double lo, double hi, int count);

/// Real roots of c3 x^3 + c1 x + c0 (c3 != 0), ascending, closed form.
std::vector<double> depressed_cubic_roots(double c3, double c1, double c0);

/// Root curves of the cubic model over a u grid; stability from dh/dx.
BifurcationDiagram unfolding_roots(const LsReduction& ls, double u_min, double u_max, int steps);

struct NewtonOptions {
  double tolerance = 1e-12;
  /// Accepted when the loop ends above `tolerance` but below this.
  double accept = 1e-10;
  int max_iterations = 100;
  double dedup_distance = 1e-6;
};

struct NewtonResult {
  Eigen::VectorXd y;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

NewtonResult newton_equilibrium(const ReducedSystem& sys, Eigen::VectorXd seed, const NewtonOptions& opts = {});

/// Stability from the eigenvalues of the reduced Jacobian at y.
Stability classify(const ReducedSystem& sys, const Eigen::VectorXd& y);

/// Newton continuation of equilibria across `u_grid` (ascending).
BifurcationDiagram equilibrium_sweep(const Graph& g, const ConstraintSet& c, const NodParams& p,
                                     const Eigen::MatrixXd& bias, const std::vector<double>& u_grid,
                                     const std::vector<Eigen::VectorXd>& seeds = {},
                                     const NewtonOptions& opts = {}, int mode = 0);

}  // namespace projnod
