#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "projnod/constraints.hpp"
#include "projnod/graph.hpp"

namespace projnod {

/// K symmetric, Kprime = dK/d(delta), (lambda, v) an eigenpair of K with |v| = 1.
struct PerturbationInputs {
  Eigen::MatrixXd K;
  Eigen::MatrixXd Kprime;
  double lambda = 0.0;
  Eigen::VectorXd v;
};

struct PerturbedEigenpair {
  double value = 0.0;
  Eigen::VectorXd vector;
  double dvalue = 0.0;
  Eigen::VectorXd dvector;
};

/// First-order eigenpair update:
///   dlambda = v^T K' v,
///   dv = -[F F + 2 v v^T]^{-1} F K' v,  F = K - lambda I.
PerturbedEigenpair eigenpair_perturbation(const PerturbationInputs& in, double delta);

struct RegularApprox {
  Eigen::VectorXd vector;  // scaled so the unperturbed vector is 1
  double lambda = 0.0;
};

/// First-order centrality of a d-regular unweighted graph whose node
/// `heterogeneous` has alignment `aligned` with every other node:
///   v ~ 1 + (1 - aligned) B w,  B = 11^T/(2N) + ((A - dI)^2)^+,
///   w = (A^2 - d^2 I) e_h  (w_h = d - d^2, w_j = mutual neighbours).
RegularApprox regular_approx(const Graph& g, double aligned, int heterogeneous = 0);

/// regular_approx on the complete graph, reduced by Sherman-Morrison:
///   v ~ 1 + (1 - aligned) (N - 2) / N^2 (1 - N, 1, ..., 1).
Eigen::VectorXd complete_approx(int n, double aligned);

/// regular_approx on the ring with node 0 heterogeneous, in DFT form:
///   v_j ~ 1 + (delta/N) sum_k cot^2(pi k/N) cos(2 pi k j/N),  delta = aligned - 1.
Eigen::VectorXd ring_approx(int n, double aligned);

/// Exact dominant eigenpair of a star (hub 0) with hub-leaf alignments:
/// lambda = sqrt(sum a_j^2), vector ~ (lambda, a_2, ..., a_N), unit norm.
Eigenpair star_exact(int n, std::span<const double> alignments);

/// min(|a - e|, |a + e|) after unit-normalising both.
double normalized_error(const Eigen::VectorXd& approx, const Eigen::VectorXd& exact);

/// Node ids by decreasing value; values within 1e-12 tie and fall back to id.
std::vector<int> rank_by_value(const Eigen::VectorXd& values);

struct CentralityReport {
  bool connected = true;
  /// Components of A' (only meaningful when !connected).
  std::vector<std::vector<int>> components;
  Eigenpair exact;
  /// "homogeneous", "ring", "complete", "regular", "star" or "" when no closed form applies.
  std::string approx_kind;
  std::optional<Eigen::VectorXd> approx;
  std::optional<double> lambda_approx;
  std::optional<double> delta;
  std::optional<double> error;
  std::optional<int> heterogeneous_agent;
  std::vector<int> ranking;
};

CentralityReport influence_report(const Graph& g, const ConstraintSet& c);

}  // namespace projnod
