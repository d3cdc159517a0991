#include "projnod/centrality.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "projnod/errors.hpp"
#include "projnod/linalg.hpp"

namespace projnod {

namespace {

constexpr double kSameDirection = 1e-12;

bool is_symmetric(const Eigen::MatrixXd& m) {
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, linalg::max_abs(m));
}

bool is_star_with_hub_zero(const Graph& g) {
  if (!g.is_unweighted()) return false;
  const int n = g.size();
  for (int i = 0; i < n; ++i) {
    for (int k = i + 1; k < n; ++k) {
      const bool want = i == 0;
      if ((g.weight(i, k) != 0.0) != want) return false;
    }
  }
  return true;
}

bool same_adjacency(const Graph& g, const Graph& h) { return g.adjacency() == h.adjacency(); }

// Agent whose constraint direction differs from a common direction shared by
// all others, if exactly one such agent exists.
std::optional<int> single_heterogeneous(const Eigen::MatrixXd& units) {
  const int n = static_cast<int>(units.rows());
  if (n < 3) return std::nullopt;
  auto same = [&](int i, int k) { return (units.row(i) - units.row(k)).cwiseAbs().maxCoeff() <= kSameDirection; };
  // With n >= 3, at least two of agents 0, 1, 2 share the majority direction.
  const int ref = same(0, 1) || same(0, 2) ? 0 : 1;
  std::optional<int> odd;
  for (int i = 0; i < n; ++i) {
    if (same(i, ref)) continue;
    if (odd) return std::nullopt;
    odd = i;
  }
  return odd;
}

}  // namespace

PerturbedEigenpair eigenpair_perturbation(const PerturbationInputs& in, double delta) {
  const auto n = in.K.rows();
  if (!is_symmetric(in.K)) throw ValidationError("perturbation: K is not symmetric");
  if (in.Kprime.rows() != n || !is_symmetric(in.Kprime)) throw ValidationError("perturbation: K' is not symmetric n x n");
  if (in.v.size() != n) throw ValidationError("perturbation: eigenvector has wrong length");
  if (std::abs(in.v.norm() - 1.0) > 1e-10) throw ValidationError("perturbation: eigenvector is not unit norm");
  const double scale = std::max(1.0, linalg::max_abs(in.K));
  const double residual = (in.K * in.v - in.lambda * in.v).norm();
  if (residual > 1e-10 * scale) {
    throw ValidationError("perturbation: (lambda, v) is not an eigenpair of K (residual " + std::to_string(residual) + ")");
  }

  const Eigen::MatrixXd f = in.K - in.lambda * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd bracket = f * f + 2.0 * in.v * in.v.transpose();
  const auto spec = linalg::symmetric_spectrum(0.5 * (bracket + bracket.transpose()));
  const double big = spec.values.cwiseAbs().maxCoeff();
  if (spec.values.cwiseAbs().minCoeff() <= 1e-10 * std::max(1.0, big)) {
    throw NonSimpleEigenvalueError("perturbation: F F + 2 v v^T is singular; eigenvalue " + std::to_string(in.lambda) +
                                   " is not simple");
  }
  const Eigen::VectorXd rhs = f * (in.Kprime * in.v);
  const Eigen::VectorXd coeffs = spec.vectors.transpose() * rhs;

  PerturbedEigenpair out;
  out.dvalue = in.v.dot(in.Kprime * in.v);
  out.dvector = -(spec.vectors * coeffs.cwiseQuotient(spec.values));
  out.value = in.lambda + delta * out.dvalue;
  out.vector = in.v + delta * out.dvector;
  return out;
}

RegularApprox regular_approx(const Graph& g, double aligned, int heterogeneous) {
  const int n = g.size();
  if (heterogeneous < 0 || heterogeneous >= n) throw DomainError("heterogeneous node out of range");
  if (!g.is_unweighted()) throw DomainError("regular_approx needs an unweighted graph");
  const auto degree = g.regular_degree();
  if (!degree) throw DomainError("regular_approx needs a d-regular graph; " + g.label() + " is not regular");
  if (!is_connected(g)) throw DomainError("regular_approx needs a connected graph");
  const double d = *degree;
  const Eigen::MatrixXd& a = g.adjacency();
  const Eigen::MatrixXd shifted = a - d * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd b = Eigen::MatrixXd::Constant(n, n, 1.0 / (2.0 * n)) +
                            linalg::symmetric_pseudo_inverse(shifted * shifted);
  // Column h of A^2 minus d^2 e_h: entry h is d - d^2, others count mutual neighbours.
  Eigen::VectorXd w = a * a.col(heterogeneous);
  w(heterogeneous) -= d * d;

  RegularApprox out;
  out.vector = Eigen::VectorXd::Ones(n) + (1.0 - aligned) * (b * w);
  out.lambda = d * (1.0 - (2.0 / n) * (1.0 - aligned));
  return out;
}

Eigen::VectorXd complete_approx(int n, double aligned) {
  if (n < 3) throw DomainError("complete_approx needs n >= 3, got " + std::to_string(n));
  const double nn = static_cast<double>(n);
  // On the complete graph (A - dI)^2 = n^2 I - n 11^T, and w = (n - 2)(1 - n, 1, ..., 1)
  // is orthogonal to 1, so Sherman-Morrison leaves B w = w / n^2.
  Eigen::VectorXd dir = Eigen::VectorXd::Ones(n);
  dir(0) = 1.0 - nn;
  return Eigen::VectorXd::Ones(n) + (1.0 - aligned) * (nn - 2.0) / (nn * nn) * dir;
}

Eigen::VectorXd ring_approx(int n, double aligned) {
  if (n < 3) throw DomainError("ring_approx needs n >= 3, got " + std::to_string(n));
  const double delta = aligned - 1.0;
  const double nn = static_cast<double>(n);
  Eigen::VectorXd out(n);
  double imag_residue = 0.0;
  for (int j = 0; j < n; ++j) {
    double re = 0.0;
    double im = 0.0;
    for (int k = 1; k < n; ++k) {
      const double c = 1.0 / std::tan(std::numbers::pi * k / nn);
      const double phase = 2.0 * std::numbers::pi * k * j / nn;
      re += c * c * std::cos(phase);
      im += c * c * std::sin(phase);
    }
    out(j) = 1.0 + delta / nn * re;
    imag_residue = std::max(imag_residue, std::abs(delta / nn * im));
  }
  if (imag_residue > 1e-12) {
    throw NumericError("ring_approx: imaginary residue " + std::to_string(imag_residue) + " exceeds 1e-12");
  }
  return out;
}

Eigenpair star_exact(int n, std::span<const double> alignments) {
  if (n < 2) throw DomainError("star needs at least 2 nodes");
  if (static_cast<int>(alignments.size()) != n - 1) {
    throw ValidationError("star_exact expects " + std::to_string(n - 1) + " alignments, got " +
                          std::to_string(alignments.size()));
  }
  Eigen::VectorXd vec(n);
  for (int j = 1; j < n; ++j) {
    const double a = alignments[j - 1];
    if (a == 0.0) {
      throw DomainError("star_exact: hub and leaf " + std::to_string(j + 1) +
                        " have orthogonal constraints; the leaf is disconnected");
    }
    vec(j) = a;
  }
  const double s = vec.tail(n - 1).norm();
  vec(0) = s;
  Eigenpair out;
  out.value = s;
  out.vector = canonical_sign(vec);
  out.simple = true;
  return out;
}

double normalized_error(const Eigen::VectorXd& approx, const Eigen::VectorXd& exact) {
  const Eigen::VectorXd a = approx.normalized();
  const Eigen::VectorXd e = exact.normalized();
  return std::min((a - e).norm(), (a + e).norm());
}

std::vector<int> rank_by_value(const Eigen::VectorXd& values) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int l, int r) {
    const double dl = values(l);
    const double dr = values(r);
    if (std::abs(dl - dr) <= 1e-12) return false;
    return dl > dr;
  });
  return order;
}

CentralityReport influence_report(const Graph& g, const ConstraintSet& c) {
  const EffectiveNetwork en = effective_adjacency(g, c);
  const Eigen::MatrixXd units = c.unit_vectors();
  const int n = g.size();

  CentralityReport rep;
  rep.components = connected_components(en.graph_prime.adjacency());
  rep.connected = rep.components.size() == 1;
  rep.exact = dominant_eigenpair(en.graph_prime);
  rep.ranking = rank_by_value(rep.exact.vector);
  if (!rep.connected) return rep;

  const bool homogeneous = (units.rowwise() - units.row(0)).cwiseAbs().maxCoeff() <= kSameDirection;
  if (homogeneous) {
    rep.approx_kind = "homogeneous";
    rep.approx = dominant_eigenpair(g).vector;
    rep.lambda_approx = dominant_eigenpair(g).value;
    rep.delta = 0.0;
    rep.error = normalized_error(*rep.approx, rep.exact.vector);
    return rep;
  }

  const auto odd = single_heterogeneous(units);
  if (odd) {
    const int other = *odd == 0 ? 1 : 0;
    const double aligned = units.row(*odd).dot(units.row(other));
    rep.heterogeneous_agent = *odd;
    rep.delta = aligned - 1.0;
    if (g.is_unweighted() && g.regular_degree() && is_connected(g)) {
      const RegularApprox reg = regular_approx(g, aligned, *odd);
      rep.lambda_approx = reg.lambda;
      if (*odd == 0 && same_adjacency(g, graphs::complete(n))) {
        rep.approx_kind = "complete";
        rep.approx = complete_approx(n, aligned);
      } else if (*odd == 0 && n >= 3 && same_adjacency(g, graphs::ring(n))) {
        rep.approx_kind = "ring";
        rep.approx = ring_approx(n, aligned);
      } else {
        rep.approx_kind = "regular";
        rep.approx = reg.vector;
      }
    }
  }

  if (!rep.approx && is_star_with_hub_zero(g)) {
    std::vector<double> align(n - 1);
    for (int j = 1; j < n; ++j) align[j - 1] = en.alignment(0, j);
    const Eigenpair star = star_exact(n, align);
    rep.approx_kind = "star";
    rep.approx = star.vector;
    rep.lambda_approx = star.value;
  }

  if (rep.approx) rep.error = normalized_error(*rep.approx, rep.exact.vector);
  return rep;
}

}  // namespace projnod
