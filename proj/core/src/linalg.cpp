#include "projnod/linalg.hpp"

#include <cmath>
#include <string>

#include "projnod/errors.hpp"

namespace projnod::linalg {

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

SymmetricSpectrum symmetric_spectrum(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericError("symmetric eigensolver did not converge (n = " + std::to_string(m.rows()) + ")");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

PowerResult power_iteration(const Eigen::MatrixXd& symmetric, double tol, int max_iter) {
  const auto n = symmetric.rows();
  // Gershgorin shift makes every eigenvalue nonnegative, so the iteration
  // converges to the largest signed eigenvalue.
  const double shift = symmetric.cwiseAbs().rowwise().sum().maxCoeff();
  const Eigen::MatrixXd shifted = symmetric + shift * Eigen::MatrixXd::Identity(n, n);

  auto run = [&](const Eigen::MatrixXd& op, Eigen::VectorXd x, int& iters) {
    double value = 0.0;
    for (iters = 0; iters < max_iter; ++iters) {
      Eigen::VectorXd next = op * x;
      const double norm = next.norm();
      if (!(norm > 0.0) || !std::isfinite(norm)) break;
      next /= norm;
      const double rq = next.dot(op * next);
      const double change = std::min((next - x).norm(), (next + x).norm());
      x = std::move(next);
      value = rq;
      if (change < tol) return std::pair{value, x};
    }
    throw NumericError("power iteration did not converge after " + std::to_string(iters) +
                       " iterations (n = " + std::to_string(n) + ")");
  };

  PowerResult out;
  Eigen::VectorXd start = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
  start += Eigen::VectorXd::LinSpaced(n, 0.0, 1e-3);
  start.normalize();
  auto [top, vec] = run(shifted, start, out.iterations);
  out.value = top - shift;
  out.vector = vec;

  // Deflate once for the gap estimate. Only the second eigenvalue is needed, so this pass
  // stops once the Rayleigh quotient settles rather than waiting for its eigenvector,
  // which crawls when the rest of the spectrum is clustered.
  const Eigen::MatrixXd deflated = shifted - top * vec * vec.transpose();
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(n, 1.0, 2.0);
  x -= vec.dot(x) * vec;
  x.normalize();
  const double value_tol = 1e-12 * (shift + std::abs(out.value));
  Eigen::VectorXd bx = deflated * x;
  double rq = x.dot(bx);
  out.second = rq - shift;
  for (int it = 0; it < max_iter; ++it) {
    const double norm = bx.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) break;
    x = bx / norm;
    bx.noalias() = deflated * x;
    const double next_rq = x.dot(bx);
    const bool settled = std::abs(next_rq - rq) < value_tol;
    rq = next_rq;
    out.second = rq - shift;
    if (settled) break;
  }
  return out;
}

Eigen::MatrixXd symmetric_pseudo_inverse(const Eigen::MatrixXd& m, double rel_cutoff) {
  const auto spec = symmetric_spectrum(m);
  const double largest = spec.values.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(spec.values.size());
  for (Eigen::Index i = 0; i < spec.values.size(); ++i) {
    if (std::abs(spec.values(i)) > rel_cutoff * largest) inv(i) = 1.0 / spec.values(i);
  }
  return spec.vectors * inv.asDiagonal() * spec.vectors.transpose();
}

}  // namespace projnod::linalg
