#pragma once

#include <Eigen/Dense>

namespace projnod::linalg {

/// Full symmetric eigendecomposition, eigenvalues ascending.
struct SymmetricSpectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // columns
};

/// Dense solver up to kDenseLimit, throws NumericError on failure.
SymmetricSpectrum symmetric_spectrum(const Eigen::MatrixXd& m);

inline constexpr int kDenseLimit = 512;

/// Largest eigenvalue by shifted power iteration; used above kDenseLimit.
/// The second-largest eigenvalue is estimated by one deflation pass to
/// report the spectral gap.
struct PowerResult {
  double value = 0.0;
  double second = 0.0;
  Eigen::VectorXd vector;
  int iterations = 0;
};
PowerResult power_iteration(const Eigen::MatrixXd& symmetric, double tol = 1e-13, int max_iter = 200000);

/// Moore-Penrose pseudo-inverse of a symmetric matrix; reciprocals of
/// eigenvalues below rel_cutoff * max|eigenvalue| are zeroed.
Eigen::MatrixXd symmetric_pseudo_inverse(const Eigen::MatrixXd& m, double rel_cutoff = 1e-10);

double max_abs(const Eigen::MatrixXd& m);

}  // namespace projnod::linalg
