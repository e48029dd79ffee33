#pragma once

#include <cstddef>
#include <vector>

#include "infogain/matrix.hpp"

namespace infogain {

inline constexpr double kEulerGamma = 0.57721566490153286061;

// Pivot floor below which a log-determinant is reported as degenerate.
inline constexpr double kLogDetPivotFloor = 1e-12;

// Digamma function psi(x) for x > 0. Throws DomainError otherwise.
double digamma(double x);

// ln Gamma(x) for x > 0. Throws DomainError otherwise.
double ln_gamma(double x);

// Volume of the unit ball in R^d: pi^(d/2) / Gamma(1 + d/2).
double unit_ball_volume(std::size_t d);

enum class Centering { Centered, Uncentered };

// Sum of outer products. Centered: sum (y - mean)(y - mean)^T.
// Uncentered: sum y y^T.
Matrix scatter_matrix(const Matrix& samples, Centering centering);

// Centered: scatter / (n - 1), requires n >= 2.
// Uncentered: second moment about zero, scatter / n, requires n >= 1.
Matrix sample_covariance(const Matrix& samples, Centering centering = Centering::Centered);

bool is_symmetric(const Matrix& m, double rel_tol = 1e-12);

struct SymmetricEigen {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column j is the eigenvector for values[j]
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix.
SymmetricEigen symmetric_eigen(const Matrix& m);

// Symmetric square root of a numerically PSD matrix. Small negative
// eigenvalues are clamped to zero; clearly indefinite input is a DomainError.
Matrix psd_sqrt(const Matrix& m);

// Inverse of a symmetric positive definite matrix.
Matrix spd_inverse(const Matrix& m);

struct LogDet {
  double value = 0.0;
  bool degenerate = false;
};

// ln det(m) from an LDL^T factorization. Pivots below kLogDetPivotFloor are
// clamped to the floor and the result is flagged degenerate.
LogDet log_det_psd(const Matrix& m);

}  // namespace infogain
