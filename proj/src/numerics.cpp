#include "infogain/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "infogain/error.hpp"

namespace infogain {

double digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("digamma: argument must be positive");
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Asymptotic series in 1/x^2 with Bernoulli coefficients B_2k / (2k).
  const double series =
      inv2 * (1.0 / 12 -
      inv2 * (1.0 / 120 -
      inv2 * (1.0 / 252 -
      inv2 * (1.0 / 240 -
      inv2 * (1.0 / 132 -
      inv2 * (691.0 / 32760 -
      inv2 * (1.0 / 12 -
      inv2 * (3617.0 / 8160))))))));
  return result + std::log(x) - 0.5 * inv - series;
}

double ln_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("ln_gamma: argument must be positive");
  double shift = 0.0;
  while (x < 10.0) {
    shift += std::log(x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv * (1.0 / 12 -
      inv2 * (1.0 / 360 -
      inv2 * (1.0 / 1260 -
      inv2 * (1.0 / 1680 -
      inv2 * (1.0 / 1188 -
      inv2 * (691.0 / 360360 -
      inv2 * (1.0 / 156)))))));
  constexpr double half_log_two_pi = 0.91893853320467274178;
  return (x - 0.5) * std::log(x) - x + half_log_two_pi + series - shift;
}

double unit_ball_volume(std::size_t d) {
  if (d == 0) throw DomainError("unit_ball_volume: dimension must be positive");
  const double half = 0.5 * static_cast<double>(d);
  return std::exp(half * std::log(std::numbers::pi) - ln_gamma(1.0 + half));
}

Matrix scatter_matrix(const Matrix& samples, Centering centering) {
  const std::size_t n = samples.rows();
  const std::size_t d = samples.cols();
  std::vector<double> mean(d, 0.0);
  if (centering == Centering::Centered && n > 0) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) mean[j] += samples(i, j);
    for (double& m : mean) m /= static_cast<double>(n);
  }
  Matrix s(d, d);
  std::vector<double> dev(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) dev[j] = samples(i, j) - mean[j];
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = a; b < d; ++b) s(a, b) += dev[a] * dev[b];
  }
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < a; ++b) s(a, b) = s(b, a);
  return s;
}

Matrix sample_covariance(const Matrix& samples, Centering centering) {
  const std::size_t n = samples.rows();
  const std::size_t min_n = centering == Centering::Centered ? 2 : 1;
  if (n < min_n) throw InsufficientSamplesError("sample_covariance: too few samples");
  Matrix s = scatter_matrix(samples, centering);
  const double denom = static_cast<double>(centering == Centering::Centered ? n - 1 : n);
  for (double& v : s.data()) v /= denom;
  return s;
}

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  double scale = 0.0;
  for (double v : m.data()) scale = std::max(scale, std::abs(v));
  const double tol = rel_tol * scale;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j)
      if (std::abs(m(i, j) - m(j, i)) > tol) return false;
  return true;
}

SymmetricEigen symmetric_eigen(const Matrix& m) {
  if (!is_symmetric(m)) throw DomainError("symmetric_eigen: matrix is not symmetric");
  const std::size_t d = m.rows();
  Matrix a = m;
  Matrix v = Matrix::identity(d);

  auto off_diagonal = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j) s += a(i, j) * a(i, j);
    return s;
  };
  const double total = std::max(frobenius_norm(a), std::numeric_limits<double>::min());
  constexpr int kMaxSweeps = 100;
  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    if (std::sqrt(off_diagonal()) <= 1e-15 * total) break;
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (sweep == kMaxSweeps) throw NumericError("symmetric_eigen: Jacobi iteration did not converge");

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  SymmetricEigen out{std::vector<double>(d), Matrix(d, d)};
  for (std::size_t j = 0; j < d; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (std::size_t k = 0; k < d; ++k) out.vectors(k, j) = v(k, order[j]);
  }
  return out;
}

namespace {

// V f(Lambda) V^T, symmetrized.
template <typename F>
Matrix spectral_apply(const SymmetricEigen& eig, F&& f) {
  const std::size_t d = eig.values.size();
  Matrix out(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    const double fj = f(eig.values[j]);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = a; b < d; ++b) out(a, b) += fj * eig.vectors(a, j) * eig.vectors(b, j);
  }
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < a; ++b) out(a, b) = out(b, a);
  return out;
}

}  // namespace

Matrix psd_sqrt(const Matrix& m) {
  const SymmetricEigen eig = symmetric_eigen(m);
  const std::size_t d = m.rows();
  double trace = 0.0;
  for (std::size_t i = 0; i < d; ++i) trace += m(i, i);
  const double tol = 1e-10 * std::max(std::abs(trace) / static_cast<double>(std::max<std::size_t>(d, 1)),
                                      std::numeric_limits<double>::min());
  if (!eig.values.empty() && eig.values.front() < -tol)
    throw DomainError("psd_sqrt: matrix is not positive semidefinite");
  return spectral_apply(eig, [](double lambda) { return std::sqrt(std::max(lambda, 0.0)); });
}

Matrix spd_inverse(const Matrix& m) {
  const SymmetricEigen eig = symmetric_eigen(m);
  if (!eig.values.empty() && !(eig.values.front() > 0.0))
    throw DomainError("spd_inverse: matrix is not positive definite");
  return spectral_apply(eig, [](double lambda) { return 1.0 / lambda; });
}

LogDet log_det_psd(const Matrix& m) {
  if (!is_symmetric(m)) throw DomainError("log_det_psd: matrix is not symmetric");
  const std::size_t d = m.rows();
  // LDL^T without pivoting; l holds the unit lower factor, pivots the D entries.
  Matrix l = Matrix::identity(d);
  std::vector<double> pivots(d);
  LogDet out;
  for (std::size_t j = 0; j < d; ++j) {
    double dj = m(j, j);
    for (std::size_t k = 0; k < j; ++k) dj -= l(j, k) * l(j, k) * pivots[k];
    if (!(dj >= kLogDetPivotFloor)) {
      dj = kLogDetPivotFloor;
      out.degenerate = true;
    }
    pivots[j] = dj;
    out.value += std::log(dj);
    for (std::size_t i = j + 1; i < d; ++i) {
      double lij = m(i, j);
      for (std::size_t k = 0; k < j; ++k) lij -= l(i, k) * l(j, k) * pivots[k];
      l(i, j) = lij / dj;
    }
  }
  return out;
}

}  // namespace infogain
