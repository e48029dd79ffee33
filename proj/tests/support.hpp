#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "infogain/matrix.hpp"
#include "infogain/rng.hpp"

namespace infogain::testing {

inline Matrix normal_matrix(std::size_t n, std::size_t d, Rng& rng) {
  Matrix m(n, d);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

inline Matrix uniform_matrix(std::size_t n, std::size_t d, Rng& rng, double lo = 0.0, double hi = 1.0) {
  Matrix m(n, d);
  for (double& v : m.data()) v = rng.uniform(lo, hi);
  return m;
}

// A A^T + shift I for a random A.
inline Matrix random_psd(std::size_t d, Rng& rng, double shift = 0.0) {
  const Matrix a = normal_matrix(d, d, rng);
  Matrix s = a * transpose(a);
  for (std::size_t i = 0; i < d; ++i) s(i, i) += shift;
  return s;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Standard error of the mean, n - 1 denominator.
inline double standard_error(const std::vector<double>& v) {
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace infogain::testing
