#include "infogain/rng.hpp"

#include <cmath>
#include <numbers>

namespace infogain {

double Rng::exponential() {
  // 1 - u lies in (0, 1], so the log is finite.
  return -std::log1p(-uniform());
}

double Rng::normal() {
  // Box-Muller; the second variate is discarded so the stream position
  // depends only on the number of calls.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace infogain
