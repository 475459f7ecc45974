#include "qlsq/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace qlsq {

namespace {

// Knuth multiplication method, O(mean) uniforms; fine below ~30.
std::uint64_t poisson_small(Rng& rng, double mean) {
  const double limit = std::exp(-mean);
  std::uint64_t k = 0;
  double prod = rng.uniform01();
  while (prod > limit) {
    ++k;
    prod *= rng.uniform01();
  }
  return k;
}

// PTRD transformed rejection (W. Hormann, Insurance Math. Econom. 12, 39 (1993)).
std::uint64_t poisson_ptrd(Rng& rng, double mean) {
  const double smu = std::sqrt(mean);
  const double b = 0.931 + 2.53 * smu;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mean = std::log(mean);

  for (;;) {
    double u = rng.uniform01() - 0.5;
    double v = rng.uniform01();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
    const double rhs = kf * log_mean - mean - std::lgamma(kf + 1.0);
    if (lhs <= rhs) return static_cast<std::uint64_t>(kf);
  }
}

}  // namespace

std::uint64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0)) throw std::invalid_argument("poisson mean must be nonnegative");
  if (mean == 0.0) return 0;
  if (mean < 30.0) return poisson_small(*this, mean);
  return poisson_ptrd(*this, mean);
}

}  // namespace qlsq
