#pragma once

// e(t) = cos(2 pi t) + i sin(2 pi t) by reduction in turns.
//
// r = t - round(t) lies in [-1/2, 1/2]; q = round(4 r) picks the quadrant and
// s = r - q/4 lies in [-1/8, 1/8], so 2 pi s is in [-pi/4, pi/4] where the
// Taylor series below are accurate to well under one ulp. The result is then
// rotated by i^q.

#include <cmath>

namespace decoup::kernels::detail {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// sin(x)/x = sum_k S[k] x^{2k}, cos(x) = sum_k C[k] x^{2k}
inline constexpr double kSinCoef[] = {
    1.0,
    -1.0 / 6.0,
    1.0 / 120.0,
    -1.0 / 5040.0,
    1.0 / 362880.0,
    -1.0 / 39916800.0,
    1.0 / 6227020800.0,
    -1.0 / 1307674368000.0,
    1.0 / 355687428096000.0,
};
inline constexpr double kCosCoef[] = {
    1.0,
    -1.0 / 2.0,
    1.0 / 24.0,
    -1.0 / 720.0,
    1.0 / 40320.0,
    -1.0 / 3628800.0,
    1.0 / 479001600.0,
    -1.0 / 87178291200.0,
    1.0 / 20922789888000.0,
};
inline constexpr int kTerms = 9;

inline void expi_turns_scalar_poly(double t, double& re, double& im) {
  const double r = t - std::nearbyint(t);
  const double q = std::nearbyint(4.0 * r);
  const double s = std::fma(-0.25, q, r);
  const double x = kTwoPi * s;
  const double x2 = x * x;
  double ps = kSinCoef[kTerms - 1];
  double pc = kCosCoef[kTerms - 1];
  for (int k = kTerms - 2; k >= 0; --k) {
    ps = std::fma(ps, x2, kSinCoef[k]);
    pc = std::fma(pc, x2, kCosCoef[k]);
  }
  const double sn = ps * x;
  const double cs = pc;
  const double aq = std::fabs(q);
  const double f = 1.0 - aq;
  if (aq == 1.0) {
    re = -q * sn;
    im = q * cs;
  } else {
    re = f * cs;
    im = f * sn;
  }
}

}  // namespace decoup::kernels::detail
