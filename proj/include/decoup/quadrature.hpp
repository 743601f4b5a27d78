#pragma once

// Composite Gauss-Legendre rules for oscillatory 1-D integrals.
//
// An integrand e(a xi + t phi(xi)) over [lo, hi] turns through at most
// max |a + t phi'(xi)| * (hi - lo) cycles. A rule is accepted only if no
// panel carries more than kMaxCyclesPerPanel of them.

#include "decoup/polynomial.hpp"

#include <stdexcept>
#include <vector>

namespace decoup {

inline constexpr int kNodesPerPanel = 16;
inline constexpr double kMaxCyclesPerPanel = 3.0;

/// Thrown when a rule is too coarse for the frequencies it must resolve.
class NyquistError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuadRule1D {
  double lo = 0.0;
  double hi = 1.0;
  int panels = 1;
  std::vector<double> nodes;
  std::vector<double> weights;

  /// panels equal panels of kNodesPerPanel Gauss-Legendre nodes each.
  static QuadRule1D gauss_legendre(double lo, double hi, int panels);
  std::size_t size() const noexcept { return nodes.size(); }
};

/// Smallest power-of-two panel count that keeps each panel within
/// kMaxCyclesPerPanel cycles.
int required_panels(double cycles);

/// Upper bound on the cycles of e(a xi + t phi(xi)) over [lo, hi] for every
/// a in [a_lo, a_hi], t in [t_lo, t_hi].
double phase_cycles(const Polynomial& phi, double lo, double hi, double a_lo, double a_hi, double t_lo,
                    double t_hi);

}  // namespace decoup
