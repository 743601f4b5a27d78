#pragma once

#include <span>
#include <vector>

namespace decoup {

/// Real polynomial sum_l c[l] t^l, stored low order first.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs);
  static Polynomial monomial(int degree, double coeff = 1.0);

  /// Degree after dropping trailing zeros; -1 for the zero polynomial.
  int degree() const noexcept;
  const std::vector<double>& coeffs() const noexcept { return c_; }

  double operator()(double t) const noexcept;
  Polynomial derivative(int order = 1) const;
  /// Coefficients (in eta) of p(offset + scale * eta).
  Polynomial shifted(double offset, double scale) const;

  /// Real roots in [a, b], ascending, each to within tol.
  std::vector<double> roots_in(double a, double b, double tol = 1e-12) const;

  struct Range {
    double lo;
    double hi;
  };
  /// Exact extrema over [a, b] up to root tolerance: endpoint values and
  /// values at the critical points found by root isolation of p'.
  Range range_on(double a, double b, double tol = 1e-12) const;

 private:
  std::vector<double> c_;
};

}  // namespace decoup
