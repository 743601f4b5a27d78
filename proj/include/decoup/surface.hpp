#pragma once

#include "decoup/polynomial.hpp"

#include "json.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace decoup {

/// Polynomial phase phi(t) = sum c_l t^l together with its degeneracy constant C.
struct PhaseSpec {
  Polynomial poly;
  double C = 1.0;
};

/// Default second-derivative pinching ratio 2^{-(m-2)} accepted for phases.
double default_nondegeneracy_ratio(int m);

struct NondegeneracyReport {
  bool ok = false;
  /// Lowest derivative order whose range violates the bounds, or -1.
  int violated_order = -1;
  double second_lo = 0.0;
  double second_hi = 0.0;
  std::vector<Polynomial::Range> ranges;  // index = derivative order 0..m
  std::string message;
};

/// Checks that every derivative of order 0..m stays within [0, C] on [0,1]
/// and that phi'' has range [lo, hi] with lo >= ratio * hi and hi <= C. C must be positive.
/// Throws std::invalid_argument if the degree exceeds m.
NondegeneracyReport check_m_nondegenerate(const PhaseSpec& phase, int m, double ratio);

/// The hypersurface xi -> (xi, sum_j phi_j(xi_j)) over [0,1]^{n-1} where each
/// coordinate carries either an m-nondegenerate polynomial phase or the
/// monomial t^m.
///
/// The conventional layout puts the s phases on the first s coordinates.
/// Rescaling can move phases to other coordinates, so the layout is kept
/// per coordinate.
class SurfaceSpec {
 public:
  /// Phases on coordinates 0..s-1, monomials elsewhere.
  SurfaceSpec(int n, int m, std::vector<PhaseSpec> phases);
  /// Arbitrary layout; an empty optional means the monomial t^m.
  SurfaceSpec(int n, int m, std::vector<std::optional<PhaseSpec>> layout, double ratio);

  static SurfaceSpec monomial(int n, int m) { return SurfaceSpec(n, m, std::vector<PhaseSpec>{}); }

  int n() const noexcept { return n_; }
  int m() const noexcept { return m_; }
  int s() const noexcept { return s_; }
  std::size_t dims() const noexcept { return static_cast<std::size_t>(n_ - 1); }

  bool has_phase(std::size_t j) const { return layout_.at(j).has_value(); }
  const std::optional<PhaseSpec>& phase(std::size_t j) const { return layout_.at(j); }
  /// Layout mask: true where the coordinate carries a nondegenerate phase.
  std::vector<bool> phase_mask() const;
  /// phi_j, with the monomial represented as a polynomial.
  const Polynomial& coordinate_poly(std::size_t j) const { return polys_.at(j); }

  double phase_total(std::span<const double> xi) const;
  std::vector<double> graph_point(std::span<const double> xi) const;

 private:
  void validate(double ratio);

  int n_ = 2;
  int m_ = 4;
  int s_ = 0;
  std::vector<std::optional<PhaseSpec>> layout_;
  std::vector<Polynomial> polys_;
};

/// {"n","m","s","phases":[[c0..cm],...],"C"}
SurfaceSpec surface_from_json(const nlohmann::json& j);
nlohmann::json surface_to_json(const SurfaceSpec& s);

}  // namespace decoup
