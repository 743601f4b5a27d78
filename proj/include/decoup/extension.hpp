#pragma once

// Extension operator
//   E_Q g(x) = int_Q g(xi) e(x' . xi + x_n Phi(xi)) dxi,  e(t) = exp(2 pi i t),
// with Phi the surface's phase, evaluated on lattices by tensor quadrature.

#include "decoup/lattice.hpp"
#include "decoup/quadrature.hpp"
#include "decoup/surface.hpp"

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace decoup {

using cplx = std::complex<double>;

/// Per-coordinate quadrature rules over Q = prod [lo_j, hi_j].
struct TensorRule {
  std::vector<QuadRule1D> axes;

  std::size_t dims() const noexcept { return axes.size(); }
  std::size_t size() const;
  /// Rules with the given panel counts on Q's sides.
  static TensorRule on_box(std::span<const std::pair<double, double>> sides, std::span<const int> panels);
  /// Rules with the fewest panels allowed over the lattice's extents.
  static TensorRule for_lattice(std::span<const std::pair<double, double>> sides, const SurfaceSpec& surface,
                                const Lattice& X);
};

/// g sampled at the tensor nodes of a rule (coordinate 0 slowest).
struct GridFunction {
  TensorRule rule;
  std::vector<cplx> values;

  static GridFunction sample(TensorRule rule, const std::function<cplx(std::span<const double>)>& g);
};

/// sum_r prod_j g_{r,j}(xi_j) with each factor sampled on rule.axes[j].
struct SeparableFunction {
  TensorRule rule;
  /// terms[r][j][i] = g_{r,j}(rule.axes[j].nodes[i]).
  std::vector<std::vector<std::vector<cplx>>> terms;

  std::size_t rank() const noexcept { return terms.size(); }
  /// Values at the tensor nodes of the rule (for the direct path).
  GridFunction expand() const;
};

struct SampledField {
  std::shared_ptr<const Lattice> lattice;
  std::vector<cplx> values;
  /// Free-form record of how the field was produced.
  std::string provenance;
};

/// Throws NyquistError if some rule has fewer panels than the lattice extents
/// require for the surface's phase.
void check_nyquist(const TensorRule& rule, const SurfaceSpec& surface, const Lattice& X);

/// Tensor quadrature at every lattice point (any lattice mode).
SampledField extend_direct(const GridFunction& g, const SurfaceSpec& surface, std::shared_ptr<const Lattice> X);

/// Same integral via per-coordinate tables T_{r,j}[x_j][x_n]; tensor lattices only.
SampledField extend_separable(const SeparableFunction& g, const SurfaceSpec& surface,
                              std::shared_ptr<const Lattice> X);

/// Writes "x_1,...,x_n,re,im" rows.
void write_field_csv(const SampledField& f, std::ostream& os);

}  // namespace decoup
