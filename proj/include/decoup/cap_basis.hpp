#pragma once

// Per-cap extension fields u_theta(x) = E_theta 1 (x).
//
// Because the phase is a sum of one-variable phases, u_theta factors into
// 1-D integrals over theta's sides:
//   u_theta(x) = prod_j int_{theta_j} e(x_j xi + x_n phi_j(xi)) dxi.
// Each distinct side is integrated once per point, with a panel count chosen
// for that point from a precomputed power-of-two ladder, so points near the
// origin cost little and far points stay resolved.
//
// Any g that is constant on each cap gives E g = sum_theta g_theta u_theta.

#include "decoup/extension.hpp"
#include "decoup/geometry.hpp"
#include "decoup/surface.hpp"

#include <span>
#include <vector>

namespace decoup {

class CapBasis {
 public:
  /// Rules are built for every point within the lattice's extents.
  CapBasis(const SurfaceSpec& surface, std::vector<Cap> caps, const Lattice& X);

  std::size_t size() const noexcept { return caps_.size(); }
  const std::vector<Cap>& caps() const noexcept { return caps_; }
  std::size_t dims() const noexcept { return sides_.size(); }

  /// u[c] = u_{caps[c]}(x) for all caps. Throws NyquistError outside the
  /// extents the basis was built for.
  void evaluate(std::span<const double> x, std::span<cplx> u) const;

  /// Number of 1-D nodes used at x (cost model).
  std::size_t nodes_at(std::span<const double> x) const;

 private:
  struct Level {
    std::vector<double> nodes;
    std::vector<double> phase;
    std::vector<double> weights;
  };
  struct Side {
    double lo = 0.0;
    double hi = 0.0;
    double slope_lo = 0.0;  // range of phi_j' on the side
    double slope_hi = 0.0;
    std::vector<Level> ladder;  // 2^k panels at index k
  };

  int level_for(const Side& s, double a, double t) const;

  std::vector<Cap> caps_;
  std::vector<std::vector<Side>> sides_;          // per coordinate, distinct sides
  std::vector<std::vector<std::size_t>> cap_side_;  // per cap, side index per coordinate
};

}  // namespace decoup
