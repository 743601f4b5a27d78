#pragma once

#include "decoup/geometry.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace decoup {

/// Thrown for scales that are not of the form 2^{m l}, l >= 1.
class ScaleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Validates log2(scale) as m*l with l >= min_l; returns l.
int conforming_level(int scale_log2, int m, const char* name, int min_l = 1);

/// I_0 followed by every I_{k,mu}, 1 <= k <= l, 1 <= mu <= 2^{(m/2)(k-1)},
/// in increasing position. R = 2^{R_log2} must equal 2^{m l}.
std::vector<Interval> interval_family(int R_log2, int m);

/// The 2^{R_log2/2} sides of R^{-1/2} cubes in [0,1], left to right.
std::vector<Interval> cube_intervals(int R_log2);

/// Cartesian product of per-coordinate interval lists, enumerated
/// lexicographically (coordinate 0 slowest).
class CapFamily {
 public:
  CapFamily(std::vector<std::vector<Interval>> factors, int scale_log2);

  std::size_t dims() const noexcept { return factors_.size(); }
  int scale_log2() const noexcept { return scale_log2_; }
  const std::vector<std::vector<Interval>>& factors() const noexcept { return factors_; }
  /// Number of caps; saturates at UINT64_MAX.
  std::uint64_t size() const noexcept;

  Cap at(std::uint64_t index) const;
  std::vector<Cap> enumerate() const;

 private:
  std::vector<std::vector<Interval>> factors_;
  int scale_log2_;
};

/// Layout mask with the first s of n-1 coordinates carrying phases.
std::vector<bool> standard_mask(int n, int s);

/// F_n(R, m, mask): R^{-1/2} cubes on phase coordinates, interval_family elsewhere.
CapFamily cap_family(int R_log2, int m, const std::vector<bool>& phase_mask);
std::vector<Cap> cap_family(int R_log2, int m, int s, int n);

struct RegionLabel {
  std::vector<std::uint8_t> bits;  // b_{s+1}, ..., b_{n-1}
  std::string to_string() const;
};

struct Region {
  RegionLabel label;
  DyadicBox bounds;
  Box box() const;
};

/// The 2^{n-1-s} regions Omega_b split at K^{-1/m}, labels in binary order.
std::vector<Region> omega_regions(int K_log2, int m, const std::vector<bool>& phase_mask);
std::vector<Region> omega_regions(int K_log2, int m, int s, int n);

/// Coarse caps tau covering Omega_{(1,...,1)}: K^{-1/2} cubes on phase
/// coordinates and J_{lambda,iota} on monomial coordinates.
std::vector<Cap> coarse_caps(int K_log2, int m, const std::vector<bool>& phase_mask);
std::vector<Cap> coarse_caps(int K_log2, int m, int s, int n);

/// Every coarse cap over [0,1]^{n-1}, including J_0 = [0, K^{-1/m}] pieces
/// on monomial coordinates (the caps used across all Omega_b).
CapFamily coarse_cover(int K_log2, int m, const std::vector<bool>& phase_mask);

/// lambda = 2^{k-1} K^{-1/m} of a Curved coarse interval at scale K.
Dyadic coarse_lambda(const Interval& iv, int K_log2, int m);
/// iota of a Curved coarse interval (its slot).
inline std::int64_t coarse_iota(const Interval& iv) { return iv.slot; }

/// Members of family whose closure lies in the parent's closure.
std::vector<Cap> caps_in(const Cap& parent, const std::vector<Cap>& family);
std::vector<Cap> caps_in(const DyadicBox& parent, const std::vector<Cap>& family);

struct CoverReport {
  bool ok = false;
  Dyadic volume_sum;
  Dyadic domain_volume;
  /// domain_volume - volume_sum when nonnegative.
  Dyadic deficit;
  /// volume_sum - domain_volume when nonnegative.
  Dyadic excess;
  std::optional<std::pair<std::size_t, std::size_t>> overlapping_pair;
  std::optional<std::size_t> outside_domain;
  bool has_gap = false;
  std::string message;
};

/// Exact check that the caps tile the domain: volumes sum to the domain
/// volume and interiors are pairwise disjoint. Pair detection paints the
/// grid of all distinct endpoints, so cost is linear in that grid.
CoverReport verify_cover(const std::vector<Cap>& family, const DyadicBox& domain);

/// Exact cover check for a product family without enumerating it: a product
/// tiles the box iff every factor tiles its side.
CoverReport verify_cover(const CapFamily& family, const DyadicBox& domain);

}  // namespace decoup
