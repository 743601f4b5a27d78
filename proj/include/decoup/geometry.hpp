#pragma once

#include "decoup/dyadic.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace decoup {

/// How an interval arose in a decomposition.
///   Cube   - a side of an R^{-1/2} cube over an m-nondegenerate phase coordinate
///   Flat   - the degenerate piece [0, R^{-1/m}] next to the flat point
///   Curved - the slot I_{k,mu} (level k >= 1, slot mu >= 1)
enum class Role { Cube, Flat, Curved };

std::string_view role_name(Role r);

struct Interval {
  Dyadic lo;
  Dyadic hi;
  Role role = Role::Cube;
  int level = 0;          // k for Curved, 0 otherwise
  std::int64_t slot = 0;  // mu for Curved, 1-based cube index for Cube

  Dyadic length() const { return hi - lo; }
  bool contains(const Interval& inner) const { return lo <= inner.lo && inner.hi <= hi; }
  bool same_endpoints(const Interval& o) const { return lo == o.lo && hi == o.hi; }
};

/// Product of per-coordinate intervals belonging to a family at scale 2^scale_log2.
struct Cap {
  std::vector<Interval> coords;
  int scale_log2 = 0;

  std::size_t dims() const noexcept { return coords.size(); }
  Dyadic volume() const;
  /// Closed-in-closed containment.
  bool contains(const Cap& inner) const;
  std::size_t count_role(Role r) const;
};

Dyadic cap_volume(const Cap& c);

/// True iff the open interiors do not meet. Exact.
bool caps_disjoint_interiors(const Cap& a, const Cap& b);

/// Axis-aligned box with exact dyadic corners, used for partition domains.
struct DyadicBox {
  std::vector<Dyadic> lo;
  std::vector<Dyadic> hi;

  static DyadicBox unit(std::size_t dims);
  Dyadic volume() const;
  bool contains(const Cap& c) const;
};

/// Real axis-aligned box: center and strictly positive half-widths.
class Box {
 public:
  Box(std::vector<double> center, std::vector<double> half_widths);
  /// The bounding box of the ball of radius r around center.
  static Box cube(std::vector<double> center, double r);

  std::size_t dims() const noexcept { return center_.size(); }
  const std::vector<double>& center() const noexcept { return center_; }
  const std::vector<double>& half_widths() const noexcept { return half_; }
  double volume() const;
  bool contains(std::span<const double> x) const;

 private:
  std::vector<double> center_;
  std::vector<double> half_;
};

}  // namespace decoup
