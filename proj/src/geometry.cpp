#include "decoup/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace decoup {

std::string_view role_name(Role r) {
  switch (r) {
    case Role::Cube: return "cube";
    case Role::Flat: return "flat";
    case Role::Curved: return "curved";
  }
  return "?";
}

Dyadic Cap::volume() const {
  Dyadic v = Dyadic::from_int(1);
  for (const auto& iv : coords) v *= iv.length();
  return v;
}

bool Cap::contains(const Cap& inner) const {
  if (inner.dims() != dims()) return false;
  for (std::size_t j = 0; j < dims(); ++j) {
    if (!coords[j].contains(inner.coords[j])) return false;
  }
  return true;
}

std::size_t Cap::count_role(Role r) const {
  std::size_t n = 0;
  for (const auto& iv : coords) n += iv.role == r ? 1 : 0;
  return n;
}

Dyadic cap_volume(const Cap& c) { return c.volume(); }

bool caps_disjoint_interiors(const Cap& a, const Cap& b) {
  if (a.dims() != b.dims()) throw std::invalid_argument("caps_disjoint_interiors: dimension mismatch");
  for (std::size_t j = 0; j < a.dims(); ++j) {
    if (a.coords[j].hi <= b.coords[j].lo || b.coords[j].hi <= a.coords[j].lo) return true;
  }
  return false;
}

DyadicBox DyadicBox::unit(std::size_t dims) {
  return DyadicBox{std::vector<Dyadic>(dims), std::vector<Dyadic>(dims, Dyadic::from_int(1))};
}

Dyadic DyadicBox::volume() const {
  Dyadic v = Dyadic::from_int(1);
  for (std::size_t j = 0; j < lo.size(); ++j) v *= hi[j] - lo[j];
  return v;
}

bool DyadicBox::contains(const Cap& c) const {
  if (c.dims() != lo.size()) return false;
  for (std::size_t j = 0; j < lo.size(); ++j) {
    if (c.coords[j].lo < lo[j] || hi[j] < c.coords[j].hi) return false;
  }
  return true;
}

Box::Box(std::vector<double> center, std::vector<double> half_widths)
    : center_(std::move(center)), half_(std::move(half_widths)) {
  if (center_.size() != half_.size() || center_.empty()) {
    throw std::invalid_argument("Box: center and half-widths must have equal nonzero length");
  }
  for (double h : half_) {
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("Box: half-widths must be positive");
  }
}

Box Box::cube(std::vector<double> center, double r) {
  std::vector<double> h(center.size(), r);
  return Box(std::move(center), std::move(h));
}

double Box::volume() const {
  double v = 1.0;
  for (double h : half_) v *= 2.0 * h;
  return v;
}

bool Box::contains(std::span<const double> x) const {
  if (x.size() != dims()) return false;
  for (std::size_t j = 0; j < dims(); ++j) {
    if (std::abs(x[j] - center_[j]) > half_[j]) return false;
  }
  return true;
}

}  // namespace decoup
