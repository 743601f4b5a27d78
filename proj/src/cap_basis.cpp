#include "decoup/cap_basis.hpp"

#include "decoup/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace decoup {

namespace {

int ceil_log2(int v) {
  int k = 0;
  while ((1 << k) < v) ++k;
  return k;
}

}  // namespace

CapBasis::CapBasis(const SurfaceSpec& surface, std::vector<Cap> caps, const Lattice& X) : caps_(std::move(caps)) {
  const std::size_t d = surface.dims();
  if (X.dims() != d + 1) throw std::invalid_argument("CapBasis: lattice and surface dimensions differ");
  if (caps_.empty()) throw std::invalid_argument("CapBasis: empty cap list");
  sides_.resize(d);
  cap_side_.resize(caps_.size(), std::vector<std::size_t>(d));
  const auto [t_lo, t_hi] = X.extent(d);
  for (std::size_t j = 0; j < d; ++j) {
    const Polynomial& phi = surface.coordinate_poly(j);
    const Polynomial dphi = phi.derivative();
    const auto [a_lo, a_hi] = X.extent(j);
    std::map<std::pair<double, double>, std::size_t> seen;
    for (std::size_t c = 0; c < caps_.size(); ++c) {
      const Cap& cap = caps_[c];
      if (cap.dims() != d) throw std::invalid_argument("CapBasis: cap and surface dimensions differ");
      const double lo = cap.coords[j].lo.to_double_lossy();
      const double hi = cap.coords[j].hi.to_double_lossy();
      auto [it, fresh] = seen.emplace(std::make_pair(lo, hi), sides_[j].size());
      cap_side_[c][j] = it->second;
      if (!fresh) continue;
      Side s;
      s.lo = lo;
      s.hi = hi;
      const auto r = dphi.range_on(lo, hi);
      s.slope_lo = r.lo;
      s.slope_hi = r.hi;
      const int top = ceil_log2(required_panels(phase_cycles(phi, lo, hi, a_lo, a_hi, t_lo, t_hi)));
      for (int k = 0; k <= top; ++k) {
        const auto q = QuadRule1D::gauss_legendre(lo, hi, 1 << k);
        Level L;
        L.nodes = q.nodes;
        L.weights = q.weights;
        L.phase.resize(q.nodes.size());
        for (std::size_t i = 0; i < q.nodes.size(); ++i) L.phase[i] = phi(q.nodes[i]);
        s.ladder.push_back(std::move(L));
      }
      sides_[j].push_back(std::move(s));
    }
  }
}

int CapBasis::level_for(const Side& s, double a, double t) const {
  const double f = std::max(std::abs(a + t * s.slope_lo), std::abs(a + t * s.slope_hi));
  const int k = ceil_log2(required_panels(f * (s.hi - s.lo)));
  if (k >= static_cast<int>(s.ladder.size())) {
    std::ostringstream os;
    os << "point (a=" << a << ", t=" << t << ") lies outside the extents the cap basis was built for";
    throw NyquistError(os.str());
  }
  return k;
}

void CapBasis::evaluate(std::span<const double> x, std::span<cplx> u) const {
  const std::size_t d = dims();
  const double t = x[d];
  // Side integrals, per coordinate.
  thread_local std::vector<std::vector<cplx>> vals;
  vals.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    vals[j].resize(sides_[j].size());
    for (std::size_t k = 0; k < sides_[j].size(); ++k) {
      const Side& s = sides_[j][k];
      const Level& L = s.ladder[static_cast<std::size_t>(level_for(s, x[j], t))];
      kernels::OscillatorySum os;
      os.num_axes = 2;
      os.axes[0] = L.nodes.data();
      os.axes[1] = L.phase.data();
      os.c_re = L.weights.data();
      os.count = L.nodes.size();
      const double xy[2] = {x[j], t};
      vals[j][k] = kernels::oscillatory_sum(os, xy);
    }
  }
  for (std::size_t c = 0; c < caps_.size(); ++c) {
    cplx p = vals[0][cap_side_[c][0]];
    for (std::size_t j = 1; j < d; ++j) p *= vals[j][cap_side_[c][j]];
    u[c] = p;
  }
}

std::size_t CapBasis::nodes_at(std::span<const double> x) const {
  std::size_t total = 0;
  const std::size_t d = dims();
  for (std::size_t j = 0; j < d; ++j) {
    for (const Side& s : sides_[j]) total += s.ladder[static_cast<std::size_t>(level_for(s, x[j], x[d]))].nodes.size();
  }
  return total;
}

}  // namespace decoup
