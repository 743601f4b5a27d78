#include "decoup/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>

namespace decoup {

namespace {

struct Reference {
  double x[kNodesPerPanel];
  double w[kNodesPerPanel];
};

const Reference& reference() {
  static const Reference ref = [] {
    using G = boost::math::quadrature::gauss<double, kNodesPerPanel>;
    Reference r{};
    const auto& abs = G::abscissa();
    const auto& wts = G::weights();
    // Boost stores the nonnegative half; mirror it onto [-1, 1].
    int i = 0;
    for (std::size_t k = abs.size(); k-- > 0;) {
      r.x[i] = -abs[k];
      r.w[i] = wts[k];
      ++i;
    }
    for (std::size_t k = 0; k < abs.size(); ++k) {
      if (abs[k] == 0.0) continue;
      r.x[i] = abs[k];
      r.w[i] = wts[k];
      ++i;
    }
    return r;
  }();
  return ref;
}

}  // namespace

QuadRule1D QuadRule1D::gauss_legendre(double lo, double hi, int panels) {
  if (!(hi > lo)) throw std::invalid_argument("gauss_legendre: empty interval");
  if (panels < 1) throw std::invalid_argument("gauss_legendre: need at least one panel");
  const auto& ref = reference();
  QuadRule1D q;
  q.lo = lo;
  q.hi = hi;
  q.panels = panels;
  q.nodes.reserve(static_cast<std::size_t>(panels) * kNodesPerPanel);
  q.weights.reserve(q.nodes.capacity());
  const double h = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * h;
    for (int k = 0; k < kNodesPerPanel; ++k) {
      q.nodes.push_back(mid + 0.5 * h * ref.x[k]);
      q.weights.push_back(0.5 * h * ref.w[k]);
    }
  }
  return q;
}

int required_panels(double cycles) {
  if (!std::isfinite(cycles)) throw NyquistError("non-finite phase bound");
  int p = 1;
  while (p * kMaxCyclesPerPanel < cycles) {
    if (p > (1 << 29)) throw NyquistError("phase bound needs more than 2^30 panels");
    p *= 2;
  }
  return p;
}

double phase_cycles(const Polynomial& phi, double lo, double hi, double a_lo, double a_hi, double t_lo,
                    double t_hi) {
  const auto d = phi.derivative().range_on(lo, hi);
  double best = 0.0;
  for (double a : {a_lo, a_hi}) {
    for (double t : {t_lo, t_hi}) {
      for (double s : {d.lo, d.hi}) best = std::max(best, std::abs(a + t * s));
    }
  }
  return best * (hi - lo);
}

}  // namespace decoup
