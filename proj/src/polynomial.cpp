#include "decoup/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace decoup {

Polynomial::Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {
  while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
}

Polynomial Polynomial::monomial(int degree, double coeff) {
  if (degree < 0) throw std::invalid_argument("Polynomial::monomial: negative degree");
  std::vector<double> c(static_cast<std::size_t>(degree) + 1, 0.0);
  c.back() = coeff;
  return Polynomial(std::move(c));
}

int Polynomial::degree() const noexcept { return static_cast<int>(c_.size()) - 1; }

double Polynomial::operator()(double t) const noexcept {
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * t + *it;
  return acc;
}

Polynomial Polynomial::derivative(int order) const {
  std::vector<double> c = c_;
  for (int k = 0; k < order; ++k) {
    if (c.empty()) break;
    std::vector<double> d(c.size() - 1);
    for (std::size_t l = 1; l < c.size(); ++l) d[l - 1] = c[l] * static_cast<double>(l);
    c = std::move(d);
  }
  return Polynomial(std::move(c));
}

Polynomial Polynomial::shifted(double offset, double scale) const {
  // Taylor expansion at offset, then scale the k-th coefficient by scale^k.
  const std::size_t n = c_.size();
  std::vector<double> out(n, 0.0);
  std::vector<double> work = c_;
  double sk = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    // work holds coefficients of p^{(k)}/k!
    double v = 0.0;
    for (auto it = work.rbegin(); it != work.rend(); ++it) v = v * offset + *it;
    out[k] = v * sk;
    sk *= scale;
    std::vector<double> next(work.size() > 0 ? work.size() - 1 : 0);
    for (std::size_t l = 1; l < work.size(); ++l) {
      next[l - 1] = work[l] * static_cast<double>(l) / static_cast<double>(k + 1);
    }
    work = std::move(next);
  }
  return Polynomial(std::move(out));
}

std::vector<double> Polynomial::roots_in(double a, double b, double tol) const {
  std::vector<double> roots;
  if (degree() <= 0) return roots;
  if (degree() == 1) {
    const double r = -c_[0] / c_[1];
    if (r >= a && r <= b) roots.push_back(r);
    return roots;
  }
  // Between consecutive critical points p is monotone: at most one root each.
  std::vector<double> knots{a};
  for (double r : derivative().roots_in(a, b, tol)) {
    if (r > knots.back()) knots.push_back(r);
  }
  if (b > knots.back()) knots.push_back(b);

  auto push = [&](double r) {
    if (roots.empty() || r - roots.back() > tol) roots.push_back(r);
  };
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    double lo = knots[i];
    double hi = knots[i + 1];
    double flo = (*this)(lo);
    const double fhi = (*this)(hi);
    if (flo == 0.0) {
      push(lo);
      continue;
    }
    if (fhi == 0.0) {
      if (i + 2 == knots.size()) push(hi);
      continue;
    }
    if ((flo < 0.0) == (fhi < 0.0)) continue;
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      const double fm = (*this)(mid);
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    push(0.5 * (lo + hi));
  }
  return roots;
}

Polynomial::Range Polynomial::range_on(double a, double b, double tol) const {
  double lo = std::min((*this)(a), (*this)(b));
  double hi = std::max((*this)(a), (*this)(b));
  for (double r : derivative().roots_in(a, b, tol)) {
    const double v = (*this)(r);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

}  // namespace decoup
