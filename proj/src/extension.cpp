#include "decoup/extension.hpp"

#include "decoup/kernels.hpp"
#include "decoup/parallel.hpp"

#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace decoup {

std::size_t TensorRule::size() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.size();
  return n;
}

TensorRule TensorRule::on_box(std::span<const std::pair<double, double>> sides, std::span<const int> panels) {
  if (sides.size() != panels.size()) throw std::invalid_argument("TensorRule::on_box: size mismatch");
  TensorRule r;
  for (std::size_t j = 0; j < sides.size(); ++j) {
    r.axes.push_back(QuadRule1D::gauss_legendre(sides[j].first, sides[j].second, panels[j]));
  }
  return r;
}

namespace {

int panels_needed(const Polynomial& phi, double lo, double hi, const Lattice& X, std::size_t j) {
  const auto [a_lo, a_hi] = X.extent(j);
  const auto [t_lo, t_hi] = X.extent(X.dims() - 1);
  return required_panels(phase_cycles(phi, lo, hi, a_lo, a_hi, t_lo, t_hi));
}

void check_dims(std::size_t rule_dims, const SurfaceSpec& surface, const Lattice& X) {
  if (rule_dims != surface.dims()) throw std::invalid_argument("quadrature rule and surface dimensions differ");
  if (X.dims() != surface.dims() + 1) throw std::invalid_argument("lattice and surface dimensions differ");
  if (surface.n() > kernels::kMaxAxes) throw std::invalid_argument("extension supports n <= 4");
}

}  // namespace

TensorRule TensorRule::for_lattice(std::span<const std::pair<double, double>> sides, const SurfaceSpec& surface,
                                   const Lattice& X) {
  check_dims(sides.size(), surface, X);
  std::vector<int> panels;
  for (std::size_t j = 0; j < sides.size(); ++j) {
    panels.push_back(panels_needed(surface.coordinate_poly(j), sides[j].first, sides[j].second, X, j));
  }
  return on_box(sides, panels);
}

GridFunction GridFunction::sample(TensorRule rule, const std::function<cplx(std::span<const double>)>& g) {
  GridFunction f;
  const std::size_t d = rule.dims();
  const std::size_t N = rule.size();
  f.values.resize(N);
  std::vector<double> xi(d);
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < d; ++j) xi[j] = rule.axes[j].nodes[idx[j]];
    f.values[i] = g(xi);
    for (std::size_t j = d; j-- > 0;) {
      if (++idx[j] < rule.axes[j].size()) break;
      idx[j] = 0;
    }
  }
  f.rule = std::move(rule);
  return f;
}

GridFunction SeparableFunction::expand() const {
  const std::size_t d = rule.dims();
  GridFunction f;
  f.rule = rule;
  f.values.assign(rule.size(), cplx{});
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    cplx s{};
    for (const auto& term : terms) {
      cplx p{1.0, 0.0};
      for (std::size_t j = 0; j < d; ++j) p *= term[j][idx[j]];
      s += p;
    }
    f.values[i] = s;
    for (std::size_t j = d; j-- > 0;) {
      if (++idx[j] < rule.axes[j].size()) break;
      idx[j] = 0;
    }
  }
  return f;
}

void check_nyquist(const TensorRule& rule, const SurfaceSpec& surface, const Lattice& X) {
  check_dims(rule.dims(), surface, X);
  for (std::size_t j = 0; j < rule.dims(); ++j) {
    const auto& a = rule.axes[j];
    const int need = panels_needed(surface.coordinate_poly(j), a.lo, a.hi, X, j);
    if (a.panels < need) {
      std::ostringstream os;
      os << "coordinate " << j << ": " << a.panels << " panel(s) on [" << a.lo << ", " << a.hi << "] but the lattice needs "
         << need;
      throw NyquistError(os.str());
    }
  }
}

SampledField extend_direct(const GridFunction& g, const SurfaceSpec& surface, std::shared_ptr<const Lattice> X) {
  if (!X) throw std::invalid_argument("extend_direct: null lattice");
  check_nyquist(g.rule, surface, *X);
  const std::size_t d = g.rule.dims();
  const std::size_t N = g.rule.size();
  if (g.values.size() != N) throw std::invalid_argument("extend_direct: values do not match the rule");

  // Flattened node coordinates, total phase and weighted coefficients.
  std::vector<std::vector<double>> axes(d + 1, std::vector<double>(N));
  std::vector<double> c_re(N);
  std::vector<double> c_im(N);
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> xi(d);
  for (std::size_t i = 0; i < N; ++i) {
    double w = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      xi[j] = g.rule.axes[j].nodes[idx[j]];
      w *= g.rule.axes[j].weights[idx[j]];
      axes[j][i] = xi[j];
    }
    axes[d][i] = surface.phase_total(xi);
    c_re[i] = w * g.values[i].real();
    c_im[i] = w * g.values[i].imag();
    for (std::size_t j = d; j-- > 0;) {
      if (++idx[j] < g.rule.axes[j].size()) break;
      idx[j] = 0;
    }
  }
  kernels::OscillatorySum s;
  s.num_axes = static_cast<int>(d + 1);
  for (std::size_t a = 0; a <= d; ++a) s.axes[a] = axes[a].data();
  s.c_re = c_re.data();
  s.c_im = c_im.data();
  s.count = N;

  SampledField f;
  f.values.resize(X->size());
  parallel_chunks(X->size(), kReduceChunk, [&](std::size_t, std::size_t b, std::size_t e) {
    std::vector<double> x(d + 1);
    for (std::size_t i = b; i < e; ++i) {
      X->point(i, x);
      f.values[i] = kernels::oscillatory_sum(s, x);
    }
  });
  f.lattice = std::move(X);
  f.provenance = "direct; nodes=" + std::to_string(N);
  return f;
}

SampledField extend_separable(const SeparableFunction& g, const SurfaceSpec& surface,
                              std::shared_ptr<const Lattice> X) {
  if (!X) throw std::invalid_argument("extend_separable: null lattice");
  if (!X->is_tensor()) throw std::invalid_argument("extend_separable needs a tensor lattice");
  check_nyquist(g.rule, surface, *X);
  const std::size_t d = g.rule.dims();
  const auto xn_axis = X->axis(d);
  const std::size_t nt = xn_axis.size();

  // tables[r][j][a * nt + t]
  std::vector<std::vector<std::vector<cplx>>> tables(g.rank(), std::vector<std::vector<cplx>>(d));
  for (std::size_t j = 0; j < d; ++j) {
    const auto& rule = g.rule.axes[j];
    const Polynomial& phi = surface.coordinate_poly(j);
    std::vector<double> ph(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) ph[i] = phi(rule.nodes[i]);
    const auto xj_axis = X->axis(j);
    for (std::size_t r = 0; r < g.rank(); ++r) {
      const auto& gj = g.terms[r].at(j);
      if (gj.size() != rule.size()) throw std::invalid_argument("extend_separable: factor does not match the rule");
      std::vector<double> c_re(rule.size());
      std::vector<double> c_im(rule.size());
      for (std::size_t i = 0; i < rule.size(); ++i) {
        c_re[i] = rule.weights[i] * gj[i].real();
        c_im[i] = rule.weights[i] * gj[i].imag();
      }
      kernels::OscillatorySum s;
      s.num_axes = 2;
      s.axes[0] = rule.nodes.data();
      s.axes[1] = ph.data();
      s.c_re = c_re.data();
      s.c_im = c_im.data();
      s.count = rule.size();
      auto& T = tables[r][j];
      T.resize(xj_axis.size() * nt);
      parallel_chunks(T.size(), kReduceChunk, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) {
          const double x[2] = {xj_axis[k / nt], xn_axis[k % nt]};
          T[k] = kernels::oscillatory_sum(s, x);
        }
      });
    }
  }

  SampledField f;
  f.values.resize(X->size());
  parallel_chunks(X->size(), kReduceChunk, [&](std::size_t, std::size_t b, std::size_t e) {
    std::vector<std::size_t> idx(d + 1);
    for (std::size_t i = b; i < e; ++i) {
      X->unravel(i, idx);
      cplx s{};
      for (std::size_t r = 0; r < g.rank(); ++r) {
        cplx p{1.0, 0.0};
        for (std::size_t j = 0; j < d; ++j) p *= tables[r][j][idx[j] * nt + idx[d]];
        s += p;
      }
      f.values[i] = s;
    }
  });
  f.lattice = std::move(X);
  f.provenance = "separable; rank=" + std::to_string(g.rank());
  return f;
}

void write_field_csv(const SampledField& f, std::ostream& os) {
  const std::size_t n = f.lattice->dims();
  for (std::size_t d = 0; d < n; ++d) os << "x" << (d + 1) << ',';
  os << "re,im\n";
  std::vector<double> x(n);
  os << std::setprecision(17);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    f.lattice->point(i, x);
    for (double v : x) os << v << ',';
    os << f.values[i].real() << ',' << f.values[i].imag() << '\n';
  }
}

}  // namespace decoup
