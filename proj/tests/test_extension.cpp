#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "decoup/extension.hpp"
#include "decoup/lattice.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace decoup;

namespace {

// Gauss-Kronrod 31 on 4096 equal subintervals: 126976 nodes.
cplx oracle_quartic(double t) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  double re = 0.0;
  double im = 0.0;
  const int pieces = 4096;
  for (int k = 0; k < pieces; ++k) {
    const double a = static_cast<double>(k) / pieces;
    const double b = static_cast<double>(k + 1) / pieces;
    re += GK::integrate([t](double x) { return std::cos(2 * std::numbers::pi * t * std::pow(x, 4)); }, a, b, 0);
    im += GK::integrate([t](double x) { return std::sin(2 * std::numbers::pi * t * std::pow(x, 4)); }, a, b, 0);
  }
  return {re, im};
}

std::shared_ptr<const Lattice> single_point(std::vector<double> x) {
  const std::size_t n = x.size();
  return std::make_shared<const Lattice>(Lattice::tensor(std::move(x), std::vector<double>(n, 0.5), std::vector<std::size_t>(n, 1)));
}

std::vector<std::pair<double, double>> unit_sides(std::size_t d) { return std::vector<std::pair<double, double>>(d, {0.0, 1.0}); }

}  // namespace

TEST_CASE("weight") {
  const double c[2] = {1.0, -2.0};
  CHECK(weight_eval(c, c, 5.0, 2) == 1.0);
  const double r1[2] = {6.0, -2.0};
  CHECK(weight_eval(r1, c, 5.0, 2) == doctest::Approx(std::pow(2.0, -200)).epsilon(1e-12));
  const double r3[2] = {1.0, 13.0};
  CHECK(weight_eval(r3, c, 5.0, 2) == doctest::Approx(std::pow(4.0, -200)).epsilon(1e-12));
  double prev = 2.0;
  for (double r = 0.0; r < 50.0; r += 0.5) {
    const double x[2] = {1.0 + r, -2.0};
    const double w = weight_eval(x, c, 5.0, 2);
    CHECK(w <= prev);
    prev = w;
  }
  // Radial oracle for the closed form: 2 pi R^2 int_0^inf u (1+u)^{-200} du.
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double radial = 2 * std::numbers::pi * 9.0 *
                        GK::integrate([](double u) { return u * std::pow(1.0 + u, -200.0); }, 0.0, INFINITY, 15, 1e-14);
  CHECK(weight_integral(3.0, 2) == doctest::Approx(radial).epsilon(1e-10));
}

TEST_CASE("lattices") {
  const auto L = nyquist_lattice(Box::cube({0.0, 0.0}, 8.0), 0.5);
  CHECK(L.size() == 33 * 33);
  CHECK(L.extent(0).first == -8.0);
  CHECK(L.extent(1).second == 8.0);
  CHECK_THROWS_AS(nyquist_lattice(Box::cube({0.0, 0.0}, 8.0), 0.6), std::invalid_argument);
  const auto a = nyquist_lattice(Box::cube({0.0, 0.0}, 8.0), 0.5, 1000, 7);
  const auto b = nyquist_lattice(Box::cube({0.0, 0.0}, 8.0), 0.5, 1000, 7);
  std::vector<double> pa(2), pb(2);
  for (std::size_t i = 0; i < 1000; ++i) {
    a.point(i, pa);
    b.point(i, pb);
    CHECK(pa == pb);
  }
  CHECK(a.seed() == 7);

  // Each sampler integrates a known function.
  const Ball ball{{0.0, 0.0, 0.0}, 10.0};
  for (const auto& lat : {sample_ball_uniform(ball, 40000, 1), sample_ball_multiscale(ball, 40000, 2)}) {
    double vol = 0.0;
    std::vector<double> x(3);
    for (std::size_t i = 0; i < lat.size(); ++i) {
      lat.point(i, x);
      CHECK(ball.contains(x));
      vol += lat.measure(i);
    }
    CHECK(vol == doctest::Approx(ball.volume()).epsilon(0.03));
  }
  const auto W = sample_weight({0.0, 0.0}, 100.0, 20000, 3);
  double wsum = 0.0;
  std::vector<double> x(2);
  const double c[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < W.size(); ++i) {
    W.point(i, x);
    wsum += W.measure(i) * weight_eval(x, c, 100.0, 2);
  }
  CHECK(wsum == doctest::Approx(weight_integral(100.0, 2)).epsilon(1e-9));
}

TEST_CASE("trivial extension values") {
  const auto s = SurfaceSpec::monomial(3, 4);
  const auto X = single_point({0.0, 0.0, 0.0});
  const auto rule = TensorRule::for_lattice(unit_sides(2), s, *X);
  const auto one = GridFunction::sample(rule, [](std::span<const double>) { return cplx{1.0, 0.0}; });
  CHECK(std::abs(extend_direct(one, s, X).values[0] - 1.0) < 1e-14);
  const auto grid = std::make_shared<const Lattice>(nyquist_lattice(Box::cube({0.0, 0.0, 0.0}, 2.0), 0.5));
  const auto zero = GridFunction::sample(TensorRule::for_lattice(unit_sides(2), s, *grid),
                                         [](std::span<const double>) { return cplx{}; });
  for (const auto& v : extend_direct(zero, s, grid).values) CHECK(v == cplx{});
}

TEST_CASE("1-D quadrature against adaptive oracle") {
  const auto s = SurfaceSpec::monomial(2, 4);
  for (double t : {1.0, 16.0, 256.0}) {
    const auto X = single_point({0.0, t});
    const auto g = GridFunction::sample(TensorRule::for_lattice(unit_sides(1), s, *X),
                                        [](std::span<const double>) { return cplx{1.0, 0.0}; });
    const cplx got = extend_direct(g, s, X).values[0];
    const cplx want = oracle_quartic(t);
    CHECK(std::abs(got - want) / std::abs(want) <= 1e-8);
  }
}

TEST_CASE("Nyquist rule is enforced") {
  const auto s = SurfaceSpec::monomial(2, 4);
  const auto X = single_point({0.0, 256.0});
  const std::pair<double, double> side{0.0, 1.0};
  const int one = 1;
  const auto coarse = GridFunction::sample(TensorRule::on_box({&side, 1}, {&one, 1}),
                                           [](std::span<const double>) { return cplx{1.0, 0.0}; });
  CHECK_THROWS_AS(extend_direct(coarse, s, X), NyquistError);
}

namespace {

SeparableFunction random_separable(const TensorRule& rule, std::size_t rank, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SeparableFunction g;
  g.rule = rule;
  for (std::size_t r = 0; r < rank; ++r) {
    std::vector<std::vector<cplx>> term;
    for (const auto& ax : rule.axes) {
      // Smooth factor: random low-order trigonometric polynomial.
      const double a0 = u(rng), a1 = u(rng), b1 = u(rng), ph = u(rng);
      std::vector<cplx> v;
      for (double xi : ax.nodes) {
        v.emplace_back(a0 + a1 * std::cos(2 * std::numbers::pi * xi), b1 * std::sin(2 * std::numbers::pi * (xi + ph)));
      }
      term.push_back(std::move(v));
    }
    g.terms.push_back(std::move(term));
  }
  return g;
}

double max_abs_diff(const SampledField& a, const SampledField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

}  // namespace

TEST_CASE("separable and direct evaluators agree") {
  std::uint64_t seed = 100;
  for (int m : {4, 6}) {
    for (int n : {2, 3}) {
      SurfaceSpec surf = n == 3 ? SurfaceSpec(3, m, {PhaseSpec{Polynomial({0.0, 0.0, 1.0}), 2.0}})
                                : SurfaceSpec::monomial(2, m);
      const auto X = std::make_shared<const Lattice>(nyquist_lattice(Box::cube(std::vector<double>(n, 0.0), 8.0), 0.5));
      REQUIRE(X->size() == static_cast<std::size_t>(std::pow(33, n)));
      std::vector<std::pair<double, double>> sides{{0.25, 0.5}, {0.5, 0.625}};
      sides.resize(static_cast<std::size_t>(n - 1));
      const auto rule = TensorRule::for_lattice(sides, surf, *X);
      for (std::size_t rank = 1; rank <= 4; ++rank) {
        const auto g = random_separable(rule, rank, seed++);
        const auto fs = extend_separable(g, surf, X);
        const auto fd = extend_direct(g.expand(), surf, X);
        CHECK(max_abs_diff(fs, fd) <= 1e-10);
      }
    }
  }
  const auto surf = SurfaceSpec::monomial(3, 4);
  const auto X = single_point({3.0, -2.0, 5.0});
  const auto rule = TensorRule::for_lattice(unit_sides(2), surf, *X);
  const auto g = random_separable(rule, 3, 9);
  CHECK(max_abs_diff(extend_separable(g, surf, X), extend_direct(g.expand(), surf, X)) <= 1e-12);
  CHECK_THROWS_AS(extend_separable(g, surf, std::make_shared<const Lattice>(sample_ball_uniform({{0.0, 0.0, 0.0}, 2.0}, 10, 1))),
                  std::invalid_argument);
}

TEST_CASE("modulation translates the field") {
  const auto s = SurfaceSpec::monomial(2, 4);
  const auto X = std::make_shared<const Lattice>(nyquist_lattice(Box::cube({0.0, 0.0}, 6.0), 0.5));
  const auto wide = std::make_shared<const Lattice>(nyquist_lattice(Box::cube({0.0, 0.0}, 10.0), 0.5));
  const auto rule = TensorRule::for_lattice(unit_sides(1), s, *wide);
  const double v = 3.0;
  const auto g = GridFunction::sample(rule, [](std::span<const double> xi) { return cplx{1.0 + xi[0], 0.0}; });
  const auto gm = GridFunction::sample(rule, [v](std::span<const double> xi) {
    return (1.0 + xi[0]) * std::polar(1.0, 2 * std::numbers::pi * v * xi[0]);
  });
  const auto f = extend_direct(g, s, wide);
  const auto fm = extend_direct(gm, s, X);
  // E(g e(v.)) (x1, x2) = E g (x1 + v, x2).
  std::vector<double> x(2);
  double worst = 0.0;
  for (std::size_t i = 0; i < X->size(); ++i) {
    X->point(i, x);
    const auto ia = static_cast<std::size_t>(std::lround((x[0] + v + 10.0) / 0.5));
    const auto ib = static_cast<std::size_t>(std::lround((x[1] + 10.0) / 0.5));
    worst = std::max(worst, std::abs(fm.values[i] - f.values[ia * 41 + ib]));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("doubling the resolution barely changes the field") {
  const auto s = SurfaceSpec::monomial(3, 4);
  const auto X = std::make_shared<const Lattice>(nyquist_lattice(Box::cube({0.0, 0.0, 0.0}, 6.0), 0.5));
  const std::vector<std::pair<double, double>> sides{{0.5, 1.0}, {0.0, 0.5}};
  const auto base = TensorRule::for_lattice(sides, s, *X);
  std::vector<int> twice;
  for (const auto& a : base.axes) twice.push_back(2 * a.panels);
  const auto fine = TensorRule::on_box(sides, twice);
  auto g = [](std::span<const double> xi) { return cplx{std::exp(-xi[0]), xi[1]}; };
  const auto a = extend_direct(GridFunction::sample(base, g), s, X);
  const auto b = extend_direct(GridFunction::sample(fine, g), s, X);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    worst = std::max(worst, std::abs(a.values[i] - b.values[i]) / std::max(std::abs(b.values[i]), 1e-3));
  }
  CHECK(worst <= 1e-6);
}

#include "decoup/cap_basis.hpp"
#include "decoup/partition.hpp"

TEST_CASE("cap basis matches direct evaluation cap by cap") {
  const SurfaceSpec surf(3, 4, {PhaseSpec{Polynomial({0.0, 0.0, 1.0}), 2.0}});
  const auto caps = cap_family(4, 4, 1, 3);
  const auto X = std::make_shared<const Lattice>(sample_ball_multiscale({{0.0, 0.0, 0.0}, 40.0}, 200, 5));
  const CapBasis basis(surf, caps, *X);
  REQUIRE(basis.size() == caps.size());
  std::vector<cplx> u(caps.size());
  std::vector<std::vector<cplx>> all(X->size());
  std::vector<double> x(3);
  for (std::size_t i = 0; i < X->size(); ++i) {
    X->point(i, x);
    basis.evaluate(x, u);
    all[i] = u;
  }
  for (std::size_t c = 0; c < caps.size(); ++c) {
    std::vector<std::pair<double, double>> sides;
    for (const auto& iv : caps[c].coords) sides.emplace_back(iv.lo.to_double_lossy(), iv.hi.to_double_lossy());
    const auto g = GridFunction::sample(TensorRule::for_lattice(sides, surf, *X),
                                        [](std::span<const double>) { return cplx{1.0, 0.0}; });
    const auto f = extend_direct(g, surf, X);
    double worst = 0.0;
    for (std::size_t i = 0; i < X->size(); ++i) worst = std::max(worst, std::abs(f.values[i] - all[i][c]));
    // Different node sets on each side; both are within quadrature error of the integral.
    CHECK(worst <= 1e-10 * cap_volume(caps[c]).to_double_lossy());
  }
  const double far[3] = {1000.0, 0.0, 0.0};
  CHECK_THROWS_AS(basis.evaluate(far, u), NyquistError);
}
