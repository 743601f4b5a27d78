#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "decoup/analysis.hpp"
#include "decoup/partition.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace decoup;

namespace {

std::shared_ptr<const Lattice> grid(std::vector<double> anchor, double step, std::vector<std::size_t> counts) {
  const std::size_t n = anchor.size();
  return std::make_shared<const Lattice>(Lattice::tensor(std::move(anchor), std::vector<double>(n, step), std::move(counts)));
}

SampledField constant_field(std::shared_ptr<const Lattice> L, cplx c) {
  SampledField f;
  f.values.assign(L->size(), c);
  f.lattice = std::move(L);
  return f;
}

SampledField random_field(std::shared_ptr<const Lattice> L, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  SampledField f;
  f.values.resize(L->size());
  for (auto& v : f.values) v = {nd(rng), nd(rng)};
  f.lattice = std::move(L);
  return f;
}

// int_{R^2} w = 2 pi R^2 int_0^inf u (1 + u)^{-200} du, by adaptive Gauss-Kronrod.
double radial_weight_oracle(double R) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  return 2 * std::numbers::pi * R * R *
         GK::integrate([](double u) { return u * std::pow(1.0 + u, -200.0); }, 0.0, INFINITY, 15, 1e-14);
}

}  // namespace

TEST_CASE("lp norm of constants and homogeneity") {
  // 40 x 40 cells of area 1/4: total measure 400.
  auto L = grid({-9.75, -9.75}, 0.5, {40, 40});
  const Box all({0.0, 0.0}, {10.0, 10.0});
  for (double p : {1.0, 2.0, 4.0, 6.5}) {
    const auto est = lp_norm(constant_field(L, {3.0, 4.0}), p, all);
    CHECK(est.points == 1600);
    CHECK(est.value == doctest::Approx(5.0 * std::pow(400.0, 1.0 / p)).epsilon(1e-12));
  }
  const auto f = random_field(L, 3);
  SampledField g = f;
  const cplx c{-2.0, 1.5};
  for (auto& v : g.values) v *= c;
  for (double p : {2.0, 4.0, 6.0}) {
    CHECK(lp_norm(g, p, all).value == doctest::Approx(std::abs(c) * lp_norm(f, p, all).value).epsilon(1e-12));
  }
  CHECK_THROWS_AS(lp_norm(f, 0.5, all), std::invalid_argument);
}

TEST_CASE("lp norm is monotone in p on a probability measure") {
  const std::size_t N = 5000;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> pts(2 * N);
  for (auto& x : pts) x = u(rng);
  auto L = std::make_shared<const Lattice>(Lattice::explicit_points(2, pts, std::vector<double>(N, 1.0 / N), 11, "test"));
  const auto f = random_field(L, 5);
  const Box all({0.0, 0.0}, {1.0, 1.0});
  double prev = 0.0;
  for (double p : {1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0}) {
    const double v = lp_norm(f, p, all).value;
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("Monte Carlo norm is stable under doubling the sample") {
  // |f|^4 for f(x) = 1 + |x|^2 on the unit ball, estimated with N and 2N points.
  const Ball ball{{0.0, 0.0}, 1.0};
  auto field = [](std::shared_ptr<const Lattice> L) {
    SampledField f;
    f.values.resize(L->size());
    double x[2];
    for (std::size_t i = 0; i < L->size(); ++i) {
      L->point(i, x);
      f.values[i] = 1.0 + x[0] * x[0] + x[1] * x[1];
    }
    f.lattice = std::move(L);
    return f;
  };
  const auto a = lp_norm(field(std::make_shared<const Lattice>(sample_ball_uniform(ball, 20000, 1))), 4.0, ball);
  const auto b = lp_norm(field(std::make_shared<const Lattice>(sample_ball_uniform(ball, 40000, 2))), 4.0, ball);
  CHECK(a.std_error > 0.0);
  CHECK(std::abs(a.value - b.value) <= 3.0 * std::hypot(a.std_error, b.std_error));
  // Closed form: int_B (1 + r^2)^4 = 2 pi int_0^1 (1 + r^2)^4 r dr = pi (2^5 - 1) / 5.
  const double exact = std::pow(std::numbers::pi * 31.0 / 5.0, 0.25);
  CHECK(std::abs(b.value - exact) <= 4.0 * b.std_error);
}

TEST_CASE("L2 norm of a single cap extension matches the cap's mass") {
  // For each fixed x_n, x' -> E g(x', x_n) has L2 norm ||g||_2. Sampling at step 1/2
  // is exact for |E g|^2 because g lives on [1/2, 1].
  const SurfaceSpec surface = SurfaceSpec::monomial(2, 4);
  const std::vector<std::pair<double, double>> sides{{0.5, 1.0}};
  auto L = std::make_shared<const Lattice>(
      Lattice::tensor({-256.0, 0.0}, {0.5, 1.0}, {1025, 1}));
  const auto rule = TensorRule::for_lattice(sides, surface, *L);
  const auto g = GridFunction::sample(rule, [](std::span<const double>) { return cplx{1.0, 0.0}; });
  const auto u = extend_direct(g, surface, L);
  const double l2 = lp_norm(u, 2.0, Box({0.0, 0.0}, {257.0, 0.5})).value;
  CHECK(l2 == doctest::Approx(std::sqrt(0.5)).epsilon(0.1));
}

TEST_CASE("weighted norms") {
  const std::vector<double> c{0.0, 0.0};
  const double R = 16.0;

  SUBCASE("coverage is enforced") {
    auto small = grid({-8.0, -8.0}, 0.5, {33, 33});
    CHECK_THROWS_AS(weighted_lp_norm(constant_field(small, 1.0), 2.0, c, R), std::invalid_argument);
    auto L = std::make_shared<const Lattice>(sample_ball_uniform(Ball{c, 64.0}, 100, 1));
    CHECK_THROWS_AS(weighted_lp_norm(constant_field(L, 1.0), 2.0, c, R), std::invalid_argument);
  }

  SUBCASE("constant field against the radial oracle") {
    auto L = std::make_shared<const Lattice>(sample_weight(c, R, 4096, 9));
    for (double p : {2.0, 4.0, 6.0}) {
      const auto est = weighted_lp_norm(constant_field(L, 2.0), p, c, R);
      CHECK(est.value == doctest::Approx(2.0 * std::pow(radial_weight_oracle(R), 1.0 / p)).epsilon(1e-9));
    }
    // A tensor lattice at the weight-resolving step agrees to within 1%.
    const double h = weight_step(4.0, 2, 0.5);
    const auto n = static_cast<std::size_t>(std::floor(32.0 / h)) + 1;
    auto T = std::make_shared<const Lattice>(nyquist_lattice(Box::cube(c, 16.0), h));
    CHECK(T->counts()[0] == n);
    const auto est = weighted_lp_norm(constant_field(T, 1.0), 1.0, c, 4.0);
    CHECK(est.value == doctest::Approx(radial_weight_oracle(4.0)).epsilon(0.01));
  }

  SUBCASE("zero field and the bound w <= 1") {
    auto T = grid({-64.0, -64.0}, 0.5, {257, 257});
    CHECK(weighted_lp_norm(constant_field(T, 0.0), 4.0, c, R).value == 0.0);
    const auto f = random_field(T, 17);
    for (double p : {2.0, 4.0}) {
      CHECK(weighted_lp_norm(f, p, c, R).value <= lp_norm(f, p, Box::cube(c, 64.0)).value);
    }
  }
}

TEST_CASE("predicted sharpness exponents") {
  CHECK(predicted_sharpness_exponent(3, 4.0) == doctest::Approx(0.0));
  CHECK(predicted_sharpness_exponent(2, 6.0) == doctest::Approx(0.0));
  CHECK(predicted_sharpness_exponent(2, 8.0) == doctest::Approx(1.0 / 16));
  CHECK(predicted_sharpness_exponent(2, 12.0) == doctest::Approx(1.0 / 8));
}

TEST_CASE("fit_slope") {
  std::vector<double> x{4, 8, 12, 16};
  std::vector<double> y;
  for (double v : x) y.push_back(std::log2(std::pow(std::exp2(v), 0.125)) + 0.3);
  const auto fit = fit_slope(x, y);
  CHECK(fit.slope == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(fit.residual < 1e-12);
  const auto flat = fit_slope(x, {1.5, 1.5, 1.5, 1.5});
  CHECK(std::abs(flat.slope) < 1e-15);
  CHECK_THROWS_AS(fit_slope({4, 8}, {1, 2}), std::invalid_argument);
}

TEST_CASE("families and ratio edge cases") {
  CHECK(parse_family("random-phase") == Family::RandomPhase);
  CHECK(parse_family("focusing") == Family::Focusing);
  CHECK(parse_family("single-cap") == Family::SingleCap);
  CHECK_THROWS_AS(parse_family("gaussian"), std::invalid_argument);
  const auto a = family_coefficients(Family::RandomPhase, 10, 4);
  CHECK(a == family_coefficients(Family::RandomPhase, 10, 4));
  for (auto z : a) CHECK(std::abs(z) == doctest::Approx(1.0).epsilon(1e-14));
  const auto one = family_coefficients(Family::SingleCap, 10, 13);
  for (std::size_t i = 0; i < one.size(); ++i) CHECK(one[i] == cplx(i == 3 ? 1.0 : 0.0));
  CHECK(std::isnan(safe_ratio(0.0, 0.0)));
  CHECK(std::isnan(safe_ratio(1.0, 0.0)));
}

TEST_CASE("decoupling ratio") {
  RatioConfig cfg;
  cfg.n = 2;
  cfg.m = 4;
  cfg.R_log2 = 4;
  cfg.ps = {2.0, 4.0, 6.0};
  cfg.lhs_plan.mode = LatticePlan::Mode::Tensor;
  cfg.rhs_plan.mode = LatticePlan::Mode::MonteCarlo;
  cfg.rhs_plan.mc_points = 1 << 14;
  cfg.trial_seeds = {1, 2};

  SUBCASE("invariant under scaling g") {
    const auto rows = decoupling_ratio(cfg);
    const auto caps = cap_family(cfg.R_log2, cfg.m, surface_for(cfg).phase_mask()).enumerate();
    const SurfaceSpec surface = surface_for(cfg);
    const Ball ball{{0.0, 0.0}, 16.0};
    NormSide lhs{std::make_shared<const Lattice>(plan_ball_lattice(ball, cfg.lhs_plan)), ball, false, {}, 1.0};
    NormSide rhs{std::make_shared<const Lattice>(plan_weight_lattice({0.0, 0.0}, 16.0, cfg.rhs_plan)), std::nullopt,
                 true, {0.0, 0.0}, 16.0};
    auto base = family_coefficients(Family::RandomPhase, caps.size(), 1);
    auto scaled = base;
    for (auto& z : scaled) z *= cplx(0.0, -7.5);
    std::vector<cplx> zero(caps.size(), 0.0);
    const auto sums = accumulate_decoupling(surface, caps, {base, scaled, zero}, cfg.ps, lhs, rhs);
    for (std::size_t k = 0; k < cfg.ps.size(); ++k) {
      const double r0 = safe_ratio(sums.lhs_norm(0, k), sums.rhs_norm(base, k));
      const double r1 = safe_ratio(sums.lhs_norm(1, k), sums.rhs_norm(scaled, k));
      CHECK(r1 == doctest::Approx(r0).epsilon(1e-10));
      CHECK(rows[2 * k].ratio == doctest::Approx(r0).epsilon(1e-10));
      CHECK(std::isnan(safe_ratio(sums.lhs_norm(2, k), sums.rhs_norm(zero, k))));
    }
  }

  SUBCASE("single cap matches separately computed norms") {
    cfg.family = Family::SingleCap;
    cfg.trial_seeds = {5};
    const auto rows = decoupling_ratio(cfg);
    const SurfaceSpec surface = surface_for(cfg);
    const auto caps = cap_family(cfg.R_log2, cfg.m, surface.phase_mask()).enumerate();
    const Cap& theta = caps[5 % caps.size()];
    std::vector<std::pair<double, double>> sides;
    for (const auto& iv : theta.coords) sides.emplace_back(iv.lo.to_double_lossy(), iv.hi.to_double_lossy());
    const Ball ball{{0.0, 0.0}, 16.0};
    auto one = [](std::span<const double>) { return cplx{1.0, 0.0}; };
    auto XL = std::make_shared<const Lattice>(plan_ball_lattice(ball, cfg.lhs_plan));
    const auto uL = extend_direct(GridFunction::sample(TensorRule::for_lattice(sides, surface, *XL), one), surface, XL);
    auto XR = std::make_shared<const Lattice>(plan_weight_lattice({0.0, 0.0}, 16.0, cfg.rhs_plan));
    const auto uR = extend_direct(GridFunction::sample(TensorRule::for_lattice(sides, surface, *XR), one), surface, XR);
    const std::vector<double> c{0.0, 0.0};
    for (std::size_t k = 0; k < cfg.ps.size(); ++k) {
      CHECK(rows[k].lhs == doctest::Approx(lp_norm(uL, cfg.ps[k], ball).value).epsilon(1e-9));
      CHECK(rows[k].rhs == doctest::Approx(weighted_lp_norm(uR, cfg.ps[k], c, 16.0).value).epsilon(1e-9));
    }
  }

  SUBCASE("near-orthogonality at p = 2") {
    // ||sum_theta u_theta||_2^2 is close to sum_theta ||u_theta||_2^2 on B_R.
    const SurfaceSpec surface = surface_for(cfg);
    const auto caps = cap_family(cfg.R_log2, cfg.m, surface.phase_mask()).enumerate();
    const Ball ball{{0.0, 0.0}, 16.0};
    NormSide side{std::make_shared<const Lattice>(plan_ball_lattice(ball, cfg.lhs_plan)), ball, false, {}, 1.0};
    for (std::uint64_t seed : {1, 2, 3}) {
      const auto a = family_coefficients(Family::RandomPhase, caps.size(), seed);
      const auto sums = accumulate_decoupling(surface, caps, {a}, {2.0}, side, side);
      const double r = sums.lhs_norm(0, 0) / sums.rhs_norm(a, 0);
      CHECK(r >= 0.5);
      CHECK(r <= 2.0);
    }
  }
}

TEST_CASE("trivial decoupling with a single coarse cap") {
  LatticePlan plan;
  plan.mode = LatticePlan::Mode::Tensor;
  const auto res = trivial_decoupling_check(Family::RandomPhase, {1, 2}, 2, 4, 0, 4, {4.0, 6.0}, plan);
  CHECK(res.num_tau == 1);
  for (const auto& r : res.rows) CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-12));
}
