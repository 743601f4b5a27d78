#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "decoup/dyadic.hpp"
#include "decoup/geometry.hpp"
#include "decoup/partition.hpp"
#include "decoup/polynomial.hpp"
#include "decoup/surface.hpp"

#include <boost/rational.hpp>

#include <cmath>
#include <random>

using namespace decoup;
using Q = boost::rational<BigInt>;

namespace {

Dyadic d(const char* s) { return Dyadic::parse(s); }

Q as_q(const Dyadic& x) {
  if (x.exponent() >= 0) return Q(x.mantissa() << static_cast<unsigned>(x.exponent()));
  return Q(x.mantissa(), BigInt(1) << static_cast<unsigned>(-x.exponent()));
}

Interval iv(const char* lo, const char* hi, Role r = Role::Cube) { return Interval{d(lo), d(hi), r, 0, 0}; }

Cap cap2(Interval a, Interval b) { return Cap{{std::move(a), std::move(b)}, 0}; }

}  // namespace

TEST_CASE("dyadic arithmetic") {
  CHECK(d("1*2^-1") + d("1*2^-1") == Dyadic::from_int(1));
  CHECK(Dyadic() + d("3*2^-3") == d("3*2^-3"));
  CHECK(d("1*2^-2") + d("1*2^-3") == d("3*2^-3"));
  CHECK(d("1*2^-1") * d("1*2^-1") == d("1*2^-2"));
  CHECK((d("5*2^-7") * Dyadic()).is_zero());
  CHECK(d("3*2^-2") * d("1*2^-1") == d("3*2^-3"));
  CHECK(Dyadic(BigInt(12), 3) == d("3*2^5"));
  CHECK(Dyadic(BigInt(0), 9).exponent() == 0);
  CHECK(d("3*2^-3").to_string() == "3*2^-3");
  CHECK(d("8") == d("1*2^3"));
  CHECK_THROWS_AS(d("x*2^3"), std::invalid_argument);
  CHECK_THROWS_AS(d("3*2^"), std::invalid_argument);
  CHECK_THROWS_AS(d("1*2^-1") - d("1"), std::domain_error);
  CHECK(d("1*2^-3") < d("1*2^-2"));
  CHECK(exact_div(d("3*2^-3"), d("1*2^-1")) == d("3*2^-2"));
  CHECK_THROWS_AS(exact_div(d("1"), d("3")), std::domain_error);
  CHECK(d("1*2^-500").to_double_lossy() == std::ldexp(1.0, -500));
}

TEST_CASE("dyadic round trips against rational oracle") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::uint64_t> mant(0, 1u << 20);
  std::uniform_int_distribution<int> ex(-80, 40);
  for (int i = 0; i < 2000; ++i) {
    const Dyadic a(BigInt(mant(rng)), ex(rng));
    const Dyadic b(BigInt(mant(rng) | 1), ex(rng));
    CHECK((a + b) - b == a);
    CHECK(exact_div(a * b, b) == a);
    CHECK(as_q(a + b) == as_q(a) + as_q(b));
    CHECK(as_q(a * b) == as_q(a) * as_q(b));
    CHECK((a < b) == (as_q(a) < as_q(b)));
    const Dyadic c(a.mantissa(), a.exponent());
    CHECK(c == a);
    CHECK(Dyadic::parse(a.to_string()) == a);
  }
}

TEST_CASE("cap volume and disjointness") {
  CHECK(cap_volume(cap2(iv("1*2^-1", "1*2^-1"), iv("0", "1*2^-1"))).is_zero());
  CHECK(cap_volume(cap2(iv("0", "1*2^-1"), iv("0", "1*2^-1"))) == d("1*2^-2"));
  CHECK(cap_volume(cap2(iv("1*2^-1", "5*2^-3"), iv("0", "1*2^-2"))) == d("1*2^-5"));
  const auto a = cap2(iv("0", "1*2^-2"), iv("0", "1*2^-2"));
  CHECK(caps_disjoint_interiors(a, cap2(iv("1*2^-2", "1*2^-1"), iv("0", "1*2^-2"))));
  CHECK_FALSE(caps_disjoint_interiors(a, a));
  CHECK_FALSE(caps_disjoint_interiors(a, cap2(iv("1*2^-3", "3*2^-3"), iv("0", "1*2^-2"))));
  CHECK_THROWS(Box({0.0}, {0.0}));
}

TEST_CASE("polynomial ranges") {
  const Polynomial p({0.0, -1.0, 0.0, 1.0});  // t^3 - t
  const auto r = p.range_on(0.0, 1.0);
  CHECK(r.lo == doctest::Approx(-2.0 / (3.0 * std::sqrt(3.0))).epsilon(1e-12));
  CHECK(r.hi == doctest::Approx(0.0));
  const auto q = Polynomial::monomial(4).shifted(0.5, 0.5);
  for (double t : {0.0, 0.3, 1.0}) CHECK(q(t) == doctest::Approx(std::pow(0.5 + 0.5 * t, 4)));
  CHECK(Polynomial({1.0, 2.0, 0.0}).degree() == 1);
}

TEST_CASE("surface") {
  const auto s0 = SurfaceSpec::monomial(3, 4);
  const double z[2] = {0.0, 0.0};
  const double o[2] = {1.0, 1.0};
  CHECK(s0.phase_total(z) == 0.0);
  CHECK(s0.phase_total(o) == 2.0);
  const SurfaceSpec s1(3, 4, {PhaseSpec{Polynomial({0.0, 0.0, 1.0}), 2.0}});
  const double h[2] = {0.5, 0.5};
  CHECK(s1.phase_total(h) == doctest::Approx(0.3125).epsilon(1e-15));
  const double one[1] = {1.0};
  CHECK_THROWS(s0.phase_total(one));
  const double x10[2] = {1.0, 0.0};
  CHECK(s0.graph_point(x10) == std::vector<double>{1.0, 0.0, 1.0});
  const double half[1] = {0.5};
  CHECK(SurfaceSpec::monomial(2, 6).graph_point(half)[1] == 1.0 / 64.0);

  for (int m : {4, 6, 8}) CHECK(check_m_nondegenerate({Polynomial({0.0, 0.0, 1.0}), 2.0}, m, 0.5).ok);
  const auto bad = check_m_nondegenerate({Polynomial::monomial(4), 24.0}, 4, 0.5);
  CHECK_FALSE(bad.ok);
  CHECK(bad.violated_order == 2);
  const auto psi = PhaseSpec{Polynomial::monomial(4).shifted(0.5, 0.5), 48.0};
  // 16[(1/2+eta/2)^4 - 1/16 - eta/4]
  std::vector<double> c = psi.poly.coeffs();
  c[0] -= 1.0 / 16.0;
  c[1] -= 0.25;
  for (double& v : c) v *= 16.0;
  const auto rep = check_m_nondegenerate({Polynomial(c), 48.0}, 4, 0.25);
  CHECK(rep.ok);
  CHECK(rep.second_lo == doctest::Approx(12.0).epsilon(1e-14));
  CHECK(rep.second_hi == doctest::Approx(48.0).epsilon(1e-14));
  CHECK_THROWS_AS(check_m_nondegenerate({Polynomial::monomial(5), 1.0}, 4, 0.5), std::invalid_argument);
  CHECK_THROWS(SurfaceSpec(3, 5, std::vector<PhaseSpec>{}));

  const auto js = surface_to_json(s1);
  const auto back = surface_from_json(js);
  CHECK(back.s() == 1);
  CHECK(back.phase_total(h) == s1.phase_total(h));
}

namespace {

// Independent rational enumeration of I_0 and I_{k,mu}.
std::vector<std::pair<Q, Q>> oracle_intervals(int m, int l) {
  std::vector<std::pair<Q, Q>> out;
  const Q r_inv_m(1, BigInt(1) << l);  // R^{-1/m} = 2^{-l}
  out.emplace_back(Q(0), r_inv_m);
  for (int k = 1; k <= l; ++k) {
    const Q base = Q(BigInt(1) << (k - 1)) * r_inv_m;
    // length 2^{-(m-2)(k-1)/2} R^{-1/m}
    const Q len = r_inv_m / Q(BigInt(1) << ((m - 2) * (k - 1) / 2));
    const long count = 1L << (m / 2 * (k - 1));
    for (long mu = 1; mu <= count; ++mu) out.emplace_back(base + Q(mu - 1) * len, base + Q(mu) * len);
  }
  return out;
}

}  // namespace

TEST_CASE("interval family") {
  for (int m : {4, 6}) {
    for (int l = 1; l <= 3; ++l) {
      const auto fam = interval_family(m * l, m);
      const auto want = oracle_intervals(m, l);
      REQUIRE(fam.size() == want.size());
      for (std::size_t i = 0; i < fam.size(); ++i) {
        CHECK(as_q(fam[i].lo) == want[i].first);
        CHECK(as_q(fam[i].hi) == want[i].second);
      }
      CHECK(want.back().second == Q(1));
    }
  }
  CHECK(interval_family(4, 4).size() == 2);
  CHECK(interval_family(8, 4).size() == 6);
  CHECK(interval_family(12, 4).size() == 22);
  const auto f8 = interval_family(8, 4);
  CHECK(f8[2].lo == d("1*2^-1"));
  CHECK(f8[2].hi == d("5*2^-3"));
  CHECK(f8[2].role == Role::Curved);
  CHECK(f8[0].role == Role::Flat);
  CHECK_THROWS_AS(interval_family(6, 4), ScaleError);
  CHECK_THROWS_AS(interval_family(0, 4), ScaleError);
}

TEST_CASE("cap families and covers") {
  CHECK(cap_family(8, 4, 0, 3).size() == 36);
  CHECK(cap_family(8, 4, 1, 3).size() == 96);
  CHECK(cap_family(4, 4, 0, 2).size() == 2);
  const auto fam = cap_family(8, 4, 0, 3);
  const auto dom = DyadicBox::unit(2);
  CHECK(verify_cover(fam, dom).ok);

  auto missing = fam;
  const auto target = cap2(iv("1*2^-1", "5*2^-3"), iv("0", "1*2^-2"));
  std::erase_if(missing, [&](const Cap& c) {
    return c.coords[0].same_endpoints(target.coords[0]) && c.coords[1].same_endpoints(target.coords[1]);
  });
  REQUIRE(missing.size() == 35);
  const auto rm = verify_cover(missing, dom);
  CHECK_FALSE(rm.ok);
  CHECK(rm.deficit == d("1*2^-5"));

  auto dup = fam;
  dup.push_back(fam[5]);
  const auto rd = verify_cover(dup, dom);
  CHECK_FALSE(rd.ok);
  CHECK(rd.overlapping_pair.has_value());

  CHECK(verify_cover(cap_family(12, 4, standard_mask(4, 1)), DyadicBox::unit(3)).ok);
}

TEST_CASE("regions and coarse caps") {
  const auto r = omega_regions(4, 4, 0, 3);
  CHECK(r.size() == 4);
  CHECK(r[0].bounds.hi[0] == d("1*2^-1"));
  const auto r2 = omega_regions(8, 4, 0, 2);
  REQUIRE(r2.size() == 2);
  CHECK(r2[1].bounds.lo[0] == d("1*2^-2"));
  CHECK(omega_regions(8, 4, 2, 3).size() == 1);
  CHECK(coarse_caps(4, 4, 0, 2).size() == 1);
  CHECK(coarse_caps(8, 4, 0, 2).size() == 5);
  CHECK(coarse_caps(8, 4, 0, 3).size() == 25);

  const auto curved = interval_family(8, 4);
  const auto cc = coarse_caps(8, 4, 0, 2);
  std::size_t j = 0;
  for (const auto& i : curved) {
    if (i.role != Role::Curved) continue;
    REQUIRE(j < cc.size());
    CHECK(cc[j].coords[0].same_endpoints(i));
    ++j;
  }
  CHECK(coarse_lambda(cc[0].coords[0], 8, 4) == d("1*2^-2"));
  CHECK(coarse_lambda(cc[1].coords[0], 8, 4) == d("1*2^-1"));

  const auto fam = interval_family(8, 4);
  std::vector<Cap> fam1;
  for (const auto& i : fam) fam1.push_back(Cap{{i}, 8});
  const Cap parent{{iv("1*2^-1", "1")}, 4};
  CHECK(caps_in(parent, fam1).size() == 4);
  CHECK(caps_in(Cap{{iv("0", "1*2^-2")}, 4}, fam1).size() == 1);
  CHECK(caps_in(DyadicBox::unit(1), fam1).size() == fam1.size());
}

TEST_CASE("nesting of fine caps in coarse cover") {
  for (int m : {4, 6}) {
    const auto mask = standard_mask(3, 0);
    const auto coarse = coarse_cover(m, m, mask).enumerate();
    const auto fine = cap_family(2 * m, m, mask).enumerate();
    std::size_t total = 0;
    for (const auto& c : coarse) total += caps_in(c, fine).size();
    CHECK(total == fine.size());
  }
}
