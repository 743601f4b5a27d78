#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "decoup/partition.hpp"
#include "decoup/rescale.hpp"

#include <cmath>

using namespace decoup;

namespace {

Dyadic d(const char* s) { return Dyadic::parse(s); }

Cap one_side(const Interval& iv, int K_log2) { return Cap{{iv}, K_log2}; }

Interval curved(const char* lo, const char* hi, int level, int slot) {
  return Interval{d(lo), d(hi), Role::Curved, level, slot};
}

}  // namespace

TEST_CASE("affine change for single sides") {
  const auto s = SurfaceSpec::monomial(2, 4);
  const auto ch = affine_for_cap(one_side(curved("1*2^-1", "1", 1, 1), 4), s);
  CHECK(ch.offset[0] == d("1*2^-1"));
  CHECK(ch.scale[0] == d("1*2^-1"));
  const auto fl = affine_for_cap(one_side(Interval{d("0"), d("1*2^-1"), Role::Flat, 0, 0}, 4), s);
  CHECK(fl.offset[0].is_zero());
  CHECK(fl.scale[0] == d("1*2^-1"));
  const auto id = affine_for_cap(one_side(Interval{d("0"), d("1"), Role::Flat, 0, 0}, 0), s);
  CHECK(id.scale[0] == d("1"));
  const double x[2] = {3.0, 5.0};
  CHECK(id.map_x(x) == std::vector<double>{3.0, 5.0});
  CHECK_THROWS_AS(affine_for_cap(one_side(curved("1*2^-1", "3*2^-2", 1, 1), 4), s), std::invalid_argument);
  CHECK_THROWS_AS(affine_for_cap(one_side(Interval{d("0"), d("1*2^-2"), Role::Cube, 0, 1}, 4), s),
                  std::invalid_argument);
}

TEST_CASE("rescaled monomial phase on [1/2,1]") {
  const auto s = SurfaceSpec::monomial(2, 4);
  const Cap tau = one_side(curved("1*2^-1", "1", 1, 1), 4);
  const auto r = rescale_surface(tau, s);
  REQUIRE(r.has_phase(0));
  CHECK(r.s() == 1);
  const Polynomial& psi = r.coordinate_poly(0);
  for (double eta : {0.0, 0.25, 0.7, 1.0}) {
    const double want = 16.0 * (std::pow(0.5 + eta / 2, 4) - 1.0 / 16 - eta / 4);
    CHECK(psi(eta) == doctest::Approx(want).epsilon(1e-14));
  }
  const auto rep = check_m_nondegenerate(*r.phase(0), 4, 0.25);
  CHECK(rep.ok);
  CHECK(rep.second_lo == 12.0);
  CHECK(rep.second_hi == 48.0);
  CHECK(r.phase(0)->C == 48.0);
  const auto ch = affine_for_cap(tau, s);
  CHECK(phase_identity_error(ch, s, r, 1000, 1) <= 1e-12);
}

TEST_CASE("flat sides keep the monomial") {
  const auto s = SurfaceSpec::monomial(3, 4);
  const Interval flat{d("0"), d("1*2^-1"), Role::Flat, 0, 0};
  const Cap tau{{flat, flat}, 4};
  const auto r = rescale_surface(tau, s);
  CHECK(r.s() == 0);
  CHECK(r.coordinate_poly(1).coeffs() == Polynomial::monomial(4).coeffs());
}

TEST_CASE("rescale_cap examples") {
  const auto s = SurfaceSpec::monomial(2, 4);
  const auto ch = affine_for_cap(one_side(curved("1*2^-1", "1", 1, 1), 4), s);
  const auto img = rescale_cap(one_side(curved("1*2^-1", "5*2^-3", 2, 1), 8), ch, 8);
  CHECK(img.coords[0].lo.is_zero());
  CHECK(img.coords[0].hi == d("1*2^-2"));
  CHECK(img.coords[0].role == Role::Cube);
  CHECK(img.scale_log2 == 4);
  const auto same = rescale_cap(one_side(curved("1*2^-1", "1", 1, 1), 8), ch, 8);
  CHECK(same.coords[0].hi == d("1"));
  CHECK_THROWS(rescale_cap(one_side(curved("1*2^-2", "1*2^-1", 2, 1), 8), ch, 8));

  const auto fl = affine_for_cap(one_side(Interval{d("0"), d("1*2^-1"), Role::Flat, 0, 0}, 4), s);
  const auto i0 = rescale_cap(one_side(Interval{d("0"), d("1*2^-2"), Role::Flat, 0, 0}, 8), fl, 8);
  CHECK(i0.coords[0].hi == d("1*2^-1"));
  CHECK(i0.coords[0].role == Role::Flat);
}

TEST_CASE("round trip of rescale_cap") {
  const auto s = SurfaceSpec::monomial(3, 4);
  for (const Cap& tau : coarse_cover(4, 4, s.phase_mask()).enumerate()) {
    const auto ch = affine_for_cap(tau, s);
    for (const Cap& th : fine_caps_in(tau, 12, 4, s.phase_mask())) {
      const Cap img = rescale_cap(th, ch, 12);
      for (std::size_t j = 0; j < 2; ++j) {
        CHECK(ch.offset[j] + ch.scale[j] * img.coords[j].lo == th.coords[j].lo);
        CHECK(ch.offset[j] + ch.scale[j] * img.coords[j].hi == th.coords[j].hi);
      }
    }
  }
}

TEST_CASE("membership claim") {
  for (int n : {2, 3}) {
    const auto s = SurfaceSpec::monomial(n, 4);
    for (const Cap& tau : coarse_cover(4, 4, s.phase_mask()).enumerate()) {
      CHECK(verify_membership_claim(tau, s, 8).ok);
      CHECK(verify_membership_claim(tau, s, 12).ok);
    }
  }
  const auto s = SurfaceSpec::monomial(2, 4);
  const Cap tau = one_side(curved("1*2^-1", "1", 1, 1), 4);
  auto fine = fine_caps_in(tau, 8, 4, s.phase_mask());
  REQUIRE(fine.size() == 4);
  fine[1].coords[0].lo = fine[1].coords[0].lo + Dyadic::pow2(-20);
  const auto rep = verify_membership_claim(tau, s, fine, 8);
  CHECK_FALSE(rep.ok);
  CHECK_FALSE(rep.failures.empty());
  CHECK(rep.failures.front().fine_index == 1);
}

TEST_CASE("image box") {
  const auto s = SurfaceSpec::monomial(2, 4);
  const auto ch = affine_for_cap(one_side(curved("1*2^-1", "1", 1, 1), 4), s);
  const auto b = image_box(Box::cube({0.0, 0.0}, 256.0), ch);
  CHECK(b.half_widths()[0] == 128.0);
  CHECK(b.half_widths()[1] == 16.0);

  const SurfaceSpec sp(2, 4, {PhaseSpec{Polynomial({0.0, 0.0, 1.0}), 2.0}});
  const Cap cube = one_side(Interval{d("0"), d("1*2^-2"), Role::Cube, 0, 1}, 4);
  CHECK(image_box(Box::cube({0.0, 0.0}, 256.0), affine_for_cap(cube, sp)).half_widths()[0] == 64.0);

  const auto id = affine_for_cap(one_side(Interval{d("0"), d("1"), Role::Flat, 0, 0}, 0), s);
  const auto same = image_box(Box::cube({1.0, 2.0}, 3.0), id);
  CHECK(same.center() == std::vector<double>{1.0, 2.0});
  CHECK(same.half_widths() == std::vector<double>{3.0, 3.0});
}
