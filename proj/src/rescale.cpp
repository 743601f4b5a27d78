#include "decoup/rescale.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace decoup {

std::vector<double> AffineChange::forward(std::span<const double> eta) const {
  if (eta.size() != dims()) throw std::invalid_argument("AffineChange::forward: dimension mismatch");
  std::vector<double> xi(dims());
  for (std::size_t j = 0; j < dims(); ++j) xi[j] = offset[j].to_double_lossy() + scale[j].to_double_lossy() * eta[j];
  return xi;
}

std::vector<double> AffineChange::map_x(std::span<const double> x) const {
  if (x.size() != dims() + 1) throw std::invalid_argument("AffineChange::map_x: dimension mismatch");
  const double xn = x[dims()];
  std::vector<double> out(dims() + 1);
  for (std::size_t j = 0; j < dims(); ++j) out[j] = scale[j].to_double_lossy() * (x[j] + xn * slope[j]);
  out[dims()] = std::ldexp(xn, -K_log2);
  return out;
}

namespace {

std::string side_error(std::size_t j, const std::string& what) {
  return "coordinate " + std::to_string(j) + ": " + what;
}

}  // namespace

AffineChange affine_for_cap(const Cap& tau, const SurfaceSpec& surface) {
  const auto dims = surface.dims();
  if (tau.dims() != dims) throw std::invalid_argument("affine_for_cap: cap and surface dimensions differ");
  const int m = surface.m();
  const int K_log2 = tau.scale_log2;
  if (K_log2 != 0) conforming_level(K_log2, m, "K");
  AffineChange ch;
  ch.K_log2 = K_log2;
  ch.m = m;
  for (std::size_t j = 0; j < dims; ++j) {
    const Interval& iv = tau.coords[j];
    if (!(iv.lo < iv.hi)) throw std::invalid_argument(side_error(j, "empty side"));
    if (Dyadic::from_int(1) < iv.hi) throw std::invalid_argument(side_error(j, "side leaves [0,1]"));
    const Dyadic len = iv.length();
    if (K_log2 != 0) {
      const int l = K_log2 / m;
      Dyadic want;
      switch (iv.role) {
        case Role::Cube:
          if (!surface.has_phase(j)) throw std::invalid_argument(side_error(j, "cube side on a monomial coordinate"));
          want = Dyadic::pow2(-K_log2 / 2);
          break;
        case Role::Flat:
          if (surface.has_phase(j)) throw std::invalid_argument(side_error(j, "flat side on a phase coordinate"));
          if (!iv.lo.is_zero()) throw std::invalid_argument(side_error(j, "flat side must start at 0"));
          want = Dyadic::pow2(-l);
          break;
        case Role::Curved:
          if (surface.has_phase(j)) throw std::invalid_argument(side_error(j, "curved side on a phase coordinate"));
          if (iv.level < 1 || iv.level > l) throw std::invalid_argument(side_error(j, "curved level out of range"));
          want = Dyadic::pow2(-static_cast<std::int64_t>(m - 2) * (iv.level - 1) / 2 - l);
          if (iv.lo < Dyadic::pow2(iv.level - 1 - l)) throw std::invalid_argument(side_error(j, "curved side below lambda"));
          break;
      }
      if (!(len == want)) throw std::invalid_argument(side_error(j, "side length " + len.to_string() + " does not match its role"));
    }
    ch.offset.push_back(iv.lo);
    ch.scale.push_back(len);
    ch.roles.push_back(iv.role);
    ch.slope.push_back(surface.coordinate_poly(j).derivative()(iv.lo.to_double_lossy()));
  }
  return ch;
}

Polynomial rescaled_phase(const Polynomial& phi, double offset, double scale, double K) {
  std::vector<double> c = phi.shifted(offset, scale).coeffs();
  c.resize(std::max<std::size_t>(c.size(), 2));
  c[0] = 0.0;
  c[1] = 0.0;
  for (double& v : c) v *= K;
  return Polynomial(std::move(c));
}

namespace {

double derivative_bound(const Polynomial& p, int m) {
  double C = 0.0;
  Polynomial d = p;
  for (int order = 0; order <= m; ++order) {
    const auto r = d.range_on(0.0, 1.0);
    C = std::max({C, std::abs(r.lo), std::abs(r.hi)});
    d = d.derivative();
  }
  return C;
}

}  // namespace

SurfaceSpec rescale_surface(const AffineChange& change, const SurfaceSpec& surface, double ratio) {
  const auto dims = surface.dims();
  if (change.dims() != dims) throw std::invalid_argument("rescale_surface: dimension mismatch");
  const double K = std::ldexp(1.0, change.K_log2);
  std::vector<std::optional<PhaseSpec>> layout(dims);
  for (std::size_t j = 0; j < dims; ++j) {
    if (change.roles[j] == Role::Flat) continue;  // K (K^{-1/m} eta)^m = eta^m
    const Polynomial psi = rescaled_phase(surface.coordinate_poly(j), change.offset[j].to_double_lossy(),
                                          change.scale[j].to_double_lossy(), K);
    layout[j] = PhaseSpec{psi, derivative_bound(psi, surface.m())};
  }
  return SurfaceSpec(surface.n(), surface.m(), std::move(layout), ratio);
}

SurfaceSpec rescale_surface(const Cap& tau, const SurfaceSpec& surface) {
  return rescale_surface(affine_for_cap(tau, surface), surface, default_nondegeneracy_ratio(surface.m()));
}

double phase_identity_error(const AffineChange& change, const SurfaceSpec& surface, const SurfaceSpec& rescaled,
                            int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double K = std::ldexp(1.0, change.K_log2);
  double worst = 0.0;
  for (std::size_t j = 0; j < change.dims(); ++j) {
    const Polynomial& phi = surface.coordinate_poly(j);
    const Polynomial& psi = rescaled.coordinate_poly(j);
    const double o = change.offset[j].to_double_lossy();
    const double s = change.scale[j].to_double_lossy();
    const double a0 = phi(o);
    const double a1 = phi.derivative()(o) * s;
    for (int i = 0; i < samples; ++i) {
      const double eta = i == 0 ? 0.0 : (i == 1 ? 1.0 : u(rng));
      const double lhs = phi(o + s * eta);
      const double err = std::abs(lhs - (a0 + a1 * eta) - psi(eta) / K);
      worst = std::max(worst, err / std::max(1.0, std::abs(lhs)));
    }
  }
  return worst;
}

Cap rescale_cap(const Cap& theta, const AffineChange& change, int R_log2) {
  if (theta.dims() != change.dims()) throw std::invalid_argument("rescale_cap: dimension mismatch");
  Cap out;
  out.scale_log2 = R_log2 - change.K_log2;
  for (std::size_t j = 0; j < change.dims(); ++j) {
    const Interval& iv = theta.coords[j];
    const Dyadic hi = change.offset[j] + change.scale[j];
    if (iv.lo < change.offset[j] || hi < iv.hi) {
      throw std::invalid_argument("rescale_cap: theta is not inside tau on " + side_error(j, iv.lo.to_string() + ".." + iv.hi.to_string()));
    }
    Interval r;
    r.lo = exact_div(iv.lo - change.offset[j], change.scale[j]);
    r.hi = exact_div(iv.hi - change.offset[j], change.scale[j]);
    if (change.roles[j] == Role::Flat) {
      r.role = r.lo.is_zero() ? Role::Flat : Role::Curved;
    } else {
      r.role = Role::Cube;
    }
    out.coords.push_back(std::move(r));
  }
  return out;
}

std::vector<Cap> fine_caps_in(const Cap& tau, int R_log2, int m, const std::vector<bool>& mask) {
  const CapFamily fam = cap_family(R_log2, m, mask);
  std::vector<std::vector<Interval>> factors;
  for (std::size_t j = 0; j < mask.size(); ++j) {
    std::vector<Interval> keep;
    for (const auto& iv : fam.factors()[j]) {
      if (tau.coords[j].contains(iv)) keep.push_back(iv);
    }
    factors.push_back(std::move(keep));
  }
  return CapFamily(std::move(factors), R_log2).enumerate();
}

namespace {

using Key = std::pair<Dyadic, Dyadic>;

struct KeyLess {
  bool operator()(const Key& a, const Key& b) const {
    if (auto c = a.first <=> b.first; c != 0) return c < 0;
    return (a.second <=> b.second) < 0;
  }
};

}  // namespace

MembershipReport verify_membership_claim(const Cap& tau, const SurfaceSpec& surface, const std::vector<Cap>& fine,
                                         int R_log2) {
  const int m = surface.m();
  const int K_log2 = tau.scale_log2;
  conforming_level(K_log2, m, "K");
  conforming_level(R_log2, m, "R");
  conforming_level(R_log2 - K_log2, m, "R/K");

  MembershipReport rep;
  const AffineChange ch = affine_for_cap(tau, surface);
  std::vector<bool> mask(surface.dims());
  for (std::size_t j = 0; j < mask.size(); ++j) mask[j] = ch.roles[j] != Role::Flat;
  rep.s_new = static_cast<int>(std::count(mask.begin(), mask.end(), true));

  const int target_log2 = R_log2 - K_log2;
  const CapFamily target = cap_family(target_log2, m, mask);
  rep.target_caps = static_cast<std::size_t>(target.size());
  rep.fine_caps = fine.size();

  // Per coordinate: endpoints -> index in the target factor.
  std::vector<std::map<Key, std::size_t, KeyLess>> lookup(mask.size());
  for (std::size_t j = 0; j < mask.size(); ++j) {
    const auto& f = target.factors()[j];
    for (std::size_t i = 0; i < f.size(); ++i) lookup[j].emplace(Key{f[i].lo, f[i].hi}, i);
  }
  const int l_R = R_log2 / m;
  const int l_K = K_log2 / m;

  std::vector<bool> hit(rep.target_caps, false);
  for (std::size_t t = 0; t < fine.size(); ++t) {
    const Cap& theta = fine[t];
    Cap img;
    try {
      img = rescale_cap(theta, ch, R_log2);
    } catch (const std::exception& e) {
      rep.failures.push_back({t, e.what()});
      continue;
    }
    std::uint64_t flat_index = 0;
    bool found = true;
    for (std::size_t j = 0; j < mask.size() && found; ++j) {
      const auto it = lookup[j].find(Key{img.coords[j].lo, img.coords[j].hi});
      if (it == lookup[j].end()) {
        rep.failures.push_back({t, side_error(j, "image [" + img.coords[j].lo.to_string() + ", " +
                                                     img.coords[j].hi.to_string() + "] is not in the family at R/K")});
        found = false;
        break;
      }
      const Interval& member = target.factors()[j][it->second];
      if (ch.roles[j] == Role::Flat && theta.coords[j].role == Role::Curved) {
        // lambda~ = K^{1/m} lambda, lambda = 2^{k-1} R^{-1/m}; the image must start a block of the same level.
        const Dyadic lambda = Dyadic::pow2(theta.coords[j].level - 1 - l_R);
        const Dyadic lambda_t = lambda.scaled(l_K);
        ++rep.lambda_checks;
        if (member.level != theta.coords[j].level || !(Dyadic::pow2(member.level - 1 - (l_R - l_K)) == lambda_t)) {
          rep.failures.push_back({t, side_error(j, "rescaled lambda " + lambda_t.to_string() + " does not start level " +
                                                       std::to_string(member.level))});
          found = false;
          break;
        }
      }
      flat_index = flat_index * target.factors()[j].size() + it->second;
    }
    if (!found) continue;
    if (hit[flat_index]) {
      rep.failures.push_back({t, "two fine caps map to the same member"});
      continue;
    }
    hit[flat_index] = true;
  }
  const auto covered = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), true));
  if (rep.failures.empty() && covered != rep.target_caps) {
    rep.failures.push_back({fine.size(), std::to_string(rep.target_caps - covered) + " members at R/K are not images"});
  }
  rep.ok = rep.failures.empty();
  std::ostringstream os;
  if (rep.ok) {
    os << rep.fine_caps << " caps map onto F(R/K) with s=" << rep.s_new;
  } else {
    os << rep.failures.size() << " failure(s); first: " << rep.failures.front().message;
  }
  rep.message = os.str();
  return rep;
}

MembershipReport verify_membership_claim(const Cap& tau, const SurfaceSpec& surface, int R_log2) {
  return verify_membership_claim(tau, surface, fine_caps_in(tau, R_log2, surface.m(), surface.phase_mask()), R_log2);
}

Box image_box(const Box& ball, const AffineChange& change) {
  const auto d = change.dims();
  if (ball.dims() != d + 1) throw std::invalid_argument("image_box: dimension mismatch");
  std::vector<double> half(d + 1);
  for (std::size_t j = 0; j < d; ++j) half[j] = ball.half_widths()[j] * change.scale[j].to_double_lossy();
  half[d] = std::ldexp(ball.half_widths()[d], -change.K_log2);
  return Box(change.map_x(ball.center()), std::move(half));
}

}  // namespace decoup
