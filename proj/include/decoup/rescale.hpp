#pragma once

// Parabolic rescaling attached to a coarse cap tau.
//
// On each frequency coordinate xi_j = o_j + s_j eta_j, where [o_j, o_j + s_j]
// is tau's j-th side. The phase splits as
//   phi_j(o_j + s_j eta) = phi_j(o_j) + phi_j'(o_j) s_j eta + psi_j(eta) / K,
// and the dual map on physical space is
//   x~_j = s_j (x_j + x_n phi_j'(o_j)),  x~_n = x_n / K.

#include "decoup/geometry.hpp"
#include "decoup/partition.hpp"
#include "decoup/surface.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace decoup {

struct AffineChange {
  std::vector<Dyadic> offset;
  std::vector<Dyadic> scale;
  std::vector<Role> roles;  // roles of tau's sides
  int K_log2 = 0;
  int m = 4;
  /// phi_j'(o_j); the shear entering the x-side map.
  std::vector<double> slope;

  std::size_t dims() const noexcept { return offset.size(); }
  Dyadic K() const { return Dyadic::pow2(K_log2); }
  /// xi = o + s eta.
  std::vector<double> forward(std::span<const double> eta) const;
  /// The dual map x -> x~ (length n).
  std::vector<double> map_x(std::span<const double> x) const;
};

/// Offsets and scales for tau. Throws std::invalid_argument when tau's sides
/// do not match the surface layout (cubes exactly on phase coordinates) or a
/// side has the wrong length for its role.
AffineChange affine_for_cap(const Cap& tau, const SurfaceSpec& surface);

/// psi(eta) = K [phi(o + s eta) - phi(o) - phi'(o) s eta].
Polynomial rescaled_phase(const Polynomial& phi, double offset, double scale, double K);

/// Surface seen through the change: phase coordinates and Curved sides get
/// rescaled phases (with C set to the largest derivative bound on [0,1]);
/// Flat sides keep t^m. Validated with the given pinching ratio.
SurfaceSpec rescale_surface(const AffineChange& change, const SurfaceSpec& surface, double ratio);
SurfaceSpec rescale_surface(const Cap& tau, const SurfaceSpec& surface);

/// Largest |phi(o + s eta) - affine(eta) - psi(eta)/K| / max(1, |phi|) over
/// `samples` seeded uniform eta per coordinate.
double phase_identity_error(const AffineChange& change, const SurfaceSpec& surface, const SurfaceSpec& rescaled,
                            int samples, std::uint64_t seed);

/// Exact preimage of theta under the xi-map. Throws std::invalid_argument if
/// theta is not inside the cap described by change. Roles of the result are
/// left as Cube on phase coordinates of the rescaled surface and Flat/Curved
/// by position elsewhere; level and slot are not filled.
Cap rescale_cap(const Cap& theta, const AffineChange& change, int R_log2);

struct MembershipFailure {
  std::size_t fine_index = 0;
  std::string message;
};

struct MembershipReport {
  bool ok = false;
  std::size_t fine_caps = 0;      // theta inside tau
  std::size_t target_caps = 0;    // size of the family at R/K
  std::size_t lambda_checks = 0;  // rescaled Curved left endpoints checked
  int s_new = 0;
  std::vector<MembershipFailure> failures;
  std::string message;
};

/// Checks that the images of the given fine caps are exactly the members of
/// F_n(R/K, m, mask of the rescaled surface): each image is found by exact
/// endpoint equality, no member is hit twice, and every member is hit.
MembershipReport verify_membership_claim(const Cap& tau, const SurfaceSpec& surface, const std::vector<Cap>& fine,
                                         int R_log2);
/// Same, with fine = the members of F_n(R, m, mask) inside tau.
MembershipReport verify_membership_claim(const Cap& tau, const SurfaceSpec& surface, int R_log2);

/// Members of cap_family(R_log2, m, mask) whose closure lies in tau, built
/// factor by factor.
std::vector<Cap> fine_caps_in(const Cap& tau, int R_log2, int m, const std::vector<bool>& mask);

/// Nominal image of a box under the dual map: center mapped, half-widths
/// w_j s_j for frequency coordinates and w_n / K for the last.
Box image_box(const Box& ball, const AffineChange& change);

}  // namespace decoup
