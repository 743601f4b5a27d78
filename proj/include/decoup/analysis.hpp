#pragma once

#include "decoup/cap_basis.hpp"
#include "decoup/extension.hpp"
#include "decoup/lattice.hpp"
#include "decoup/surface.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace decoup {

struct NormEstimate {
  double value = 0.0;
  /// Standard error from the sample spread (0 for tensor lattices).
  double std_error = 0.0;
  std::size_t points = 0;  // points that fell inside the domain
};

/// (sum |f|^p measure)^{1/p} over lattice points inside the domain.
NormEstimate lp_norm(const SampledField& f, double p, const Ball& domain);
NormEstimate lp_norm(const SampledField& f, double p, const Box& domain);

/// (sum |f|^p w measure)^{1/p} with w = weight_eval(., center, R, n). The
/// lattice must reach 4R from the center in every coordinate direction
/// (weight-importance samples are truncated there by construction);
/// otherwise std::invalid_argument.
NormEstimate weighted_lp_norm(const SampledField& f, double p, std::span<const double> center, double R);

/// p-independent part of the decoupling exponent test: (n-1)/4 - (n+1)/(2p).
double predicted_sharpness_exponent(int n, double p);

enum class Family { RandomPhase, Focusing, SingleCap };
std::string_view family_name(Family f);
Family parse_family(std::string_view s);

/// Per-cap constants: e(omega) with seeded uniform omega; all ones; or one
/// cap (index seed mod count) set to 1.
std::vector<cplx> family_coefficients(Family f, std::size_t caps, std::uint64_t seed);

/// How the integration domain of one side of the ratio is sampled.
struct LatticePlan {
  enum class Mode { Auto, Tensor, MonteCarlo };
  Mode mode = Mode::Auto;
  double step = 0.5;
  std::size_t tensor_limit = std::size_t{1} << 20;
  std::size_t mc_points = std::size_t{1} << 15;
  std::uint64_t seed = 1;
};
LatticePlan::Mode parse_lattice_mode(std::string_view s);

/// Lattice for an unweighted norm over the ball.
Lattice plan_ball_lattice(const Ball& ball, const LatticePlan& plan);
/// Tensor step that resolves the weight at scale R: min(step, R / (400 n)).
double weight_step(double R, std::size_t n, double step);
/// Lattice for a weighted norm with w centred at `center` at scale R.
Lattice plan_weight_lattice(std::vector<double> center, double R, const LatticePlan& plan);

/// One side of a ratio: a lattice, an optional ball restriction and an
/// optional weight.
struct NormSide {
  std::shared_ptr<const Lattice> lattice;
  std::optional<Ball> restrict_to;
  bool weighted = false;
  std::vector<double> weight_center;
  double weight_R = 1.0;
};

/// Accumulated integrals for a set of caps, exponents and coefficient vectors.
struct DecouplingSums {
  std::vector<double> ps;
  /// lhs[t][k] = int |sum_c coeffs[t][c] u_c|^p_k over the lhs side.
  std::vector<std::vector<double>> lhs;
  std::vector<std::vector<double>> lhs_sq;  // sum of squared per-point terms (spread)
  /// cap[c][k] = int |u_c|^p_k over the rhs side.
  std::vector<std::vector<double>> cap;
  std::size_t lhs_points = 0;
  std::size_t rhs_points = 0;

  /// (sum_c (|coeff_c|^p cap[c][k])^{2/p})^{1/2}.
  double rhs_norm(const std::vector<cplx>& coeffs, std::size_t k) const;
  double lhs_norm(std::size_t t, std::size_t k) const;
};

/// Evaluates every cap field once per point and accumulates both sides in
/// fixed-order chunks. If lhs and rhs share a lattice and restriction, one
/// pass serves both.
DecouplingSums accumulate_decoupling(const SurfaceSpec& surface, const std::vector<Cap>& caps,
                                     const std::vector<std::vector<cplx>>& coeffs, const std::vector<double>& ps,
                                     const NormSide& lhs, const NormSide& rhs);

struct RatioResult {
  int n = 2;
  int m = 4;
  int s = 0;
  double p = 2.0;
  int K_log2 = 0;
  int R_log2 = 0;
  std::string family;
  std::uint64_t trial_seed = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  /// lhs / rhs, or NaN when rhs is 0 (undefined).
  double ratio = std::numeric_limits<double>::quiet_NaN();
  std::string lattice_mode;
  std::size_t points = 0;
  double runtime_ms = 0.0;

  bool defined() const noexcept { return ratio == ratio; }
};

double safe_ratio(double lhs, double rhs);

struct RatioConfig {
  int n = 2;
  int m = 4;
  int s = 0;
  int R_log2 = 4;
  std::vector<double> ps{6.0};
  Family family = Family::RandomPhase;
  std::vector<std::uint64_t> trial_seeds{1};
  LatticePlan lhs_plan;
  LatticePlan rhs_plan;
  /// Phases for the first s coordinates; default phi(t) = t^2 with C = 2.
  std::vector<PhaseSpec> phases;
};

SurfaceSpec surface_for(const RatioConfig& cfg);

/// ||E g||_{L^p(B_R)} / (sum_theta ||E_theta g||^2_{L^p(w_{B_R})})^{1/2}
/// over theta in F_n(R, m, s), for every p and trial. Rows are ordered by
/// p, then trial.
std::vector<RatioResult> decoupling_ratio(const RatioConfig& cfg);

struct SlopeFit {
  std::vector<double> x;  // log2 R
  std::vector<double> y;  // log2 ratio
  double slope = 0.0;
  double intercept = 0.0;
  /// Root-mean-square residual.
  double residual = 0.0;
};

/// Least-squares line; needs at least 3 points.
SlopeFit fit_slope(std::vector<double> x, std::vector<double> y);

struct SweepResult {
  std::vector<RatioResult> rows;
  std::vector<double> ps;
  std::vector<SlopeFit> fits;  // per p, over max-over-trials ratios
};

/// decoupling_ratio at each R, then a fit of log2 max ratio against log2 R.
SweepResult sweep_and_fit(RatioConfig cfg, const std::vector<int>& R_log2s);

struct SharpnessResult {
  std::vector<RatioResult> rows;
  std::vector<double> ps;
  std::vector<SlopeFit> fits;
  std::vector<double> predicted;
};

/// g = 1 on every cap of F_n(R, m, 0) inside [1/2,1]^{n-1}; lhs over
/// B_{1/100}, rhs the weighted cap square sum; slope per p.
SharpnessResult sharpness_experiment(int n, int m, const std::vector<double>& ps, const std::vector<int>& R_log2s,
                                     const LatticePlan& rhs_plan);

struct TrivialCheckResult {
  std::vector<RatioResult> rows;
  std::size_t num_tau = 0;
  double bound_scale = 0.0;  // K^{(n-1)/4}
};

/// ||E_{Omega_(1..1)} g||_{L^p(B_K)} / (sum_tau ||E_tau g||^2_{L^p(B_K)})^{1/2}
/// over the coarse caps tau; both sides share one lattice on B_K.
TrivialCheckResult trivial_decoupling_check(Family family, const std::vector<std::uint64_t>& seeds, int n, int m,
                                            int s, int K_log2, const std::vector<double>& ps, const LatticePlan& plan);

}  // namespace decoup
