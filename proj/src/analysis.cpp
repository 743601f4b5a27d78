#include "decoup/analysis.hpp"

#include "decoup/parallel.hpp"
#include "decoup/partition.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace decoup {

namespace {

void check_p(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must be a finite real >= 1");
}

double abs_pow(cplx z, double p) { return std::pow(std::norm(z), 0.5 * p); }

template <class Inside>
NormEstimate norm_over(const SampledField& f, double p, Inside inside, const std::function<double(std::span<const double>)>& w) {
  check_p(p);
  const Lattice& L = *f.lattice;
  const std::size_t chunks = (L.size() + kReduceChunk - 1) / kReduceChunk;
  std::vector<double> s1(chunks, 0.0);
  std::vector<double> s2(chunks, 0.0);
  std::vector<std::size_t> cnt(chunks, 0);
  parallel_chunks(L.size(), kReduceChunk, [&](std::size_t c, std::size_t b, std::size_t e) {
    std::vector<double> x(L.dims());
    for (std::size_t i = b; i < e; ++i) {
      L.point(i, x);
      if (!inside(x)) continue;
      const double t = L.measure(i) * abs_pow(f.values[i], p) * (w ? w(x) : 1.0);
      s1[c] += t;
      s2[c] += t * t;
      ++cnt[c];
    }
  });
  double S = 0.0;
  double S2 = 0.0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    S += s1[c];
    S2 += s2[c];
    n += cnt[c];
  }
  NormEstimate est;
  est.points = n;
  est.value = std::pow(S, 1.0 / p);
  if (!L.is_tensor() && S > 0.0 && L.size() > 1) {
    const double N = static_cast<double>(L.size());
    const double var = std::max(0.0, S2 - S * S / N) * N / (N - 1.0);
    est.std_error = est.value * std::sqrt(var) / (p * S);
  }
  return est;
}

}  // namespace

NormEstimate lp_norm(const SampledField& f, double p, const Ball& domain) {
  return norm_over(f, p, [&](std::span<const double> x) { return domain.contains(x); }, {});
}

NormEstimate lp_norm(const SampledField& f, double p, const Box& domain) {
  return norm_over(f, p, [&](std::span<const double> x) { return domain.contains(x); }, {});
}

namespace {

void check_weight_coverage(const Lattice& L, std::span<const double> center, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("weighted norm: R must be positive");
  if (L.dims() != center.size()) throw std::invalid_argument("weighted norm: dimension mismatch");
  if (!L.is_tensor()) {
    if (L.sampler() != "weight-importance") {
      throw std::invalid_argument("weighted norm: Monte Carlo lattices must be drawn from the weight");
    }
    return;
  }
  for (std::size_t d = 0; d < L.dims(); ++d) {
    const auto [lo, hi] = L.extent(d);
    const double slack = L.step()[d];
    if (lo > center[d] - 4.0 * R + slack || hi < center[d] + 4.0 * R - slack) {
      throw std::invalid_argument("weighted norm: lattice does not reach 4R from the centre");
    }
  }
}

}  // namespace

NormEstimate weighted_lp_norm(const SampledField& f, double p, std::span<const double> center, double R) {
  check_weight_coverage(*f.lattice, center, R);
  const int n = static_cast<int>(center.size());
  const std::vector<double> c(center.begin(), center.end());
  return norm_over(f, p, [](std::span<const double>) { return true; },
                   [c, R, n](std::span<const double> x) { return weight_eval(x, c, R, n); });
}

double predicted_sharpness_exponent(int n, double p) {
  if (n < 2 || !(p >= 2.0)) throw std::invalid_argument("predicted exponent needs n >= 2 and p >= 2");
  return (n - 1) / 4.0 - (n + 1) / (2.0 * p);
}

std::string_view family_name(Family f) {
  switch (f) {
    case Family::RandomPhase:
      return "random-phase";
    case Family::Focusing:
      return "focusing";
    case Family::SingleCap:
      return "single-cap";
  }
  return "?";
}

Family parse_family(std::string_view s) {
  if (s == "random-phase") return Family::RandomPhase;
  if (s == "focusing") return Family::Focusing;
  if (s == "single-cap") return Family::SingleCap;
  throw std::invalid_argument("unknown test-function family '" + std::string(s) + "'");
}

std::vector<cplx> family_coefficients(Family f, std::size_t caps, std::uint64_t seed) {
  std::vector<cplx> c(caps, cplx{});
  switch (f) {
    case Family::RandomPhase: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (auto& v : c) v = std::polar(1.0, 2.0 * std::numbers::pi * u(rng));
      break;
    }
    case Family::Focusing:
      std::fill(c.begin(), c.end(), cplx{1.0, 0.0});
      break;
    case Family::SingleCap:
      if (caps > 0) c[seed % caps] = cplx{1.0, 0.0};
      break;
  }
  return c;
}

LatticePlan::Mode parse_lattice_mode(std::string_view s) {
  if (s == "auto") return LatticePlan::Mode::Auto;
  if (s == "tensor") return LatticePlan::Mode::Tensor;
  if (s == "montecarlo") return LatticePlan::Mode::MonteCarlo;
  throw std::invalid_argument("lattice mode must be auto, tensor or montecarlo");
}

namespace {

bool use_tensor(const LatticePlan& plan, double half_width, std::size_t dims) {
  if (plan.mode == LatticePlan::Mode::Tensor) return true;
  if (plan.mode == LatticePlan::Mode::MonteCarlo) return false;
  const double per_axis = std::floor(2.0 * half_width / plan.step + 1e-9) + 1.0;
  return std::pow(per_axis, static_cast<double>(dims)) <= static_cast<double>(plan.tensor_limit);
}

}  // namespace

Lattice plan_ball_lattice(const Ball& ball, const LatticePlan& plan) {
  if (use_tensor(plan, ball.radius, ball.dims())) return nyquist_lattice(ball.bounding_box(), plan.step);
  return sample_ball_multiscale(ball, plan.mc_points, plan.seed);
}

double weight_step(double R, std::size_t n, double step) {
  // The weight falls by 1/e within about R / (100 n); sample it at a quarter of that.
  return std::min(step, R / (400.0 * static_cast<double>(n)));
}

Lattice plan_weight_lattice(std::vector<double> center, double R, const LatticePlan& plan) {
  LatticePlan p = plan;
  p.step = weight_step(R, center.size(), plan.step);
  if (use_tensor(p, 4.0 * R, center.size())) return nyquist_lattice(Box::cube(std::move(center), 4.0 * R), p.step);
  return sample_weight(std::move(center), R, plan.mc_points, plan.seed);
}

double DecouplingSums::rhs_norm(const std::vector<cplx>& coeffs, std::size_t k) const {
  const double p = ps[k];
  double sq = 0.0;
  for (std::size_t c = 0; c < cap.size(); ++c) {
    const double a = std::abs(coeffs[c]);
    if (a == 0.0 || cap[c][k] == 0.0) continue;
    const double norm = a * std::pow(cap[c][k], 1.0 / p);
    sq += norm * norm;
  }
  return std::sqrt(sq);
}

double DecouplingSums::lhs_norm(std::size_t t, std::size_t k) const { return std::pow(lhs[t][k], 1.0 / ps[k]); }

namespace {

bool same_ball(const std::optional<Ball>& a, const std::optional<Ball>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || (a->center == b->center && a->radius == b->radius);
}

struct ChunkAcc {
  std::vector<double> lhs;     // t * K + k
  std::vector<double> lhs_sq;
  std::vector<double> cap;     // c * K + k
  std::size_t lhs_points = 0;
  std::size_t rhs_points = 0;
};

}  // namespace

DecouplingSums accumulate_decoupling(const SurfaceSpec& surface, const std::vector<Cap>& caps,
                                     const std::vector<std::vector<cplx>>& coeffs, const std::vector<double>& ps,
                                     const NormSide& lhs, const NormSide& rhs) {
  for (double p : ps) check_p(p);
  if (caps.empty()) throw std::invalid_argument("decoupling: empty cap family");
  for (const auto& c : coeffs) {
    if (c.size() != caps.size()) throw std::invalid_argument("decoupling: coefficient count differs from cap count");
  }
  if (rhs.weighted) check_weight_coverage(*rhs.lattice, rhs.weight_center, rhs.weight_R);
  const std::size_t T = coeffs.size();
  const std::size_t K = ps.size();
  const std::size_t C = caps.size();
  const bool shared = lhs.lattice == rhs.lattice && !lhs.weighted && !rhs.weighted && same_ball(lhs.restrict_to, rhs.restrict_to);

  DecouplingSums out;
  out.ps = ps;
  out.lhs.assign(T, std::vector<double>(K, 0.0));
  out.lhs_sq.assign(T, std::vector<double>(K, 0.0));
  out.cap.assign(C, std::vector<double>(K, 0.0));

  auto pass = [&](const NormSide& side, bool do_lhs, bool do_rhs) {
    const Lattice& L = *side.lattice;
    const CapBasis basis(surface, caps, L);
    const std::size_t chunks = (L.size() + kReduceChunk - 1) / kReduceChunk;
    std::vector<ChunkAcc> acc(chunks);
    const int n = surface.n();
    parallel_chunks(L.size(), kReduceChunk, [&](std::size_t ci, std::size_t b, std::size_t e) {
      ChunkAcc& a = acc[ci];
      if (do_lhs) {
        a.lhs.assign(T * K, 0.0);
        a.lhs_sq.assign(T * K, 0.0);
      }
      if (do_rhs) a.cap.assign(C * K, 0.0);
      std::vector<double> x(L.dims());
      std::vector<cplx> u(C);
      std::vector<double> un(C);
      for (std::size_t i = b; i < e; ++i) {
        L.point(i, x);
        if (side.restrict_to && !side.restrict_to->contains(x)) continue;
        basis.evaluate(x, u);
        double mu = L.measure(i);
        if (side.weighted) mu *= weight_eval(x, side.weight_center, side.weight_R, n);
        if (do_lhs) {
          ++a.lhs_points;
          for (std::size_t t = 0; t < T; ++t) {
            cplx f{};
            for (std::size_t c = 0; c < C; ++c) f += coeffs[t][c] * u[c];
            const double f2 = std::norm(f);
            for (std::size_t k = 0; k < K; ++k) {
              const double v = mu * std::pow(f2, 0.5 * ps[k]);
              a.lhs[t * K + k] += v;
              a.lhs_sq[t * K + k] += v * v;
            }
          }
        }
        if (do_rhs) {
          ++a.rhs_points;
          for (std::size_t c = 0; c < C; ++c) un[c] = std::norm(u[c]);
          for (std::size_t c = 0; c < C; ++c) {
            for (std::size_t k = 0; k < K; ++k) a.cap[c * K + k] += mu * std::pow(un[c], 0.5 * ps[k]);
          }
        }
      }
    });
    for (const ChunkAcc& a : acc) {
      if (do_lhs && !a.lhs.empty()) {
        out.lhs_points += a.lhs_points;
        for (std::size_t t = 0; t < T; ++t) {
          for (std::size_t k = 0; k < K; ++k) {
            out.lhs[t][k] += a.lhs[t * K + k];
            out.lhs_sq[t][k] += a.lhs_sq[t * K + k];
          }
        }
      }
      if (do_rhs && !a.cap.empty()) {
        out.rhs_points += a.rhs_points;
        for (std::size_t c = 0; c < C; ++c) {
          for (std::size_t k = 0; k < K; ++k) out.cap[c][k] += a.cap[c * K + k];
        }
      }
    }
  };

  if (shared) {
    pass(lhs, true, true);
  } else {
    pass(lhs, true, false);
    pass(rhs, false, true);
  }
  return out;
}

double safe_ratio(double lhs, double rhs) {
  if (!(rhs > 0.0) || !std::isfinite(lhs) || !std::isfinite(rhs)) return std::numeric_limits<double>::quiet_NaN();
  return lhs / rhs;
}

SurfaceSpec surface_for(const RatioConfig& cfg) {
  std::vector<PhaseSpec> phases = cfg.phases;
  if (phases.empty()) {
    for (int j = 0; j < cfg.s; ++j) phases.push_back(PhaseSpec{Polynomial({0.0, 0.0, 1.0}), 2.0});
  }
  if (static_cast<int>(phases.size()) != cfg.s) throw std::invalid_argument("number of phases must equal s");
  return SurfaceSpec(cfg.n, cfg.m, std::move(phases));
}

namespace {

std::string mode_label(const Lattice& L) {
  return L.is_tensor() ? "tensor" : "montecarlo:" + L.sampler();
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<RatioResult> decoupling_ratio(const RatioConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const SurfaceSpec surface = surface_for(cfg);
  const auto caps = cap_family(cfg.R_log2, cfg.m, surface.phase_mask()).enumerate();
  if (cfg.trial_seeds.empty()) throw std::invalid_argument("decoupling_ratio: no trials");
  const double R = std::ldexp(1.0, cfg.R_log2);
  const std::vector<double> origin(static_cast<std::size_t>(cfg.n), 0.0);
  const Ball ball{origin, R};

  NormSide lhs;
  lhs.lattice = std::make_shared<const Lattice>(plan_ball_lattice(ball, cfg.lhs_plan));
  lhs.restrict_to = ball;
  NormSide rhs;
  rhs.lattice = std::make_shared<const Lattice>(plan_weight_lattice(origin, R, cfg.rhs_plan));
  rhs.weighted = true;
  rhs.weight_center = origin;
  rhs.weight_R = R;

  std::vector<std::vector<cplx>> coeffs;
  for (auto seed : cfg.trial_seeds) coeffs.push_back(family_coefficients(cfg.family, caps.size(), seed));
  const auto sums = accumulate_decoupling(surface, caps, coeffs, cfg.ps, lhs, rhs);

  const double ms = elapsed_ms(t0);
  std::vector<RatioResult> rows;
  for (std::size_t k = 0; k < cfg.ps.size(); ++k) {
    for (std::size_t t = 0; t < coeffs.size(); ++t) {
      RatioResult r;
      r.n = cfg.n;
      r.m = cfg.m;
      r.s = cfg.s;
      r.p = cfg.ps[k];
      r.K_log2 = 0;
      r.R_log2 = cfg.R_log2;
      r.family = std::string(family_name(cfg.family));
      r.trial_seed = cfg.trial_seeds[t];
      r.lhs = sums.lhs_norm(t, k);
      r.rhs = sums.rhs_norm(coeffs[t], k);
      r.ratio = safe_ratio(r.lhs, r.rhs);
      r.lattice_mode = mode_label(*lhs.lattice) + "|" + mode_label(*rhs.lattice);
      r.points = sums.lhs_points + sums.rhs_points;
      r.runtime_ms = ms;
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

SlopeFit fit_slope(std::vector<double> x, std::vector<double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_slope: size mismatch");
  if (x.size() < 3) throw std::invalid_argument("fit_slope: need at least 3 scales");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_slope: all scales equal");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    rss += r * r;
  }
  f.residual = std::sqrt(rss / n);
  f.x = std::move(x);
  f.y = std::move(y);
  return f;
}

SweepResult sweep_and_fit(RatioConfig cfg, const std::vector<int>& R_log2s) {
  if (R_log2s.size() < 3) throw std::invalid_argument("sweep_and_fit: need at least 3 scales");
  for (int r : R_log2s) conforming_level(r, cfg.m, "R");
  SweepResult out;
  out.ps = cfg.ps;
  std::vector<std::vector<double>> best(cfg.ps.size());
  for (int r : R_log2s) {
    cfg.R_log2 = r;
    const auto rows = decoupling_ratio(cfg);
    for (std::size_t k = 0; k < cfg.ps.size(); ++k) {
      double mx = -INFINITY;
      for (const auto& row : rows) {
        if (row.p == cfg.ps[k] && row.defined()) mx = std::max(mx, row.ratio);
      }
      if (!(mx > 0.0)) throw std::runtime_error("sweep_and_fit: no defined ratio at R = 2^" + std::to_string(r));
      best[k].push_back(std::log2(mx));
    }
    out.rows.insert(out.rows.end(), rows.begin(), rows.end());
  }
  std::vector<double> xs(R_log2s.begin(), R_log2s.end());
  for (std::size_t k = 0; k < cfg.ps.size(); ++k) out.fits.push_back(fit_slope(xs, best[k]));
  return out;
}

SharpnessResult sharpness_experiment(int n, int m, const std::vector<double>& ps, const std::vector<int>& R_log2s,
                                     const LatticePlan& rhs_plan) {
  if (R_log2s.size() < 3) throw std::invalid_argument("sharpness_experiment: need at least 3 scales");
  SharpnessResult out;
  out.ps = ps;
  for (double p : ps) out.predicted.push_back(predicted_sharpness_exponent(n, p));
  const SurfaceSpec surface = SurfaceSpec::monomial(n, m);
  const std::vector<double> origin(static_cast<std::size_t>(n), 0.0);
  const Dyadic half = Dyadic::pow2(-1);
  std::vector<std::vector<double>> ys(ps.size());

  const Ball near{origin, 0.01};
  LatticePlan near_plan;
  near_plan.mode = LatticePlan::Mode::Tensor;
  near_plan.step = near.radius / 8.0;
  NormSide lhs;
  lhs.lattice = std::make_shared<const Lattice>(plan_ball_lattice(near, near_plan));
  lhs.restrict_to = near;

  for (int r : R_log2s) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Cap> caps;
    for (const Cap& c : cap_family(r, m, surface.phase_mask()).enumerate()) {
      bool inside = true;
      for (const auto& iv : c.coords) inside = inside && !(iv.lo < half);
      if (inside) caps.push_back(c);
    }
    const double R = std::ldexp(1.0, r);
    NormSide rhs;
    rhs.lattice = std::make_shared<const Lattice>(plan_weight_lattice(origin, R, rhs_plan));
    rhs.weighted = true;
    rhs.weight_center = origin;
    rhs.weight_R = R;
    const std::vector<std::vector<cplx>> coeffs{std::vector<cplx>(caps.size(), cplx{1.0, 0.0})};
    const auto sums = accumulate_decoupling(surface, caps, coeffs, ps, lhs, rhs);
    const double ms = elapsed_ms(t0);
    for (std::size_t k = 0; k < ps.size(); ++k) {
      RatioResult row;
      row.n = n;
      row.m = m;
      row.s = 0;
      row.p = ps[k];
      row.R_log2 = r;
      row.family = "sharpness";
      row.trial_seed = rhs_plan.seed;
      row.lhs = sums.lhs_norm(0, k);
      row.rhs = sums.rhs_norm(coeffs[0], k);
      row.ratio = safe_ratio(row.lhs, row.rhs);
      row.lattice_mode = mode_label(*lhs.lattice) + "|" + mode_label(*rhs.lattice);
      row.points = sums.lhs_points + sums.rhs_points;
      row.runtime_ms = ms;
      if (!(row.ratio > 0.0)) throw std::runtime_error("sharpness_experiment: undefined ratio");
      ys[k].push_back(std::log2(row.ratio));
      out.rows.push_back(std::move(row));
    }
  }
  std::vector<double> xs(R_log2s.begin(), R_log2s.end());
  for (std::size_t k = 0; k < ps.size(); ++k) out.fits.push_back(fit_slope(xs, ys[k]));
  return out;
}

TrivialCheckResult trivial_decoupling_check(Family family, const std::vector<std::uint64_t>& seeds, int n, int m,
                                            int s, int K_log2, const std::vector<double>& ps, const LatticePlan& plan) {
  const auto t0 = std::chrono::steady_clock::now();
  RatioConfig cfg;
  cfg.n = n;
  cfg.m = m;
  cfg.s = s;
  const SurfaceSpec surface = surface_for(cfg);
  const auto caps = coarse_caps(K_log2, m, surface.phase_mask());
  if (seeds.empty()) throw std::invalid_argument("trivial_decoupling_check: no trials");
  const double K = std::ldexp(1.0, K_log2);
  const Ball ball{std::vector<double>(static_cast<std::size_t>(n), 0.0), K};
  NormSide side;
  side.lattice = std::make_shared<const Lattice>(plan_ball_lattice(ball, plan));
  side.restrict_to = ball;
  std::vector<std::vector<cplx>> coeffs;
  for (auto seed : seeds) coeffs.push_back(family_coefficients(family, caps.size(), seed));
  const auto sums = accumulate_decoupling(surface, caps, coeffs, ps, side, side);

  TrivialCheckResult out;
  out.num_tau = caps.size();
  out.bound_scale = std::pow(K, (n - 1) / 4.0);
  const double ms = elapsed_ms(t0);
  for (std::size_t k = 0; k < ps.size(); ++k) {
    for (std::size_t t = 0; t < seeds.size(); ++t) {
      RatioResult r;
      r.n = n;
      r.m = m;
      r.s = s;
      r.p = ps[k];
      r.K_log2 = K_log2;
      r.R_log2 = K_log2;
      r.family = std::string(family_name(family));
      r.trial_seed = seeds[t];
      r.lhs = sums.lhs_norm(t, k);
      r.rhs = sums.rhs_norm(coeffs[t], k);
      r.ratio = safe_ratio(r.lhs, r.rhs);
      r.lattice_mode = mode_label(*side.lattice);
      r.points = sums.lhs_points;
      r.runtime_ms = ms;
      out.rows.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace decoup
