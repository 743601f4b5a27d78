#include "decoup/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace decoup {

namespace {

double norm2(std::span<const double> x, std::span<const double> c) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - c[i]) * (x[i] - c[i]);
  return std::sqrt(s);
}

double unit_ball_volume(std::size_t n) {
  const double h = static_cast<double>(n) / 2.0;
  return std::pow(std::numbers::pi, h) / std::tgamma(h + 1.0);
}

void random_direction(std::mt19937_64& rng, std::span<double> out) {
  std::normal_distribution<double> g;
  double s = 0.0;
  do {
    s = 0.0;
    for (double& v : out) {
      v = g(rng);
      s += v * v;
    }
  } while (s == 0.0);
  s = std::sqrt(s);
  for (double& v : out) v /= s;
}

}  // namespace

bool Ball::contains(std::span<const double> x) const { return norm2(x, center) <= radius; }

double Ball::volume() const { return unit_ball_volume(dims()) * std::pow(radius, static_cast<double>(dims())); }

double weight_eval(std::span<const double> x, std::span<const double> center, double R, int n) {
  if (!(R > 0.0)) throw std::invalid_argument("weight_eval: R must be positive");
  if (x.size() != center.size()) throw std::invalid_argument("weight_eval: dimension mismatch");
  return std::pow(1.0 + norm2(x, center) / R, -100.0 * n);
}

double weight_integral(double R, int n) {
  const double a = 100.0 * n;
  const double nn = n;
  const double sphere = 2.0 * std::pow(std::numbers::pi, nn / 2.0) / std::tgamma(nn / 2.0);
  const double log_beta = std::lgamma(nn) + std::lgamma(a - nn) - std::lgamma(a);
  return sphere * std::pow(R, nn) * std::exp(log_beta);
}

std::string_view lattice_mode_name(LatticeMode m) { return m == LatticeMode::Tensor ? "tensor" : "montecarlo"; }

Lattice Lattice::tensor(std::vector<double> anchor, std::vector<double> step, std::vector<std::size_t> counts) {
  if (anchor.size() != step.size() || anchor.size() != counts.size() || anchor.empty()) {
    throw std::invalid_argument("Lattice::tensor: inconsistent dimensions");
  }
  Lattice L;
  L.mode_ = LatticeMode::Tensor;
  L.dims_ = anchor.size();
  L.size_ = 1;
  L.cell_ = 1.0;
  for (std::size_t d = 0; d < L.dims_; ++d) {
    if (!(step[d] > 0.0)) throw std::invalid_argument("Lattice::tensor: steps must be positive");
    if (counts[d] == 0) throw std::invalid_argument("Lattice::tensor: empty axis");
    L.size_ *= counts[d];
    L.cell_ *= step[d];
  }
  L.anchor_ = std::move(anchor);
  L.step_ = std::move(step);
  L.counts_ = std::move(counts);
  L.sampler_ = "tensor";
  return L;
}

Lattice Lattice::explicit_points(std::size_t dims, std::vector<double> points, std::vector<double> measure,
                                 std::uint64_t seed, std::string sampler) {
  if (dims == 0 || points.size() != dims * measure.size()) {
    throw std::invalid_argument("Lattice::explicit_points: inconsistent sizes");
  }
  Lattice L;
  L.mode_ = LatticeMode::MonteCarlo;
  L.dims_ = dims;
  L.size_ = measure.size();
  L.points_ = std::move(points);
  L.measure_ = std::move(measure);
  L.seed_ = seed;
  L.sampler_ = std::move(sampler);
  return L;
}

void Lattice::unravel(std::size_t i, std::span<std::size_t> idx) const {
  for (std::size_t d = dims_; d-- > 0;) {
    idx[d] = i % counts_[d];
    i /= counts_[d];
  }
}

void Lattice::point(std::size_t i, std::span<double> out) const {
  if (mode_ == LatticeMode::MonteCarlo) {
    std::copy_n(points_.begin() + static_cast<std::ptrdiff_t>(i * dims_), dims_, out.begin());
    return;
  }
  for (std::size_t d = dims_; d-- > 0;) {
    out[d] = anchor_[d] + static_cast<double>(i % counts_[d]) * step_[d];
    i /= counts_[d];
  }
}

double Lattice::measure(std::size_t i) const { return mode_ == LatticeMode::Tensor ? cell_ : measure_[i]; }

std::vector<double> Lattice::axis(std::size_t d) const {
  if (mode_ != LatticeMode::Tensor) throw std::logic_error("Lattice::axis: not a tensor lattice");
  std::vector<double> a(counts_[d]);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = anchor_[d] + static_cast<double>(i) * step_[d];
  return a;
}

std::pair<double, double> Lattice::extent(std::size_t d) const {
  if (mode_ == LatticeMode::Tensor) {
    return {anchor_[d], anchor_[d] + static_cast<double>(counts_[d] - 1) * step_[d]};
  }
  double lo = INFINITY;
  double hi = -INFINITY;
  for (std::size_t i = 0; i < size_; ++i) {
    lo = std::min(lo, points_[i * dims_ + d]);
    hi = std::max(hi, points_[i * dims_ + d]);
  }
  return {lo, hi};
}

namespace {

void check_step(double step) {
  if (!(step > 0.0) || step > 0.5) throw std::invalid_argument("lattice step must lie in (0, 1/2]");
}

}  // namespace

Lattice nyquist_lattice(const Box& box, double step) {
  check_step(step);
  std::vector<double> anchor;
  std::vector<double> steps;
  std::vector<std::size_t> counts;
  for (std::size_t d = 0; d < box.dims(); ++d) {
    const double h = box.half_widths()[d];
    const auto c = static_cast<std::size_t>(std::floor(2.0 * h / step + 1e-9)) + 1;
    counts.push_back(c);
    steps.push_back(step);
    anchor.push_back(box.center()[d] - 0.5 * static_cast<double>(c - 1) * step);
  }
  return Lattice::tensor(std::move(anchor), std::move(steps), std::move(counts));
}

Lattice nyquist_lattice(const Box& box, double step, std::size_t count, std::uint64_t seed) {
  check_step(step);
  if (count == 0) throw std::invalid_argument("Monte Carlo lattice needs at least one point");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = box.dims();
  std::vector<double> pts(count * n);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t d = 0; d < n; ++d) pts[i * n + d] = box.center()[d] + box.half_widths()[d] * u(rng);
  }
  return Lattice::explicit_points(n, std::move(pts), std::vector<double>(count, box.volume() / static_cast<double>(count)),
                                  seed, "uniform-box");
}

Lattice sample_ball_uniform(const Ball& ball, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("Monte Carlo lattice needs at least one point");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = ball.dims();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> pts(count * n);
  std::vector<double> dir(n);
  for (std::size_t i = 0; i < count; ++i) {
    random_direction(rng, dir);
    const double r = ball.radius * std::pow(u(rng), inv_n);
    for (std::size_t d = 0; d < n; ++d) pts[i * n + d] = ball.center[d] + r * dir[d];
  }
  return Lattice::explicit_points(n, std::move(pts), std::vector<double>(count, ball.volume() / static_cast<double>(count)),
                                  seed, "uniform-ball");
}

Lattice sample_ball_multiscale(const Ball& ball, std::size_t count, std::uint64_t seed, double min_radius) {
  if (count == 0) throw std::invalid_argument("Monte Carlo lattice needs at least one point");
  const std::size_t n = ball.dims();
  std::vector<double> radii{ball.radius};
  while (radii.back() / 2.0 >= min_radius) radii.push_back(radii.back() / 2.0);
  const std::vector<double> mix(radii.size(), 1.0 / static_cast<double>(radii.size()));
  const double vu = unit_ball_volume(n);
  std::vector<double> vol(radii.size());
  for (std::size_t c = 0; c < radii.size(); ++c) vol[c] = vu * std::pow(radii[c], static_cast<double>(n));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::discrete_distribution<std::size_t> pick(mix.begin(), mix.end());
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> pts(count * n);
  std::vector<double> meas(count);
  std::vector<double> dir(n);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t c = pick(rng);
    random_direction(rng, dir);
    const double r = radii[c] * std::pow(u(rng), inv_n);
    for (std::size_t d = 0; d < n; ++d) pts[i * n + d] = ball.center[d] + r * dir[d];
    double q = 0.0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
      if (r <= radii[k]) q += mix[k] / vol[k];
    }
    meas[i] = 1.0 / (static_cast<double>(count) * q);
  }
  return Lattice::explicit_points(n, std::move(pts), std::move(meas), seed, "multiscale-ball");
}

Lattice sample_weight(std::vector<double> center, double R, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("Monte Carlo lattice needs at least one point");
  if (!(R > 0.0)) throw std::invalid_argument("sample_weight: R must be positive");
  const std::size_t n = center.size();
  const int ni = static_cast<int>(n);
  const double a = 100.0 * ni;
  // r / R = X / (1 - X) with X ~ Beta(n, a - n) has density proportional to
  // r^{n-1} (1 + r/R)^{-a}.
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> ga(static_cast<double>(n), 1.0);
  std::gamma_distribution<double> gb(a - static_cast<double>(n), 1.0);
  const double Z = weight_integral(R, ni);
  std::vector<double> pts;
  pts.reserve(count * n);
  std::vector<double> meas;
  meas.reserve(count);
  std::vector<double> dir(n);
  std::vector<double> x(n);
  while (meas.size() < count) {
    const double A = ga(rng);
    const double B = gb(rng);
    const double r = R * A / B;  // X / (1 - X) = A / B
    random_direction(rng, dir);
    bool inside = true;
    for (std::size_t d = 0; d < n; ++d) {
      x[d] = center[d] + r * dir[d];
      if (std::abs(x[d] - center[d]) > 4.0 * R) inside = false;
    }
    if (!inside) continue;
    pts.insert(pts.end(), x.begin(), x.end());
    meas.push_back(Z / (static_cast<double>(count) * weight_eval(x, center, R, ni)));
  }
  return Lattice::explicit_points(n, std::move(pts), std::move(meas), seed, "weight-importance");
}

}  // namespace decoup
