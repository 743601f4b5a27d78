#pragma once

// Point sets in x-space with a measure attached to each point, so that
// sum_i measure(i) h(x_i) approximates an integral of h.

#include "decoup/geometry.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace decoup {

struct Ball {
  std::vector<double> center;
  double radius = 1.0;

  std::size_t dims() const noexcept { return center.size(); }
  bool contains(std::span<const double> x) const;
  Box bounding_box() const { return Box::cube(center, radius); }
  double volume() const;
};

/// (1 + |x - center| / R)^{-100 n}.
double weight_eval(std::span<const double> x, std::span<const double> center, double R, int n);

/// Closed form of the integral of weight_eval over R^n.
double weight_integral(double R, int n);

enum class LatticeMode { Tensor, MonteCarlo };
std::string_view lattice_mode_name(LatticeMode m);

class Lattice {
 public:
  /// counts[d] points anchor[d] + i step[d]; each point carries the cell volume.
  static Lattice tensor(std::vector<double> anchor, std::vector<double> step, std::vector<std::size_t> counts);
  /// Explicit points (row-major, dims per point) with per-point measures.
  static Lattice explicit_points(std::size_t dims, std::vector<double> points, std::vector<double> measure,
                                 std::uint64_t seed, std::string sampler);

  LatticeMode mode() const noexcept { return mode_; }
  bool is_tensor() const noexcept { return mode_ == LatticeMode::Tensor; }
  std::size_t dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return size_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& sampler() const noexcept { return sampler_; }

  void point(std::size_t i, std::span<double> out) const;
  double measure(std::size_t i) const;

  // Tensor structure (tensor mode only).
  const std::vector<double>& anchor() const { return anchor_; }
  const std::vector<double>& step() const { return step_; }
  const std::vector<std::size_t>& counts() const { return counts_; }
  std::vector<double> axis(std::size_t d) const;
  /// Multi-index of point i, last coordinate fastest.
  void unravel(std::size_t i, std::span<std::size_t> idx) const;

  /// Smallest and largest value of coordinate d over the points.
  std::pair<double, double> extent(std::size_t d) const;

 private:
  LatticeMode mode_ = LatticeMode::Tensor;
  std::size_t dims_ = 0;
  std::size_t size_ = 0;
  std::vector<double> anchor_;
  std::vector<double> step_;
  std::vector<std::size_t> counts_;
  double cell_ = 0.0;
  std::vector<double> points_;
  std::vector<double> measure_;
  std::uint64_t seed_ = 0;
  std::string sampler_;
};

/// Tensor lattice with the given step covering the box: per axis
/// floor(2 h / step) + 1 points centred on the box. Throws
/// std::invalid_argument for step > 1/2.
Lattice nyquist_lattice(const Box& box, double step);

/// count points uniform in the box (same step rule is checked).
Lattice nyquist_lattice(const Box& box, double step, std::size_t count, std::uint64_t seed);

/// Uniform points in the ball; measure = volume / count.
Lattice sample_ball_uniform(const Ball& ball, std::size_t count, std::uint64_t seed);

/// Mixture with equal mass on concentric balls of radius r 2^{-i}, i >= 0,
/// down to about min_radius; the i = 0 component keeps the ball covered.
/// Measures are 1 / (count q(x)) with q the mixture density, so the estimate
/// stays unbiased while fields concentrated near the centre are resolved.
Lattice sample_ball_multiscale(const Ball& ball, std::size_t count, std::uint64_t seed, double min_radius = 2.0);

/// Points distributed with density proportional to weight_eval(., center, R, n),
/// truncated to the box of half-width 4R. Measures are
/// weight_integral / (count * weight), so sum measure * weight * h estimates
/// the weighted integral of h.
Lattice sample_weight(std::vector<double> center, double R, std::size_t count, std::uint64_t seed);

}  // namespace decoup
