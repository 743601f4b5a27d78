#include "decoup/surface.hpp"


#include <cmath>
#include <sstream>
#include <stdexcept>

namespace decoup {

namespace {

// Relative slack for comparisons against C; extrema come from bisection.
constexpr double kSlack = 1e-12;

}  // namespace

double default_nondegeneracy_ratio(int m) { return std::ldexp(1.0, -(m - 2)); }

NondegeneracyReport check_m_nondegenerate(const PhaseSpec& phase, int m, double ratio) {
  if (phase.poly.degree() > m) {
    throw std::invalid_argument("check_m_nondegenerate: phase degree " + std::to_string(phase.poly.degree()) +
                                " exceeds m=" + std::to_string(m));
  }
  if (!(ratio > 0.0 && ratio <= 1.0)) throw std::invalid_argument("check_m_nondegenerate: ratio must be in (0,1]");
  if (!(phase.C > 0.0)) throw std::invalid_argument("check_m_nondegenerate: C must be positive");

  NondegeneracyReport rep;
  const double C = phase.C;
  const double eps = kSlack * std::max(1.0, std::abs(C));
  std::ostringstream msg;
  for (int l = 0; l <= m; ++l) {
    const auto r = phase.poly.derivative(l).range_on(0.0, 1.0);
    rep.ranges.push_back(r);
    if (rep.violated_order < 0 && (r.lo < -eps || r.hi > C + eps)) {
      rep.violated_order = l;
      msg << "derivative " << l << " range [" << r.lo << ", " << r.hi << "] leaves [0, " << C << "]";
    }
  }
  rep.second_lo = rep.ranges[2].lo;
  rep.second_hi = rep.ranges[2].hi;
  if (rep.violated_order < 0 && rep.second_lo < ratio * rep.second_hi - eps) {
    rep.violated_order = 2;
    msg << "second derivative range [" << rep.second_lo << ", " << rep.second_hi << "] has ratio below " << ratio;
  }
  rep.ok = rep.violated_order < 0;
  rep.message = rep.ok ? "ok" : msg.str();
  return rep;
}

SurfaceSpec::SurfaceSpec(int n, int m, std::vector<PhaseSpec> phases) : n_(n), m_(m) {
  if (n < 2) throw std::invalid_argument("SurfaceSpec: n must be >= 2");
  if (phases.size() > static_cast<std::size_t>(n - 1)) throw std::invalid_argument("SurfaceSpec: more phases than coordinates");
  layout_.resize(static_cast<std::size_t>(n - 1));
  for (std::size_t j = 0; j < phases.size(); ++j) layout_[j] = std::move(phases[j]);
  validate(default_nondegeneracy_ratio(m));
}

SurfaceSpec::SurfaceSpec(int n, int m, std::vector<std::optional<PhaseSpec>> layout, double ratio)
    : n_(n), m_(m), layout_(std::move(layout)) {
  if (n < 2) throw std::invalid_argument("SurfaceSpec: n must be >= 2");
  if (layout_.size() != static_cast<std::size_t>(n - 1)) throw std::invalid_argument("SurfaceSpec: layout length must be n-1");
  validate(ratio);
}

void SurfaceSpec::validate(double ratio) {
  if (m_ < 4 || m_ % 2 != 0) throw std::invalid_argument("SurfaceSpec: m must be an even integer >= 4");
  s_ = 0;
  polys_.clear();
  for (std::size_t j = 0; j < layout_.size(); ++j) {
    if (layout_[j]) {
      const auto rep = check_m_nondegenerate(*layout_[j], m_, ratio);
      if (!rep.ok) {
        throw std::invalid_argument("SurfaceSpec: phase on coordinate " + std::to_string(j) +
                                    " is not m-nondegenerate: " + rep.message);
      }
      ++s_;
      polys_.push_back(layout_[j]->poly);
    } else {
      polys_.push_back(Polynomial::monomial(m_));
    }
  }
}

std::vector<bool> SurfaceSpec::phase_mask() const {
  std::vector<bool> mask(layout_.size());
  for (std::size_t j = 0; j < layout_.size(); ++j) mask[j] = layout_[j].has_value();
  return mask;
}

double SurfaceSpec::phase_total(std::span<const double> xi) const {
  if (xi.size() != dims()) {
    throw std::invalid_argument("phase_total: expected " + std::to_string(dims()) + " coordinates, got " +
                                std::to_string(xi.size()));
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < xi.size(); ++j) acc += polys_[j](xi[j]);
  return acc;
}

std::vector<double> SurfaceSpec::graph_point(std::span<const double> xi) const {
  const double h = phase_total(xi);
  std::vector<double> p(xi.begin(), xi.end());
  p.push_back(h);
  return p;
}

SurfaceSpec surface_from_json(const nlohmann::json& j) {
  const int n = j.at("n").get<int>();
  const int m = j.at("m").get<int>();
  const int s = j.value("s", 0);
  const double C = j.value("C", 1.0);
  std::vector<PhaseSpec> phases;
  if (j.contains("phases")) {
    for (const auto& c : j.at("phases")) phases.push_back(PhaseSpec{Polynomial(c.get<std::vector<double>>()), C});
  }
  if (static_cast<int>(phases.size()) != s) {
    throw std::invalid_argument("surface: \"s\" is " + std::to_string(s) + " but " + std::to_string(phases.size()) +
                                " phases were given");
  }
  return SurfaceSpec(n, m, std::move(phases));
}

nlohmann::json surface_to_json(const SurfaceSpec& s) {
  nlohmann::json j;
  j["n"] = s.n();
  j["m"] = s.m();
  j["s"] = s.s();
  auto phases = nlohmann::json::array();
  auto layout = nlohmann::json::array();
  double C = 1.0;
  for (std::size_t k = 0; k < s.dims(); ++k) {
    layout.push_back(s.has_phase(k));
    if (s.has_phase(k)) {
      phases.push_back(s.phase(k)->poly.coeffs());
      C = std::max(C, s.phase(k)->C);
    }
  }
  j["phases"] = phases;
  j["C"] = C;
  j["layout"] = layout;
  return j;
}

}  // namespace decoup
