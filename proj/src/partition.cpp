#include "decoup/partition.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

namespace decoup {

int conforming_level(int scale_log2, int m, const char* name, int min_l) {
  if (m < 4 || m % 2 != 0) throw ScaleError("m must be an even integer >= 4");
  if (scale_log2 < m * min_l || scale_log2 % m != 0) {
    std::ostringstream os;
    os << name << " = 2^" << scale_log2 << " is not of the form 2^{m*l} with m=" << m << " and l >= " << min_l;
    throw ScaleError(os.str());
  }
  return scale_log2 / m;
}

std::vector<Interval> interval_family(int R_log2, int m) {
  const int l = conforming_level(R_log2, m, "R");
  std::vector<Interval> out;
  out.push_back(Interval{Dyadic{}, Dyadic::pow2(-l), Role::Flat, 0, 0});
  for (int k = 1; k <= l; ++k) {
    const Dyadic base = Dyadic::pow2(k - 1 - l);
    const std::int64_t width_exp = -static_cast<std::int64_t>(m - 2) * (k - 1) / 2 - l;
    const std::int64_t count = std::int64_t{1} << (m * (k - 1) / 2);
    for (std::int64_t mu = 1; mu <= count; ++mu) {
      Interval iv;
      iv.lo = base + Dyadic(BigInt(mu - 1), width_exp);
      iv.hi = base + Dyadic(BigInt(mu), width_exp);
      iv.role = Role::Curved;
      iv.level = k;
      iv.slot = mu;
      out.push_back(std::move(iv));
    }
  }
  return out;
}

std::vector<Interval> cube_intervals(int R_log2) {
  if (R_log2 < 0 || R_log2 % 2 != 0) {
    throw ScaleError("cube side R^{-1/2} needs an even exponent, got R = 2^" + std::to_string(R_log2));
  }
  const int half = R_log2 / 2;
  if (half > 40) throw ScaleError("cube family too large");
  const std::int64_t count = std::int64_t{1} << half;
  std::vector<Interval> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    out.push_back(Interval{Dyadic(BigInt(i), -half), Dyadic(BigInt(i + 1), -half), Role::Cube, 0, i + 1});
  }
  return out;
}

CapFamily::CapFamily(std::vector<std::vector<Interval>> factors, int scale_log2)
    : factors_(std::move(factors)), scale_log2_(scale_log2) {}

std::uint64_t CapFamily::size() const noexcept {
  std::uint64_t n = 1;
  for (const auto& f : factors_) {
    if (f.empty()) return 0;
    if (n > std::numeric_limits<std::uint64_t>::max() / f.size()) return std::numeric_limits<std::uint64_t>::max();
    n *= f.size();
  }
  return n;
}

Cap CapFamily::at(std::uint64_t index) const {
  Cap c;
  c.scale_log2 = scale_log2_;
  c.coords.resize(factors_.size());
  for (std::size_t j = factors_.size(); j-- > 0;) {
    const auto len = factors_[j].size();
    c.coords[j] = factors_[j][index % len];
    index /= len;
  }
  return c;
}

std::vector<Cap> CapFamily::enumerate() const {
  const auto n = size();
  if (n > (std::uint64_t{1} << 26)) throw std::length_error("CapFamily::enumerate: family too large to materialize");
  std::vector<Cap> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) out.push_back(at(i));
  return out;
}

std::vector<bool> standard_mask(int n, int s) {
  if (n < 2 || s < 0 || s > n - 1) throw std::invalid_argument("need n >= 2 and 0 <= s <= n-1");
  std::vector<bool> mask(static_cast<std::size_t>(n - 1), false);
  for (int j = 0; j < s; ++j) mask[static_cast<std::size_t>(j)] = true;
  return mask;
}

CapFamily cap_family(int R_log2, int m, const std::vector<bool>& phase_mask) {
  const auto intervals = interval_family(R_log2, m);
  const bool any_cube = std::find(phase_mask.begin(), phase_mask.end(), true) != phase_mask.end();
  const auto cubes = any_cube ? cube_intervals(R_log2) : std::vector<Interval>{};
  std::vector<std::vector<Interval>> factors;
  for (bool is_phase : phase_mask) factors.push_back(is_phase ? cubes : intervals);
  return CapFamily(std::move(factors), R_log2);
}

std::vector<Cap> cap_family(int R_log2, int m, int s, int n) {
  return cap_family(R_log2, m, standard_mask(n, s)).enumerate();
}

std::string RegionLabel::to_string() const {
  std::string s;
  for (auto b : bits) s.push_back(b ? '1' : '0');
  return s.empty() ? "-" : s;
}

Box Region::box() const {
  std::vector<double> c;
  std::vector<double> h;
  for (std::size_t j = 0; j < bounds.lo.size(); ++j) {
    const double lo = bounds.lo[j].to_double_lossy();
    const double hi = bounds.hi[j].to_double_lossy();
    c.push_back(0.5 * (lo + hi));
    h.push_back(0.5 * (hi - lo));
  }
  return Box(std::move(c), std::move(h));
}

std::vector<Region> omega_regions(int K_log2, int m, const std::vector<bool>& phase_mask) {
  const int sp = conforming_level(K_log2, m, "K");
  const Dyadic split = Dyadic::pow2(-sp);
  std::vector<std::size_t> mono;
  for (std::size_t j = 0; j < phase_mask.size(); ++j) {
    if (!phase_mask[j]) mono.push_back(j);
  }
  const std::size_t count = std::size_t{1} << mono.size();
  std::vector<Region> out;
  for (std::size_t code = 0; code < count; ++code) {
    Region r;
    r.bounds = DyadicBox::unit(phase_mask.size());
    for (std::size_t t = 0; t < mono.size(); ++t) {
      const bool bit = (code >> (mono.size() - 1 - t)) & 1U;
      r.label.bits.push_back(bit ? 1 : 0);
      if (bit) {
        r.bounds.lo[mono[t]] = split;
      } else {
        r.bounds.hi[mono[t]] = split;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Region> omega_regions(int K_log2, int m, int s, int n) {
  return omega_regions(K_log2, m, standard_mask(n, s));
}

std::vector<Cap> coarse_caps(int K_log2, int m, const std::vector<bool>& phase_mask) {
  auto intervals = interval_family(K_log2, m);
  std::erase_if(intervals, [](const Interval& iv) { return iv.role != Role::Curved; });
  const bool any_cube = std::find(phase_mask.begin(), phase_mask.end(), true) != phase_mask.end();
  const auto cubes = any_cube ? cube_intervals(K_log2) : std::vector<Interval>{};
  std::vector<std::vector<Interval>> factors;
  for (bool is_phase : phase_mask) factors.push_back(is_phase ? cubes : intervals);
  return CapFamily(std::move(factors), K_log2).enumerate();
}

std::vector<Cap> coarse_caps(int K_log2, int m, int s, int n) { return coarse_caps(K_log2, m, standard_mask(n, s)); }

CapFamily coarse_cover(int K_log2, int m, const std::vector<bool>& phase_mask) {
  return cap_family(K_log2, m, phase_mask);
}

Dyadic coarse_lambda(const Interval& iv, int K_log2, int m) {
  if (iv.role != Role::Curved) throw std::invalid_argument("coarse_lambda: interval is not curved");
  const int sp = conforming_level(K_log2, m, "K");
  return Dyadic::pow2(iv.level - 1 - sp);
}

std::vector<Cap> caps_in(const Cap& parent, const std::vector<Cap>& family) {
  std::vector<Cap> out;
  for (const auto& c : family) {
    if (parent.contains(c)) out.push_back(c);
  }
  return out;
}

std::vector<Cap> caps_in(const DyadicBox& parent, const std::vector<Cap>& family) {
  std::vector<Cap> out;
  for (const auto& c : family) {
    if (parent.contains(c)) out.push_back(c);
  }
  return out;
}

namespace {

// Per-coordinate endpoint keys that preserve order. Uses a shared power of
// two scale when everything fits in 64 bits, ranks otherwise.
struct KeyedEndpoints {
  std::vector<std::vector<std::uint64_t>> lo;  // [cap][coord]
  std::vector<std::vector<std::uint64_t>> hi;
  std::vector<std::uint64_t> dom_lo;
  std::vector<std::uint64_t> dom_hi;
};

KeyedEndpoints key_endpoints(const std::vector<Cap>& family, const DyadicBox& domain) {
  const std::size_t d = domain.lo.size();
  std::int64_t min_exp = 0;
  std::size_t max_bits = 0;
  auto visit = [&](const Dyadic& x) {
    if (x.is_zero()) return;
    min_exp = std::min(min_exp, x.exponent());
  };
  for (const auto& c : family) {
    for (const auto& iv : c.coords) {
      visit(iv.lo);
      visit(iv.hi);
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    visit(domain.lo[j]);
    visit(domain.hi[j]);
  }
  bool fits = true;
  auto width = [&](const Dyadic& x) {
    if (x.is_zero()) return;
    const std::size_t bits = boost::multiprecision::msb(x.mantissa()) + 1 + static_cast<std::size_t>(x.exponent() - min_exp);
    max_bits = std::max(max_bits, bits);
  };
  for (const auto& c : family) {
    for (const auto& iv : c.coords) {
      width(iv.lo);
      width(iv.hi);
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    width(domain.lo[j]);
    width(domain.hi[j]);
  }
  fits = max_bits <= 63;

  KeyedEndpoints k;
  k.lo.resize(family.size());
  k.hi.resize(family.size());
  if (fits) {
    auto key = [&](const Dyadic& x) -> std::uint64_t {
      if (x.is_zero()) return 0;
      return (x.mantissa() << static_cast<unsigned>(x.exponent() - min_exp)).convert_to<std::uint64_t>();
    };
    for (std::size_t i = 0; i < family.size(); ++i) {
      for (const auto& iv : family[i].coords) {
        k.lo[i].push_back(key(iv.lo));
        k.hi[i].push_back(key(iv.hi));
      }
    }
    for (std::size_t j = 0; j < d; ++j) {
      k.dom_lo.push_back(key(domain.lo[j]));
      k.dom_hi.push_back(key(domain.hi[j]));
    }
    return k;
  }
  // Rank endpoints per coordinate.
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<Dyadic> pts{domain.lo[j], domain.hi[j]};
    for (const auto& c : family) {
      pts.push_back(c.coords[j].lo);
      pts.push_back(c.coords[j].hi);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    auto rank = [&](const Dyadic& x) {
      return static_cast<std::uint64_t>(std::lower_bound(pts.begin(), pts.end(), x) - pts.begin());
    };
    for (std::size_t i = 0; i < family.size(); ++i) {
      k.lo[i].push_back(rank(family[i].coords[j].lo));
      k.hi[i].push_back(rank(family[i].coords[j].hi));
    }
    k.dom_lo.push_back(rank(domain.lo[j]));
    k.dom_hi.push_back(rank(domain.hi[j]));
  }
  return k;
}

void finish(CoverReport& rep) {
  if (rep.volume_sum <= rep.domain_volume) {
    rep.deficit = rep.domain_volume - rep.volume_sum;
  } else {
    rep.excess = rep.volume_sum - rep.domain_volume;
  }
  rep.ok = !rep.overlapping_pair && !rep.outside_domain && !rep.has_gap && rep.volume_sum == rep.domain_volume;
  std::ostringstream os;
  if (rep.ok) {
    os << "exact cover";
  } else {
    if (rep.overlapping_pair) os << "caps " << rep.overlapping_pair->first << " and " << rep.overlapping_pair->second << " overlap; ";
    if (rep.outside_domain) os << "cap " << *rep.outside_domain << " leaves the domain; ";
    if (rep.has_gap) os << "uncovered points remain; ";
    if (!rep.deficit.is_zero()) os << "volume deficit " << rep.deficit.to_string() << "; ";
    if (!rep.excess.is_zero()) os << "volume excess " << rep.excess.to_string() << "; ";
  }
  rep.message = os.str();
}

}  // namespace

CoverReport verify_cover(const std::vector<Cap>& family, const DyadicBox& domain) {
  CoverReport rep;
  const std::size_t d = domain.lo.size();
  rep.domain_volume = domain.volume();
  for (const auto& c : family) {
    if (c.dims() != d) throw std::invalid_argument("verify_cover: cap dimension does not match domain");
    rep.volume_sum += c.volume();
  }
  if (family.size() >= std::numeric_limits<std::uint32_t>::max()) throw std::length_error("verify_cover: too many caps");

  const auto keys = key_endpoints(family, domain);
  std::vector<std::vector<std::uint64_t>> breaks(d);
  for (std::size_t j = 0; j < d; ++j) {
    auto& b = breaks[j];
    b.push_back(keys.dom_lo[j]);
    b.push_back(keys.dom_hi[j]);
    for (std::size_t i = 0; i < family.size(); ++i) {
      for (auto v : {keys.lo[i][j], keys.hi[i][j]}) {
        if (v > keys.dom_lo[j] && v < keys.dom_hi[j]) b.push_back(v);
      }
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
  }
  std::vector<std::size_t> ncell(d);
  std::uint64_t total = 1;
  for (std::size_t j = 0; j < d; ++j) {
    ncell[j] = breaks[j].size() - 1;
    total *= ncell[j];
    if (total > (std::uint64_t{1} << 27)) throw std::length_error("verify_cover: endpoint grid too large; use the product-family check");
  }
  std::vector<std::uint32_t> owner(total, 0);
  std::vector<std::size_t> first(d);
  std::vector<std::size_t> last(d);
  std::vector<std::size_t> idx(d);
  for (std::size_t i = 0; i < family.size(); ++i) {
    bool inside = true;
    for (std::size_t j = 0; j < d; ++j) {
      if (keys.lo[i][j] < keys.dom_lo[j] || keys.hi[i][j] > keys.dom_hi[j] || keys.lo[i][j] >= keys.hi[i][j]) inside = false;
    }
    if (!inside) {
      if (!rep.outside_domain) rep.outside_domain = i;
      continue;
    }
    for (std::size_t j = 0; j < d; ++j) {
      first[j] = static_cast<std::size_t>(std::lower_bound(breaks[j].begin(), breaks[j].end(), keys.lo[i][j]) - breaks[j].begin());
      last[j] = static_cast<std::size_t>(std::lower_bound(breaks[j].begin(), breaks[j].end(), keys.hi[i][j]) - breaks[j].begin());
      idx[j] = first[j];
    }
    while (true) {
      std::uint64_t flat = 0;
      for (std::size_t j = 0; j < d; ++j) flat = flat * ncell[j] + idx[j];
      auto& o = owner[flat];
      if (o != 0) {
        if (!rep.overlapping_pair) rep.overlapping_pair = std::make_pair(static_cast<std::size_t>(o - 1), i);
      } else {
        o = static_cast<std::uint32_t>(i + 1);
      }
      std::size_t j = d;
      while (j-- > 0) {
        if (++idx[j] < last[j]) break;
        idx[j] = first[j];
      }
      if (j == static_cast<std::size_t>(-1)) break;
    }
  }
  rep.has_gap = std::find(owner.begin(), owner.end(), 0U) != owner.end();
  finish(rep);
  return rep;
}

CoverReport verify_cover(const CapFamily& family, const DyadicBox& domain) {
  CoverReport rep;
  rep.domain_volume = domain.volume();
  rep.volume_sum = Dyadic::from_int(1);
  const std::size_t d = family.dims();
  if (domain.lo.size() != d) throw std::invalid_argument("verify_cover: family dimension does not match domain");

  // Stride of coordinate j in the lexicographic enumeration.
  std::vector<std::uint64_t> stride(d, 1);
  for (std::size_t j = d; j-- > 1;) stride[j - 1] = stride[j] * family.factors()[j].size();

  for (std::size_t j = 0; j < d; ++j) {
    const auto& f = family.factors()[j];
    std::vector<std::size_t> order(f.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return f[a].lo < f[b].lo; });
    Dyadic sum;
    Dyadic cursor = domain.lo[j];
    for (std::size_t t = 0; t < order.size(); ++t) {
      const auto& iv = f[order[t]];
      if (iv.lo < domain.lo[j] || domain.hi[j] < iv.hi || iv.hi <= iv.lo) {
        if (!rep.outside_domain) rep.outside_domain = order[t] * stride[j];
        continue;
      }
      sum += iv.length();
      if (iv.lo < cursor && t > 0) {
        if (!rep.overlapping_pair) rep.overlapping_pair = std::make_pair(order[t - 1] * stride[j], order[t] * stride[j]);
      } else if (cursor < iv.lo) {
        rep.has_gap = true;
      }
      if (cursor < iv.hi) cursor = iv.hi;
    }
    if (cursor < domain.hi[j]) rep.has_gap = true;
    rep.volume_sum *= sum;
  }
  finish(rep);
  return rep;
}

}  // namespace decoup
