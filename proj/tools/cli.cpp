#include "decoup/cli.hpp"

#include "decoup/analysis.hpp"
#include "decoup/extension.hpp"
#include "decoup/partition.hpp"
#include "decoup/quadrature.hpp"
#include "decoup/rescale.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

namespace decoup::cli {

namespace {

using nlohmann::json;

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();
bool is_set(double v) { return v == v; }

// Shortest round-trip text; deterministic across runs and thread counts.
std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// ---- config expansion -------------------------------------------------------

bool has_flag(const std::vector<std::string>& args, const std::string& name) {
  const std::string flag = "--" + name;
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

std::vector<std::string> json_tokens(const std::string& key, const json& v) {
  const std::string flag = "--" + key;
  auto scalar = [&](const json& x) -> std::string {
    if (x.is_string()) return x.get<std::string>();
    if (x.is_number() || x.is_boolean()) return x.dump();
    throw ConfigError("config key '" + key + "' has an unsupported value");
  };
  if (v.is_boolean()) return v.get<bool>() ? std::vector<std::string>{flag} : std::vector<std::string>{};
  if (v.is_array()) {
    std::vector<std::string> out{flag};
    for (const auto& x : v) out.push_back(scalar(x));
    return out;
  }
  return {flag, scalar(v)};
}

// Replaces --config FILE by the file's options; explicit flags win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ConfigError("--config needs a file");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
  if (cfg.contains("schema") && cfg["schema"] != kConfigSchema) {
    throw ConfigError("config schema " + cfg["schema"].dump() + " is not supported (expected " +
                      std::to_string(kConfigSchema) + ")");
  }
  const bool has_sub = !args.empty() && args[0].rfind("--", 0) != 0;
  if (!has_sub) {
    if (!cfg.contains("subcommand")) throw ConfigError("no subcommand given");
    args.insert(args.begin(), cfg["subcommand"].get<std::string>());
  }
  std::vector<std::string> extra;
  for (const auto& [key, value] : cfg.items()) {
    if (key == "schema" || key == "subcommand" || has_flag(args, key)) continue;
    auto t = json_tokens(key, value);
    extra.insert(extra.end(), t.begin(), t.end());
  }
  args.insert(args.begin() + 1, extra.begin(), extra.end());
  return args;
}

// ---- validation -------------------------------------------------------------

int log2_exact(std::uint64_t v, const char* name, int m) {
  if (v == 0 || (v & (v - 1)) != 0) {
    throw ConfigError(std::string(name) + " = " + std::to_string(v) + " is not a power of two; scales must be 2^{m*l} with m=" +
                      std::to_string(m));
  }
  int e = 0;
  while ((std::uint64_t{1} << e) != v) ++e;
  return e;
}

int scale_log2(std::uint64_t v, const char* name, int m) {
  const int e = log2_exact(v, name, m);
  try {
    conforming_level(e, m, name);
  } catch (const ScaleError& err) {
    throw ConfigError(err.what());
  }
  return e;
}

void check_dims(int n, int m, int s) {
  if (m < 4 || m % 2 != 0) throw ConfigError("m must be an even integer >= 4");
  if (n < 2) throw ConfigError("n must be at least 2");
  if (s < 0 || s > n - 1) throw ConfigError("s must lie in 0..n-1");
}

void check_ps(const std::vector<double>& ps) {
  if (ps.empty()) throw ConfigError("at least one p is required");
  for (double p : ps) {
    if (!(p >= 1.0)) throw ConfigError("p must be >= 1");
  }
}

LatticePlan::Mode lattice_mode(const std::string& s) {
  try {
    return parse_lattice_mode(s);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

Family family(const std::string& s) {
  try {
    return parse_family(s);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::vector<std::uint64_t> trial_seeds(std::uint64_t seed, int trials) {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  std::vector<std::uint64_t> out;
  for (int t = 0; t < trials; ++t) out.push_back(seed + static_cast<std::uint64_t>(t));
  return out;
}

// phi(t) = t^2 with C = 2 on the first s coordinates.
SurfaceSpec default_surface(int n, int m, int s) {
  RatioConfig cfg;
  cfg.n = n;
  cfg.m = m;
  cfg.s = s;
  return surface_for(cfg);
}

// ---- output -----------------------------------------------------------------

class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw ConfigError("cannot open output " + path);
    }
    os_ = path.empty() ? &fallback : &file_;
  }
  std::ostream& os() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

void schema_line(std::ostream& os, const std::string& command, bool estimates) {
  os << "# decoup-csv schema=" << kCsvSchema << " command=" << command;
  if (estimates) os << " ratio=empirical lower estimate of the decoupling constant";
  os << "\n";
}

void ratio_header(std::ostream& os) {
  os << "n,m,s,p,K,R,family,trial_seed,lhs,rhs,ratio,lattice_mode,points,runtime_ms\n";
}

std::string pow2(int e) { return std::to_string(std::uint64_t{1} << e); }

void ratio_row(std::ostream& os, const RatioResult& r) {
  os << r.n << ',' << r.m << ',' << r.s << ',' << num(r.p) << ',' << pow2(r.K_log2) << ',' << pow2(r.R_log2) << ','
     << r.family << ',' << r.trial_seed << ',' << num(r.lhs) << ',' << num(r.rhs) << ',' << num(r.ratio) << ','
     << r.lattice_mode << ',' << r.points << ',' << num(std::round(r.runtime_ms * 1000.0) / 1000.0) << "\n";
}

void write_plot_data(const std::string& path, const std::vector<double>& ps, const std::vector<SlopeFit>& fits,
                     const std::vector<double>* predicted) {
  if (path.empty()) return;
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open plot data file " + path);
  os << "# decoup-plot schema=" << kCsvSchema << " x=log2 R y=log2 ratio\n";
  os << "series,x,y" << (predicted ? ",fit,predicted_slope" : ",fit") << "\n";
  for (std::size_t k = 0; k < ps.size(); ++k) {
    const auto& f = fits[k];
    for (std::size_t i = 0; i < f.x.size(); ++i) {
      os << "p=" << num(ps[k]) << ',' << num(f.x[i]) << ',' << num(f.y[i]) << ','
         << num(f.intercept + f.slope * f.x[i]);
      if (predicted) os << ',' << num((*predicted)[k]);
      os << "\n";
    }
  }
}

void cap_columns(std::ostream& os, std::size_t dims) {
  for (std::size_t j = 1; j <= dims; ++j) {
    os << ",lo_" << j << ",hi_" << j << ",role_" << j << ",level_" << j << ",slot_" << j;
  }
}

void cap_fields(std::ostream& os, const Cap& c) {
  for (const auto& iv : c.coords) {
    os << ',' << iv.lo.to_string() << ',' << iv.hi.to_string() << ',' << role_name(iv.role) << ',' << iv.level << ','
       << iv.slot;
  }
}

std::string cap_text(const Cap& c) {
  std::string s;
  for (std::size_t j = 0; j < c.coords.size(); ++j) {
    s += (j ? " x " : "") + std::string("[") + c.coords[j].lo.to_string() + " " + c.coords[j].hi.to_string() + "]";
  }
  return s;
}

// ---- subcommands ------------------------------------------------------------

struct Common {
  std::string out;
  std::string plot;
  std::string dump;
};

struct CapsOpts {
  int n = 2, m = 4, s = 0;
  std::uint64_t R = 256;
};

int run_caps(const CapsOpts& o, const Common& c, std::ostream& out, std::ostream& err) {
  check_dims(o.n, o.m, o.s);
  const int R_log2 = scale_log2(o.R, "R", o.m);
  const auto fam = cap_family(R_log2, o.m, standard_mask(o.n, o.s));
  if (fam.size() > (std::uint64_t{1} << 22)) throw ConfigError("family has " + std::to_string(fam.size()) + " caps; too many to list");
  const auto report = verify_cover(fam, DyadicBox::unit(fam.dims()));
  Sink sink(c.out, out);
  auto& os = sink.os();
  schema_line(os, "caps", false);
  os << "index";
  cap_columns(os, fam.dims());
  os << ",volume\n";
  for (std::uint64_t i = 0; i < fam.size(); ++i) {
    const Cap cap = fam.at(i);
    os << i;
    cap_fields(os, cap);
    os << ',' << cap_volume(cap).to_string() << "\n";
  }
  err << "caps n=" << o.n << " m=" << o.m << " s=" << o.s << " R=" << o.R << ": " << fam.size() << " caps, cover "
      << (report.ok ? "PASS" : "FAIL") << "\n";
  return report.ok ? kExitOk : kExitAssertion;
}

struct RegionOpts {
  int n = 2, m = 4, s = 0;
  std::uint64_t K = 16;
};

int run_regions(const RegionOpts& o, const Common& c, std::ostream& out, std::ostream& err) {
  check_dims(o.n, o.m, o.s);
  const int K_log2 = scale_log2(o.K, "K", o.m);
  const auto mask = standard_mask(o.n, o.s);
  const auto regions = omega_regions(K_log2, o.m, mask);
  const auto taus = coarse_caps(K_log2, o.m, mask);
  Sink sink(c.out, out);
  auto& os = sink.os();
  schema_line(os, "regions", false);
  os << "label";
  for (std::size_t j = 1; j < mask.size() + 1; ++j) os << ",lo_" << j << ",hi_" << j;
  os << ",volume,coarse_caps\n";
  Dyadic total;
  for (const auto& r : regions) {
    os << r.label.to_string();
    for (std::size_t j = 0; j < r.bounds.lo.size(); ++j) os << ',' << r.bounds.lo[j].to_string() << ',' << r.bounds.hi[j].to_string();
    const bool all_curved = std::all_of(r.label.bits.begin(), r.label.bits.end(), [](auto b) { return b == 1; });
    os << ',' << r.bounds.volume().to_string() << ',' << (all_curved ? taus.size() : 0) << "\n";
    total = total + r.bounds.volume();
  }
  const bool ok = total == Dyadic::from_int(1);
  err << "regions n=" << o.n << " m=" << o.m << " s=" << o.s << " K=" << o.K << ": " << regions.size()
      << " regions, " << taus.size() << " coarse caps in Omega_(1..1), volumes sum to 1 " << (ok ? "PASS" : "FAIL")
      << "\n";
  return ok ? kExitOk : kExitAssertion;
}

struct RescaleOpts {
  int n = 2, m = 4, s = 0;
  std::uint64_t K = 16, R = 256;
  int samples = 256;
  std::uint64_t seed = 1;
};

int run_verify_rescale(const RescaleOpts& o, const Common& c, std::ostream& out, std::ostream& err) {
  check_dims(o.n, o.m, o.s);
  const int K_log2 = scale_log2(o.K, "K", o.m);
  const int R_log2 = scale_log2(o.R, "R", o.m);
  if (K_log2 >= R_log2) throw ConfigError("K must be smaller than R");
  if (o.samples < 1) throw ConfigError("samples must be >= 1");
  const SurfaceSpec surface = default_surface(o.n, o.m, o.s);
  const auto cover = coarse_cover(K_log2, o.m, surface.phase_mask());
  if (cover.size() > (std::uint64_t{1} << 16)) throw ConfigError("too many coarse caps");
  const double ratio = default_nondegeneracy_ratio(o.m);

  Sink sink(c.out, out);
  auto& os = sink.os();
  schema_line(os, "verify-rescale", false);
  os << "tau,box,fine_caps,target_caps,s_new,lambda_checks,membership,phase_identity_err,nondegenerate,ok\n";
  std::size_t failed = 0;
  for (std::uint64_t i = 0; i < cover.size(); ++i) {
    const Cap tau = cover.at(i);
    const auto rep = verify_membership_claim(tau, surface, R_log2);
    const auto change = affine_for_cap(tau, surface);
    const auto resc = rescale_surface(change, surface, ratio);
    const double id_err = phase_identity_error(change, surface, resc, o.samples, o.seed + i);
    bool nondeg = true;
    for (std::size_t j = 0; j < resc.dims(); ++j) {
      if (resc.has_phase(j)) nondeg = nondeg && check_m_nondegenerate(*resc.phase(j), o.m, ratio).ok;
    }
    const bool ok = rep.ok && id_err <= 1e-12 && nondeg;
    if (!ok) {
      ++failed;
      err << "tau " << i << " " << cap_text(tau) << ": " << (rep.ok ? "" : rep.message) << " phase identity error "
          << num(id_err) << (nondeg ? "" : " nondegeneracy fails") << "\n";
    }
    os << i << ',' << cap_text(tau) << ',' << rep.fine_caps << ',' << rep.target_caps << ',' << rep.s_new << ','
       << rep.lambda_checks << ',' << (rep.ok ? "pass" : "fail") << ',' << num(id_err) << ','
       << (nondeg ? "pass" : "fail") << ',' << (ok ? "pass" : "fail") << "\n";
  }
  err << "verify-rescale n=" << o.n << " m=" << o.m << " s=" << o.s << " K=" << o.K << " R=" << o.R << ": "
      << cover.size() - failed << "/" << cover.size() << " coarse caps pass " << (failed == 0 ? "PASS" : "FAIL") << "\n";
  return failed == 0 ? kExitOk : kExitAssertion;
}

struct PlanOpts {
  std::string lattice = "auto";
  double step = 0.5;
  std::size_t tensor_limit = std::size_t{1} << 20;
  std::size_t mc_points = std::size_t{1} << 15;
  std::uint64_t seed = 1;

  LatticePlan plan() const {
    if (!(step > 0.0 && step <= 0.5)) throw ConfigError("step must lie in (0, 1/2]");
    if (mc_points < 16) throw ConfigError("mc-points must be >= 16");
    LatticePlan p;
    p.mode = lattice_mode(lattice);
    p.step = step;
    p.tensor_limit = tensor_limit;
    p.mc_points = mc_points;
    p.seed = seed;
    return p;
  }
};

void add_plan(CLI::App* app, PlanOpts& p) {
  app->add_option("--lattice", p.lattice, "auto | tensor | mc")->capture_default_str();
  app->add_option("--step", p.step, "tensor lattice step")->capture_default_str();
  app->add_option("--tensor-limit", p.tensor_limit, "largest tensor lattice in auto mode")->capture_default_str();
  app->add_option("--mc-points", p.mc_points, "Monte Carlo points per lattice")->capture_default_str();
  app->add_option("--seed", p.seed, "base seed (lattices and trials)")->capture_default_str();
}

struct SweepOpts {
  int n = 2, m = 4, s = 0;
  std::vector<double> ps{2.0, 4.0, 6.0};
  std::vector<std::uint64_t> Rs{16, 256, 4096};
  std::string family = "random-phase";
  int trials = 8;
  double max_slope = kUnset;
  PlanOpts plan;
};

int run_ratio_sweep(const SweepOpts& o, const Common& c, std::ostream& out, std::ostream& err) {
  check_dims(o.n, o.m, o.s);
  check_ps(o.ps);
  std::vector<int> R_log2s;
  for (auto R : o.Rs) R_log2s.push_back(scale_log2(R, "R", o.m));
  if (R_log2s.size() < 3) throw ConfigError("a slope fit needs at least 3 values of R");
  RatioConfig cfg;
  cfg.n = o.n;
  cfg.m = o.m;
  cfg.s = o.s;
  cfg.ps = o.ps;
  cfg.family = family(o.family);
  cfg.trial_seeds = trial_seeds(o.plan.seed, o.trials);
  cfg.lhs_plan = o.plan.plan();
  cfg.rhs_plan = cfg.lhs_plan;

  const auto res = sweep_and_fit(cfg, R_log2s);
  Sink sink(c.out, out);
  auto& os = sink.os();
  schema_line(os, "ratio-sweep", true);
  ratio_header(os);
  for (const auto& r : res.rows) ratio_row(os, r);
  write_plot_data(c.plot, res.ps, res.fits, nullptr);

  bool ok = true;
  for (std::size_t k = 0; k < res.ps.size(); ++k) {
    const bool pass = !is_set(o.max_slope) || res.fits[k].slope <= o.max_slope;
    ok = ok && pass;
    err << "ratio-sweep p=" << num(res.ps[k]) << ": slope of log2(max ratio) vs log2 R = " << res.fits[k].slope
        << " (residual " << res.fits[k].residual << ")";
    if (is_set(o.max_slope)) err << ", bound " << o.max_slope << (pass ? " PASS" : " FAIL");
    err << "\n";
  }
  return ok ? kExitOk : kExitAssertion;
}

struct SharpOpts {
  int n = 2, m = 4;
  std::vector<double> ps{6.0, 8.0, 12.0};
  std::vector<std::uint64_t> Rs{256, 4096, 65536};
  double slope_tol = kUnset;
  double min_gap = kUnset;
  PlanOpts plan;
};

int run_sharpness(const SharpOpts& o, const Common& c, std::ostream& out, std::ostream& err) {
  check_dims(o.n, o.m, 0);
  check_ps(o.ps);
  std::vector<int> R_log2s;
  for (auto R : o.Rs) R_log2s.push_back(scale_log2(R, "R", o.m));
  if (R_log2s.size() < 3) throw ConfigError("a slope fit needs at least 3 values of R");
  const auto res = sharpness_experiment(o.n, o.m, o.ps, R_log2s, o.plan.plan());
  Sink sink(c.out, out);
  auto& os = sink.os();
  schema_line(os, "sharpness", true);
  ratio_header(os);
  for (const auto& r : res.rows) ratio_row(os, r);
  write_plot_data(c.plot, res.ps, res.fits, &res.predicted);

  bool ok = true;
  for (std::size_t k = 0; k < res.ps.size(); ++k) {
    const double dev = res.fits[k].slope - res.predicted[k];
    const bool pass = !is_set(o.slope_tol) || std::abs(dev) <= o.slope_tol;
    ok = ok && pass;
    err << "sharpness p=" << num(res.ps[k]) << ": slope " << res.fits[k].slope << ", predicted " << res.predicted[k];
    if (is_set(o.slope_tol)) err << ", tolerance " << o.slope_tol << (pass ? " PASS" : " FAIL");
    err << "\n";
  }
  if (is_set(o.min_gap)) {
    std::vector<std::size_t> order(res.ps.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return res.ps[a] < res.ps[b]; });
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      const double gap = res.fits[order[i + 1]].slope - res.fits[order[i]].slope;
      const bool pass = gap >= o.min_gap;
      ok = ok && pass;
      err << "sharpness slope gap p=" << num(res.ps[order[i + 1]]) << " minus p=" << num(res.ps[order[i]]) << ": "
          << gap << ", minimum " << o.min_gap << (pass ? " PASS" : " FAIL") << "\n";
    }
  }
  return ok ? kExitOk : kExitAssertion;
}

struct TrivialOpts {
  int n = 2, m = 4, s = 0;
  std::uint64_t K = 16;
  std::string family = "all";
  int trials = 4;
  std::vector<double> ps{4.0, 6.0};
  PlanOpts plan;
};

int run_trivial(const TrivialOpts& o, const Common& c, std::ostream& out, std::ostream& err) {
  check_dims(o.n, o.m, o.s);
  check_ps(o.ps);
  const int K_log2 = scale_log2(o.K, "K", o.m);
  std::vector<Family> fams;
  if (o.family == "all") {
    fams = {Family::RandomPhase, Family::Focusing, Family::SingleCap};
  } else {
    fams = {family(o.family)};
  }
  const auto seeds = trial_seeds(o.plan.seed, o.trials);
  const auto plan = o.plan.plan();

  Sink sink(c.out, out);
  auto& os = sink.os();
  schema_line(os, "trivial-check", true);
  ratio_header(os);
  bool ok = true;
  for (Family f : fams) {
    const auto res = trivial_decoupling_check(f, seeds, o.n, o.m, o.s, K_log2, o.ps, plan);
    double worst = 0.0;
    for (const auto& r : res.rows) {
      ratio_row(os, r);
      worst = std::max(worst, r.ratio);
    }
    const double upper = 10.0 * res.bound_scale;
    const bool upper_ok = worst <= upper;
    ok = ok && upper_ok;
    err << "trivial-check " << family_name(f) << " n=" << o.n << " K=" << o.K << ": #tau=" << res.num_tau
        << " max ratio " << worst << " <= " << upper << (upper_ok ? " PASS" : " FAIL");
    if (f == Family::Focusing) {
      const double lower = 0.2 * std::sqrt(static_cast<double>(res.num_tau));
      const bool lower_ok = worst >= lower;
      ok = ok && lower_ok;
      err << "; focusing max ratio >= " << lower << (lower_ok ? " PASS" : " FAIL");
    }
    err << "\n";
  }
  return ok ? kExitOk : kExitAssertion;
}

struct BenchOpts {
  int n = 3, m = 4;
  std::uint64_t R = 256;
  std::size_t points = 65;
  double step = 0.5;
  int rank = 1;
  std::uint64_t seed = 1;
  double min_speedup = 10.0;
  double max_diff = 1e-10;
};

// Smooth random factors: a + b cos(2 pi xi) + i c sin(2 pi (xi + d)).
SeparableFunction bench_function(const TensorRule& rule, int rank, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SeparableFunction g;
  g.rule = rule;
  for (int r = 0; r < rank; ++r) {
    std::vector<std::vector<cplx>> term;
    for (const auto& ax : rule.axes) {
      const double a = u(rng), b = u(rng), cc = u(rng), d = u(rng);
      std::vector<cplx> v;
      for (double xi : ax.nodes) {
        v.emplace_back(a + b * std::cos(2 * std::numbers::pi * xi), cc * std::sin(2 * std::numbers::pi * (xi + d)));
      }
      term.push_back(std::move(v));
    }
    g.terms.push_back(std::move(term));
  }
  return g;
}

int run_bench(const BenchOpts& o, const Common& c, std::ostream& out, std::ostream& err) {
  check_dims(o.n, o.m, 0);
  const int R_log2 = scale_log2(o.R, "R", o.m);
  if (o.points < 1) throw ConfigError("points must be >= 1");
  if (!(o.step > 0.0 && o.step <= 0.5)) throw ConfigError("step must lie in (0, 1/2]");
  if (o.rank < 1) throw ConfigError("rank must be >= 1");
  const SurfaceSpec surface = SurfaceSpec::monomial(o.n, o.m);
  // Representative cap: the last one, curved on every coordinate.
  const auto fam = cap_family(R_log2, o.m, surface.phase_mask());
  const Cap cap = fam.at(fam.size() - 1);
  std::vector<std::pair<double, double>> sides;
  for (const auto& iv : cap.coords) sides.emplace_back(iv.lo.to_double_lossy(), iv.hi.to_double_lossy());

  const auto nd = static_cast<std::size_t>(o.n);
  const double half = 0.5 * o.step * static_cast<double>(o.points - 1);
  auto X = std::make_shared<const Lattice>(Lattice::tensor(std::vector<double>(nd, -half), std::vector<double>(nd, o.step),
                                                           std::vector<std::size_t>(nd, o.points)));
  const auto rule = TensorRule::for_lattice(sides, surface, *X);
  const auto g = bench_function(rule, o.rank, o.seed);
  const auto grid = g.expand();

  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  const auto direct = extend_direct(grid, surface, X);
  const double direct_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  t0 = clock::now();
  const auto sep = extend_separable(g, surface, X);
  const double sep_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  double diff = 0.0;
  for (std::size_t i = 0; i < direct.values.size(); ++i) diff = std::max(diff, std::abs(direct.values[i] - sep.values[i]));
  const double speedup = direct_ms / std::max(sep_ms, 1e-6);

  if (!c.dump.empty()) {
    std::ofstream f(c.dump);
    if (!f) throw ConfigError("cannot open " + c.dump);
    write_field_csv(sep, f);
  }
  Sink sink(c.out, out);
  auto& os = sink.os();
  schema_line(os, "bench", false);
  os << "n,m,R,cap,lattice_points,quadrature_nodes,rank,max_abs_diff,direct_ms,separable_ms,speedup\n";
  os << o.n << ',' << o.m << ',' << o.R << ',' << cap_text(cap) << ',' << X->size() << ',' << rule.size() << ','
     << o.rank << ',' << num(diff) << ',' << num(std::round(direct_ms * 1000.0) / 1000.0) << ','
     << num(std::round(sep_ms * 1000.0) / 1000.0) << ',' << num(std::round(speedup * 100.0) / 100.0) << "\n";

  const bool diff_ok = diff <= o.max_diff;
  // A single point leaves nothing to amortize, so the speedup is only recorded.
  const bool speed_asserted = X->size() > 1;
  const bool speed_ok = !speed_asserted || speedup >= o.min_speedup;
  err << "bench n=" << o.n << " m=" << o.m << " R=" << o.R << " lattice " << o.points << "^" << o.n << ": direct "
      << direct_ms << " ms, separable " << sep_ms << " ms, speedup " << speedup;
  if (speed_asserted) err << " (>= " << o.min_speedup << (speed_ok ? " PASS" : " FAIL") << ")";
  err << ", max abs diff " << diff << " (<= " << o.max_diff << (diff_ok ? " PASS" : " FAIL") << ")\n";
  return diff_ok && speed_ok ? kExitOk : kExitAssertion;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  try {
    args = expand_config(raw_args);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  CLI::App app{"Numerical experiments for decoupling on finite-type surfaces", "decoup"};
  app.require_subcommand(1);
  app.footer("--config FILE reads options from a JSON object keyed by option name.");
  Common common;
  auto common_opts = [&](CLI::App* sub) {
    sub->add_option("--out", common.out, "CSV output file (default stdout)");
  };

  CapsOpts caps;
  auto* s_caps = app.add_subcommand("caps", "list F_n(R, m, s) and check that it tiles [0,1]^{n-1}");
  s_caps->add_option("--n", caps.n)->capture_default_str();
  s_caps->add_option("--m", caps.m)->capture_default_str();
  s_caps->add_option("--s", caps.s)->capture_default_str();
  s_caps->add_option("--R", caps.R)->capture_default_str();
  common_opts(s_caps);

  RegionOpts regions;
  auto* s_reg = app.add_subcommand("regions", "list the Omega_b regions at scale K");
  s_reg->add_option("--n", regions.n)->capture_default_str();
  s_reg->add_option("--m", regions.m)->capture_default_str();
  s_reg->add_option("--s", regions.s)->capture_default_str();
  s_reg->add_option("--K", regions.K)->capture_default_str();
  common_opts(s_reg);

  RescaleOpts resc;
  auto* s_resc = app.add_subcommand("verify-rescale", "check the rescaling claim for every coarse cap");
  s_resc->add_option("--n", resc.n)->capture_default_str();
  s_resc->add_option("--m", resc.m)->capture_default_str();
  s_resc->add_option("--s", resc.s)->capture_default_str();
  s_resc->add_option("--K", resc.K)->capture_default_str();
  s_resc->add_option("--R", resc.R)->capture_default_str();
  s_resc->add_option("--samples", resc.samples, "random samples for the phase identity")->capture_default_str();
  s_resc->add_option("--seed", resc.seed)->capture_default_str();
  common_opts(s_resc);

  SweepOpts sweep;
  auto* s_sweep = app.add_subcommand("ratio-sweep", "decoupling ratios over R and a slope fit per p");
  s_sweep->add_option("--n", sweep.n)->capture_default_str();
  s_sweep->add_option("--m", sweep.m)->capture_default_str();
  s_sweep->add_option("--s", sweep.s)->capture_default_str();
  s_sweep->add_option("--p", sweep.ps)->capture_default_str();
  s_sweep->add_option("--R", sweep.Rs)->capture_default_str();
  s_sweep->add_option("--family", sweep.family, "random-phase | focusing | single-cap")->capture_default_str();
  s_sweep->add_option("--trials", sweep.trials)->capture_default_str();
  s_sweep->add_option("--max-slope", sweep.max_slope, "fail if a fitted slope exceeds this");
  s_sweep->add_option("--emit-plot-script", common.plot, "write x,y data for plotting");
  add_plan(s_sweep, sweep.plan);
  common_opts(s_sweep);

  SharpOpts sharp;
  auto* s_sharp = app.add_subcommand("sharpness", "slopes of the flat-g example against the predicted exponent");
  s_sharp->add_option("--n", sharp.n)->capture_default_str();
  s_sharp->add_option("--m", sharp.m)->capture_default_str();
  s_sharp->add_option("--p", sharp.ps)->capture_default_str();
  s_sharp->add_option("--R", sharp.Rs)->capture_default_str();
  s_sharp->add_option("--slope-tol", sharp.slope_tol, "fail if |slope - predicted| exceeds this");
  s_sharp->add_option("--min-gap", sharp.min_gap, "fail if slopes grow by less than this between consecutive p");
  s_sharp->add_option("--emit-plot-script", common.plot, "write x,y data for plotting");
  add_plan(s_sharp, sharp.plan);
  common_opts(s_sharp);

  TrivialOpts triv;
  auto* s_triv = app.add_subcommand("trivial-check", "Cauchy-Schwarz decoupling over the coarse caps at scale K");
  s_triv->add_option("--n", triv.n)->capture_default_str();
  s_triv->add_option("--m", triv.m)->capture_default_str();
  s_triv->add_option("--s", triv.s)->capture_default_str();
  s_triv->add_option("--K", triv.K)->capture_default_str();
  s_triv->add_option("--family", triv.family, "all | random-phase | focusing | single-cap")->capture_default_str();
  s_triv->add_option("--trials", triv.trials)->capture_default_str();
  s_triv->add_option("--p", triv.ps)->capture_default_str();
  add_plan(s_triv, triv.plan);
  common_opts(s_triv);

  BenchOpts bench;
  auto* s_bench = app.add_subcommand("bench", "direct against separable evaluation of E g");
  s_bench->add_option("--n", bench.n)->capture_default_str();
  s_bench->add_option("--m", bench.m)->capture_default_str();
  s_bench->add_option("--R", bench.R)->capture_default_str();
  s_bench->add_option("--points", bench.points, "lattice points per axis")->capture_default_str();
  s_bench->add_option("--step", bench.step)->capture_default_str();
  s_bench->add_option("--rank", bench.rank)->capture_default_str();
  s_bench->add_option("--seed", bench.seed)->capture_default_str();
  s_bench->add_option("--min-speedup", bench.min_speedup)->capture_default_str();
  s_bench->add_option("--max-diff", bench.max_diff)->capture_default_str();
  s_bench->add_option("--dump-field", common.dump, "write the separable field as CSV");
  common_opts(s_bench);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (s_caps->parsed()) return run_caps(caps, common, out, err);
    if (s_reg->parsed()) return run_regions(regions, common, out, err);
    if (s_resc->parsed()) return run_verify_rescale(resc, common, out, err);
    if (s_sweep->parsed()) return run_ratio_sweep(sweep, common, out, err);
    if (s_sharp->parsed()) return run_sharpness(sharp, common, out, err);
    if (s_triv->parsed()) return run_trivial(triv, common, out, err);
    if (s_bench->parsed()) return run_bench(bench, common, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ScaleError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitAssertion;
  }
  return kExitConfig;
}

}  // namespace decoup::cli
