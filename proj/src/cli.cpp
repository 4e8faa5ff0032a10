#include "rst/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include "rst/counterexample.hpp"
#include "rst/fundsol.hpp"
#include "rst/harmonics.hpp"
#include "rst/parallel.hpp"
#include "rst/quadrature.hpp"
#include "rst/specfun.hpp"
#include "rst/spectral.hpp"
#include "rst/sweep.hpp"

namespace rst::cli {

namespace {

enum class Kind { Int, Real, Text, Choice, List };

struct Knob {
  const char *name;
  const char *fallback;
  Kind kind;
  double lo = -1e300;
  double hi = 1e300;
  std::vector<std::string> choices = {};
  bool lo_open = false;
};

const std::vector<Knob> &knobs() {
  static const std::vector<Knob> table = {
      {"scenario", "", Kind::Choice, 0, 0,
       {"specfun-check", "harmonics-check", "fundsol-check", "sweep", "extend", "counterexample"}},
      {"seed", "1", Kind::Int, 0, 9.0e18},
      {"poles", "", Kind::Text},
      // specfun-check
      {"wronskian_samples", "40", Kind::Int, 1, 100000},
      {"wronskian_l_max", "4", Kind::Int, 0, 32},
      {"z_min", "0.1", Kind::Real, 0, 1e3, {}, true},
      {"z_max", "30", Kind::Real, 0, 1e3, {}, true},
      // harmonics-check and extend
      {"L", "8", Kind::Int, 0, 32},
      {"n_theta", "24", Kind::Int, 2, 512},
      {"n_phi", "48", Kind::Int, 3, 1024},
      // fundsol-check
      {"decay_radius", "1", Kind::Real, 0, 1e3, {}, true},
      {"decay_t_lo", "5", Kind::Real, 0, 1e6, {}, true},
      {"decay_t_hi", "200", Kind::Real, 0, 1e6, {}, true},
      {"decay_samples", "40", Kind::Int, 3, 100000},
      // extend
      {"tau1", "0.05", Kind::Real, 0, 1e6, {}, true},
      {"tau2", "40", Kind::Real, 0, 1e6, {}, true},
      {"nodes", "32", Kind::Int, 8, 100000},
      {"rho", "0", Kind::Real, 0, 1e3},
      {"radial_nodes", "64", Kind::Int, 4, 4096},
      {"pressure_nodes", "16", Kind::Int, 2, 4096},
      {"transform", "quadrature", Kind::Choice, 0, 0, {"quadrature", "analytic"}},
      {"t_max", "200", Kind::Real, 0, 1e6, {}, true},
      {"n_t", "4096", Kind::Int, 16, 10000000},
      {"t_lo", "0.5", Kind::Real, -1e6, 1e6},
      {"t_hi", "4", Kind::Real, -1e6, 1e6},
      {"n_times", "36", Kind::Int, 2, 100000},
      {"sup_threshold", "0.05", Kind::Real, 0, 1e6, {}, true},
      {"growth_r_max", "10", Kind::Real, 0, 1e4, {}, true},
      // sweep
      {"K_lo", "-1", Kind::Real, -1e6, 1e6},
      {"K_hi", "1", Kind::Real, -1e6, 1e6},
      {"K_t0", "1", Kind::Real, 0, 1e6, {}, true},
      {"K_t1", "2", Kind::Real, 0, 1e6, {}, true},
      {"K_n", "6", Kind::Int, 2, 1000},
      {"K_nt", "5", Kind::Int, 2, 1000},
      {"target", "3,0,0,0.5,0,0,1", Kind::List},
      {"region_center", "3.5,0,0", Kind::List},
      {"region_radius", "0.4", Kind::Real, 0, 1e6, {}, true},
      {"region_s_lo", "0.3", Kind::Real, -1e6, 1e6},
      {"region_s_hi", "0.7", Kind::Real, -1e6, 1e6},
      {"sweep_sizes", "25,50,100,200", Kind::List},
      {"lambda", "-1", Kind::Real, -1, 1e6},
      {"sweep_ratio", "1e-3", Kind::Real, 0, 1e6, {}, true},
      // counterexample
      {"caloric_sizes", "8,32,128", Kind::List},
      {"catalog_size", "64", Kind::Int, 1, 100000},
      {"synthetic_candidates", "8", Kind::Int, 0, 100000},
  };
  return table;
}

const Knob *find_knob(const std::string &key) {
  for (const Knob &k : knobs())
    if (key == k.name) return &k;
  return nullptr;
}

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_real(const std::string &s, double &out) {
  std::istringstream in(s);
  in >> out;
  return in && (in >> std::ws).eof() && std::isfinite(out);
}

bool parse_int(const std::string &s, long &out) {
  std::istringstream in(s);
  in >> out;
  return in && (in >> std::ws).eof();
}

std::vector<double> split_list(const std::string &s, bool &ok) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  ok = true;
  while (std::getline(ss, item, ',')) {
    double v;
    if (!parse_real(trim(item), v)) ok = false;
    out.push_back(v);
  }
  if (out.empty()) ok = false;
  return out;
}

std::string format_range(const Knob &k) {
  std::ostringstream o;
  o << (k.lo_open ? "(" : "[") << k.lo << ", " << k.hi << "]";
  return o.str();
}

// Type and range check of one value; the prefix carries the line diagnostic.
void check_value(const Knob &k, const std::string &value, const std::string &prefix) {
  switch (k.kind) {
  case Kind::Int: {
    long v;
    if (!parse_int(value, v)) throw ConfigError(prefix + k.name + " expects an integer, got '" + value + "'");
    if (v < k.lo || v > k.hi)
      throw ConfigError(prefix + k.name + " = " + value + " is outside the allowed range " + format_range(k));
    break;
  }
  case Kind::Real: {
    double v;
    if (!parse_real(value, v)) throw ConfigError(prefix + k.name + " expects a real number, got '" + value + "'");
    if (v < k.lo || v > k.hi || (k.lo_open && v == k.lo))
      throw ConfigError(prefix + k.name + " = " + value + " is outside the allowed range " + format_range(k));
    break;
  }
  case Kind::Choice:
    if (std::find(k.choices.begin(), k.choices.end(), value) == k.choices.end()) {
      std::string opts;
      for (const auto &c : k.choices) opts += (opts.empty() ? "" : ", ") + c;
      throw ConfigError(prefix + k.name + " = '" + value + "' is not one of {" + opts + "}");
    }
    break;
  case Kind::List: {
    bool ok;
    split_list(value, ok);
    if (!ok) throw ConfigError(prefix + k.name + " expects a comma-separated list of numbers, got '" + value + "'");
    break;
  }
  case Kind::Text:
    break;
  }
}

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream o;
  o << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return o.str();
}

std::string fmt(double v) {
  std::ostringstream o;
  o << std::setprecision(12) << std::scientific << v;
  return o.str();
}

class CsvWriter {
public:
  CsvWriter(const std::filesystem::path &path, const std::string &scenario, const std::vector<std::string> &header)
      : out_(path) {
    if (!out_) throw ConfigError("cannot write " + path.string());
    out_ << "# scenario=" << scenario << " generated=" << timestamp() << "\n";
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << "\n";
  }
  template <class... T> void row(const T &...cells) {
    std::size_t i = 0;
    ((out_ << (i++ ? "," : "") << cell(cells)), ...);
    out_ << "\n";
  }

private:
  std::ofstream out_;
  static std::string cell(double v) { return fmt(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  static std::string cell(const std::string &v) { return v; }
  static std::string cell(const char *v) { return v; }
};

struct Context {
  const ScenarioConfig &cfg;
  std::filesystem::path dir;
  std::ostream &log;
  RunResult result;

  std::filesystem::path file(const std::string &name) {
    result.files.push_back(name);
    return dir / name;
  }
  void check(const std::string &name, double value, double threshold, bool pass) {
    result.checks.push_back({name, value, threshold, pass});
    log << (pass ? "  ok    " : "  FAIL  ") << name << " = " << value << " (threshold " << threshold << ")\n";
  }
  void check_below(const std::string &name, double value, double threshold) {
    check(name, value, threshold, value < threshold);
  }
};

std::vector<fundsol::PoleSource> load_poles(const ScenarioConfig &cfg, const fundsol::PoleSource &fallback) {
  const std::string path = cfg.str("poles");
  if (path.empty()) return {fallback};
  std::ifstream in(path);
  if (!in) throw ConfigError("poles: cannot open '" + path + "'");
  try {
    return fundsol::read_poles_csv(in);
  } catch (const std::exception &e) {
    throw ConfigError("poles: " + path + ": " + e.what());
  }
}

const fundsol::PoleSource kReferencePole{Vec3(2.0, 0.0, 0.0), 0.0, Vec3(0.0, 0.0, 1.0)};

// ---------------------------------------------------------------------------

void run_specfun(Context &ctx) {
  const long n = ctx.cfg.integer("wronskian_samples");
  const long lmax = ctx.cfg.integer("wronskian_l_max");
  const double zmin = ctx.cfg.num("z_min"), zmax = ctx.cfg.num("z_max");
  CsvWriter csv(ctx.file("wronskian.csv"), ctx.cfg.scenario(), {"nu", "z_re", "z_im", "residual", "pass"});
  double worst = 0.0, worst_series = 0.0;
  for (long l = 0; l <= lmax; ++l) {
    const specfun::HalfIntOrder nu(static_cast<int>(l));
    for (long i = 0; i < n; ++i) {
      const double f = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
      const double mod = zmin * std::pow(zmax / zmin, f);
      const double arg = -kPi / 4 + kPi / 2 * quad::radical_inverse(i + 1, 2);
      const cplx z = std::polar(mod, arg);
      const double res = std::abs(z * specfun::wronskian_residual(nu, specfun::ComplexArg(z)));
      worst = std::max(worst, res);
      csv.row(nu.nu(), z.real(), z.imag(), res, res < 1e-10);
      // The closed form cancels for small |z| and the series for large |z|; compare where both hold.
      if (mod >= 2.0 && mod <= 8.0) {
        const cplx a = specfun::bessel_i_series(nu.nu(), specfun::ComplexArg(z));
        const cplx b = specfun::bessel_i_closed(nu, specfun::ComplexArg(z));
        worst_series = std::max(worst_series, std::abs(a - b) / std::abs(b));
      }
    }
  }
  ctx.check_below("wronskian_max_residual", worst, 1e-10);
  ctx.check_below("series_vs_closed_I_relative", worst_series, 1e-10);
}

void run_harmonics(Context &ctx) {
  const int L = static_cast<int>(ctx.cfg.integer("L"));
  const harmonics::SphereQuadrature quad(static_cast<int>(ctx.cfg.integer("n_theta")),
                                         static_cast<int>(ctx.cfg.integer("n_phi")));
  const int nm = harmonics::mode_count(L);
  std::vector<std::vector<cplx>> ys(nm);
  std::vector<std::vector<harmonics::VshTriple>> vs(nm);
  std::vector<harmonics::ModeIndex> modes;
  for (int l = 0; l <= L; ++l)
    for (int m = -l; m <= l; ++m) modes.emplace_back(l, m);
  parallel_for(modes.size(), [&](std::size_t k) {
    for (std::size_t q = 0; q < quad.size(); ++q) {
      ys[k].push_back(harmonics::ylm(modes[k], quad.point(q)));
      vs[k].push_back(harmonics::vsh(modes[k], quad.point(q)));
    }
  });
  std::vector<double> sdev(L + 1, 0.0), vdev(L + 1, 0.0);
  for (int a = 0; a < nm; ++a)
    for (int b = 0; b < nm; ++b) {
      cplx s = 0.0;
      cplx g[3][3] = {};
      for (std::size_t q = 0; q < quad.size(); ++q) {
        const double w = quad.weight(q);
        s += w * ys[a][q] * std::conj(ys[b][q]);
        const CVec3 *va[3] = {&vs[a][q].Y, &vs[a][q].Psi, &vs[a][q].Phi};
        const CVec3 *vb[3] = {&vs[b][q].Y, &vs[b][q].Psi, &vs[b][q].Phi};
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) g[i][j] += w * vb[j]->dot(*va[i]);
      }
      const double delta = a == b ? 1.0 : 0.0;
      const double mu = modes[a].mu();
      const int l = modes[a].l;
      sdev[l] = std::max(sdev[l], std::abs(s - delta));
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double expect = 0.0;
          if (i == j && a == b) expect = i == 0 ? 1.0 : mu;
          vdev[l] = std::max(vdev[l], std::abs(g[i][j] - expect));
        }
    }
  CsvWriter csv(ctx.file("gram.csv"), ctx.cfg.scenario(), {"l", "scalar_deviation", "vector_deviation"});
  double smax = 0.0, vmax = 0.0;
  for (int l = 0; l <= L; ++l) {
    csv.row(l, sdev[l], vdev[l]);
    smax = std::max(smax, sdev[l]);
    vmax = std::max(vmax, vdev[l]);
  }
  ctx.check_below("scalar_gram_deviation", smax, 1e-10);
  ctx.check_below("vector_gram_deviation", vmax, 1e-10);

  // Projection round trip of a random vector field with known coefficients.
  std::mt19937_64 rng(ctx.cfg.seed());
  std::normal_distribution<double> gauss;
  std::vector<harmonics::VectorCoeffs> truth(nm);
  for (int k = 0; k < nm; ++k) {
    truth[k] = {{gauss(rng), gauss(rng)}, {gauss(rng), gauss(rng)}, {gauss(rng), gauss(rng)}};
    if (modes[k].l == 0) truth[k].first = truth[k].second = 0.0;
  }
  std::vector<CVec3> samples(quad.size(), CVec3::Zero());
  for (std::size_t q = 0; q < quad.size(); ++q)
    for (int k = 0; k < nm; ++k)
      samples[q] += truth[k].radial * vs[k][q].Y + truth[k].first * vs[k][q].Psi + truth[k].second * vs[k][q].Phi;
  const harmonics::HarmonicTable table(quad, L);
  const auto got = table.project_vector(samples);
  double rt = 0.0;
  for (int k = 0; k < nm; ++k)
    rt = std::max({rt, std::abs(got[k].radial - truth[k].radial), std::abs(got[k].first - truth[k].first),
                   std::abs(got[k].second - truth[k].second)});
  ctx.check_below("vector_round_trip", rt, 1e-10);
}

double fd4(const std::function<double(double)> &f, double x, double h) {
  return (f(x - 2 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2 * h)) / (12.0 * h);
}

void run_fundsol(Context &ctx) {
  const auto poles = load_poles(ctx.cfg, kReferencePole);
  const double R = ctx.cfg.num("decay_radius");
  for (const auto &p : poles)
    if (p.location.norm() <= R) throw ConfigError("decay_radius: every pole must lie outside the ball");
  const auto pts = spectral::ball_grid(R);
  const double t_lo = ctx.cfg.num("decay_t_lo"), t_hi = ctx.cfg.num("decay_t_hi");
  const long n = ctx.cfg.integer("decay_samples");
  double s_max = -1e300;
  for (const auto &p : poles) s_max = std::max(s_max, p.time);

  CsvWriter csv(ctx.file("decay.csv"), ctx.cfg.scenario(), {"t", "sup_v1"});
  std::vector<double> lx, ly;
  for (long i = 0; i < n; ++i) {
    const double t = t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (n - 1));
    double sup = 0.0;
    for (const Vec3 &x : pts) sup = std::max(sup, fundsol::stokeslet_field(poles, {x, t}).norm());
    csv.row(t, sup);
    if (sup > 0.0) {
      lx.push_back(std::log(t));
      ly.push_back(std::log(sup));
    }
  }
  double slope = 0.0;
  if (lx.size() >= 2) {
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
    slope = sxy / sxx;
  }
  ctx.check("decay_exponent_offset", std::abs(slope + 1.5), 0.15, std::abs(slope + 1.5) <= 0.15);

  // Divergence and the pressure-free curl criterion at times after every pole fires.
  const double h = 1e-3 * R, H = 2e-2 * R, ht = 1e-3;
  auto v = [&](const Vec3 &x, double t) { return fundsol::stokeslet_field(poles, {x, t}); };
  const Vec3 e[3] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  double div_rel = 0.0, curl_rel = 0.0;
  for (double dt : {0.5, 1.0, 3.0}) {
    const double t = s_max + dt;
    // The curl of d_t v can vanish pointwise, so it is normalized by its maximum over the grid at this time.
    double curl_diff = 0.0, curl_scale = 0.0;
    for (const Vec3 &x : pts) {
      Eigen::Matrix3d grad;
      for (int a = 0; a < 3; ++a)
        for (int i = 0; i < 3; ++i)
          grad(i, a) = fd4([&](double s) { return v(x + (s - x(a)) * e[a], t)(i); }, x(a), h);
      div_rel = std::max(div_rel, std::abs(grad.trace()) / grad.norm());
      auto heat = [&](const Vec3 &y) {
        Vec3 lap = -90.0 * v(y, t);
        for (int a = 0; a < 3; ++a)
          lap += 16.0 * (v(y + H * e[a], t) + v(y - H * e[a], t)) - (v(y + 2 * H * e[a], t) + v(y - 2 * H * e[a], t));
        lap /= 12.0 * H * H;
        const Vec3 vt = (v(y, t - 2 * ht) - 8.0 * v(y, t - ht) + 8.0 * v(y, t + ht) - v(y, t + 2 * ht)) / (12.0 * ht);
        return std::make_pair(vt, lap);
      };
      Eigen::Matrix3d Dt, Dl;
      for (int a = 0; a < 3; ++a) {
        const auto m2 = heat(x - 2 * H * e[a]), m1 = heat(x - H * e[a]), p1 = heat(x + H * e[a]), p2 = heat(x + 2 * H * e[a]);
        Dt.col(a) = (m2.first - 8.0 * m1.first + 8.0 * p1.first - p2.first) / (12.0 * H);
        Dl.col(a) = (m2.second - 8.0 * m1.second + 8.0 * p1.second - p2.second) / (12.0 * H);
      }
      auto curl = [](const Eigen::Matrix3d &D) { return Vec3(D(2, 1) - D(1, 2), D(0, 2) - D(2, 0), D(1, 0) - D(0, 1)); };
      const Vec3 ct = curl(Dt), cl = curl(Dl);
      curl_diff = std::max(curl_diff, (ct - cl).norm());
      curl_scale = std::max(curl_scale, ct.norm() + cl.norm());
    }
    if (curl_scale > 0.0) curl_rel = std::max(curl_rel, curl_diff / curl_scale);
  }
  ctx.check_below("divergence_relative", div_rel, 1e-6);
  ctx.check_below("curl_criterion_relative", curl_rel, 1e-4);

  // Time transform against the closed form.
  double tr = 0.0;
  for (double tau : {0.1, 1.0, 10.0, 40.0})
    for (const Vec3 &x : {pts[0], pts[pts.size() / 2], pts.back()}) {
      const CVec3 a = fundsol::stokeslet_transform(poles, x, tau);
      const CVec3 q = spectral::time_fourier(poles, x, tau);
      tr = std::max(tr, (a - q).norm() / a.norm());
    }
  ctx.check_below("transform_quadrature_relative", tr, 1e-3);

  // Translation covariance.
  const Vec3 x0(0.3, -0.2, 0.1);
  const double t0 = 0.7;
  auto shifted = poles;
  for (auto &p : shifted) p.location += x0, p.time += t0;
  double cov = 0.0;
  for (const Vec3 &x : pts) {
    const Vec3 a = fundsol::stokeslet_field(poles, {x, 1.3 + s_max});
    const Vec3 b = fundsol::stokeslet_field(shifted, {x + x0, 1.3 + s_max + t0});
    cov = std::max(cov, (a - b).norm() / std::max(a.norm(), 1e-300));
  }
  ctx.check_below("translation_covariance", cov, 1e-10);
}

sweep::CompactBox sweep_box(const ScenarioConfig &cfg) {
  sweep::CompactBox K;
  K.lo = Vec3::Constant(cfg.num("K_lo"));
  K.hi = Vec3::Constant(cfg.num("K_hi"));
  K.t0 = cfg.num("K_t0");
  K.t1 = cfg.num("K_t1");
  K.nx = K.ny = K.nz = static_cast<int>(cfg.integer("K_n"));
  K.nt = static_cast<int>(cfg.integer("K_nt"));
  return K;
}

void run_sweep(Context &ctx) {
  const auto &cfg = ctx.cfg;
  const sweep::CompactBox K = sweep_box(cfg);
  std::vector<fundsol::PoleSource> target;
  if (!cfg.str("poles").empty()) {
    target = load_poles(cfg, kReferencePole);
  } else {
    const auto t = cfg.list("target");
    if (t.size() != 7) throw ConfigError("target expects 7 numbers y1,y2,y3,s,c1,c2,c3");
    target.push_back({Vec3(t[0], t[1], t[2]), t[3], Vec3(t[4], t[5], t[6])});
  }
  const auto c = cfg.list("region_center");
  if (c.size() != 3) throw ConfigError("region_center expects 3 numbers");
  const sweep::PoleRegion region{Vec3(c[0], c[1], c[2]), cfg.num("region_radius"), cfg.num("region_s_lo"),
                                 cfg.num("region_s_hi")};
  std::vector<int> sizes;
  for (double s : cfg.list("sweep_sizes")) {
    if (s < 0 || s != std::floor(s)) throw ConfigError("sweep_sizes must be non-negative integers");
    sizes.push_back(static_cast<int>(s));
  }
  const int jmax = *std::max_element(sizes.begin(), sizes.end());
  const auto candidates = sweep::place_poles(region, jmax, cfg.seed());
  const sweep::VectorField tf = [&](const Vec3 &x, double t) { return fundsol::stokeslet_field(target, {x, t}); };
  const double tsup = sweep::sup_error(tf, [](const Vec3 &, double) { return Vec3::Zero(); }, K.refined());

  sweep::FitOptions opts;
  opts.lambda = cfg.num("lambda");
  CsvWriter csv(ctx.file("fit.csv"), cfg.scenario(), {"J", "lambda", "l2_residual", "sup_residual", "cond_estimate"});
  CsvWriter poles_csv(ctx.file("fit_poles.csv"), cfg.scenario(), {"J", "y1", "y2", "y3", "s", "c1", "c2", "c3"});
  double prev = 1e300, worst_increase = 0.0, last_sup = tsup;
  for (int J : sizes) {
    sweep::DictionaryFit fit;
    try {
      fit = sweep::fit_dictionary(tf, K, std::span(candidates.data(), J), opts);
    } catch (const PreconditionError &e) {
      throw ConfigError(std::string("sweep: ") + e.what());
    }
    csv.row(J, fit.lambda, fit.l2_residual, fit.sup_residual, fit.cond_estimate);
    for (const auto &p : fit.merged())
      poles_csv.row(J, p.location.x(), p.location.y(), p.location.z(), p.time, p.strength.x(), p.strength.y(),
                    p.strength.z());
    if (prev < 1e300) worst_increase = std::max(worst_increase, fit.l2_residual - prev);
    prev = fit.l2_residual;
    last_sup = fit.sup_residual;
  }
  const double ratio = cfg.num("sweep_ratio");
  ctx.check_below("final_sup_over_target_sup", last_sup / tsup, ratio);
  if (opts.lambda == 0.0) ctx.check("residual_increase_in_J", worst_increase, 1e-10, worst_increase <= 1e-10);
}

void run_extend(Context &ctx) {
  const auto &cfg = ctx.cfg;
  const auto poles = load_poles(cfg, kReferencePole);
  double nearest = 1e300;
  for (const auto &p : poles) nearest = std::min(nearest, p.location.norm());
  double rho = cfg.num("rho");
  if (rho == 0.0) rho = 0.8 * nearest;
  if (!(rho < nearest)) throw ConfigError("rho: every pole must lie outside the ball of radius rho");
  if (!(cfg.num("tau1") < cfg.num("tau2"))) throw ConfigError("tau1 < tau2 required");

  const auto t_start = std::chrono::steady_clock::now();
  const auto band = spectral::ModeBand::gauss_legendre(static_cast<int>(cfg.integer("L")), cfg.num("tau1"),
                                                      cfg.num("tau2"), static_cast<int>(cfg.integer("nodes")));
  spectral::TimeFourierOptions topts;
  topts.t_max = cfg.num("t_max");
  topts.n_t = static_cast<int>(cfg.integer("n_t"));
  const auto kind = cfg.str("transform") == "analytic" ? spectral::TransformKind::Analytic
                                                       : spectral::TransformKind::Quadrature;
  const auto sampler = spectral::make_sampler(poles, band, kind, topts);
  spectral::ExtensionOptions eo;
  eo.rho = rho;
  eo.n_theta = static_cast<int>(cfg.integer("n_theta"));
  eo.n_phi = static_cast<int>(cfg.integer("n_phi"));
  eo.radial_nodes = static_cast<int>(cfg.integer("radial_nodes"));
  eo.pressure.radial_nodes = static_cast<int>(cfg.integer("pressure_nodes"));
  ctx.log << "  building coefficient table (" << band.size() << " frequencies, L = " << band.L << ")\n";
  auto table = spectral::build_coefficient_table(sampler, band, eo);
  {
    CsvWriter csv(ctx.file("coefficients.csv"), cfg.scenario(),
                  {"l", "m", "tau", "B_re", "B_im", "Cr_re", "Cr_im", "C2_re", "C2_im"});
    for (const auto &e : table.entries)
      csv.row(e.l, e.m, e.tau, e.B.real(), e.B.imag(), e.Cr.real(), e.Cr.imag(), e.C2.real(), e.C2.imag());
  }
  const double cr00 = table.cr00_relative;
  const spectral::GlobalSolution sol(std::move(table));
  spectral::ReconstructionGrid grid;
  grid.rho = rho;
  grid.t_lo = cfg.num("t_lo");
  grid.t_hi = cfg.num("t_hi");
  grid.n_t = static_cast<int>(cfg.integer("n_times"));
  auto row = spectral::reconstruction_report(poles, sol, grid);
  row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  {
    CsvWriter csv(ctx.file("reconstruction.csv"), cfg.scenario(), {"L", "tau1", "tau2", "sup_err", "l2_err", "runtime_s"});
    csv.row(row.L, row.tau1, row.tau2, row.sup_err, row.l2_err, row.runtime_s);
  }
  ctx.check_below("relative_sup_error", row.relative_sup(), cfg.num("sup_threshold"));
  ctx.check_below("cr00_relative", cr00, 1e-8);

  const double ts_arr[2] = {0.5 * (grid.t_lo + grid.t_hi), grid.t_hi};
  const std::vector<Vec3> pde_pts = {Vec3(0.3, 0.2, -0.1) * rho, Vec3(-0.5, 0.4, 0.3) * rho, Vec3(1.5, -0.5, 0.2) * rho,
                                     Vec3(0.0, 2.5, 1.0) * rho};
  const auto pde = spectral::pde_residual_check(sol, pde_pts, ts_arr);
  ctx.check_below("divergence_relative", pde.max_div_relative, 1e-4);
  ctx.check_below("stokes_residual_relative", pde.max_stokes_relative, 1e-3);
  const auto growth = spectral::growth_check(sol, cfg.num("growth_r_max"), ts_arr);
  ctx.check("velocity_growth_outer_ratio", growth.velocity_outer_ratio, 1.0, growth.velocity_outer_ratio <= 1.0);
  ctx.check("pressure_growth_outer_ratio", growth.pressure_outer_ratio, 1.0, growth.pressure_outer_ratio <= 1.0);
  const CVec3 vc = sol.velocity_complex(pde_pts[0], ts_arr[0]);
  const double imag = vc.imag().norm() / std::max(vc.real().norm(), 1e-300);
  ctx.check_below("imaginary_part_relative", imag, 1e-10);
}

void run_counterexample(Context &ctx) {
  using namespace counterexample;
  const auto &cfg = ctx.cfg;
  ExperimentOptions opts;
  opts.sizes.clear();
  for (double s : cfg.list("caloric_sizes")) {
    if (s < 0 || s != std::floor(s)) throw ConfigError("caloric_sizes must be non-negative integers");
    opts.sizes.push_back(static_cast<int>(s));
  }
  opts.seed = cfg.seed();
  opts.catalog_size = static_cast<int>(cfg.integer("catalog_size"));
  opts.synthetic_candidates = static_cast<int>(cfg.integer("synthetic_candidates"));
  const TheoremBReport rep = theoremB_experiment(opts);
  {
    CsvWriter csv(ctx.file("experiment.csv"), cfg.scenario(), {"J", "sup_error", "epsilon", "C0_hat", "pass_flag"});
    for (const auto &r : rep.rows) csv.row(r.J, r.sup_error, r.epsilon, r.C0_hat, r.pass);
  }
  {
    CsvWriter csv(ctx.file("experiment_bounds.csv"), cfg.scenario(), {"J", "used", "excluded", "lower_bound", "sup_error"});
    for (const auto &r : rep.rows) csv.row(r.J, r.used, r.excluded, r.lower_bound, r.sup_error);
  }
  {
    CsvWriter csv(ctx.file("contradiction.csv"), cfg.scenario(),
                  {"candidate", "distance", "sup_early", "inf_late", "contradiction"});
    for (std::size_t k = 0; k < rep.synthetic.size(); ++k) {
      const auto &s = rep.synthetic[k];
      csv.row(k, s.distance, s.sup_early, s.inf_late, s.contradiction);
    }
  }
  for (const auto &n : rep.notices) ctx.log << "  notice: " << n << "\n";
  ctx.log << "  C0_hat = " << rep.C0_hat << " (empirical lower bound from the source catalog), epsilon = " << rep.epsilon
          << "\n";
  for (const auto &r : rep.rows)
    ctx.check("fit_lower_bound_above_epsilon_J" + std::to_string(r.J), r.lower_bound, rep.epsilon, r.pass);
  bool all_fire = true;
  for (const auto &s : rep.synthetic) all_fire = all_fire && s.contradiction;
  ctx.check("synthetic_contradictions", static_cast<double>(rep.synthetic.size()), 0.0, all_fire);
  ctx.check("witness_excluded_as_non_caloric", rep.witness_excluded ? 1.0 : 0.0, 1.0, rep.witness_excluded);
  ctx.check_below("empty_dictionary_error_minus_2", std::abs(rep.empty_dictionary_error - 2.0), 1e-12);

  const CProfile c = make_c_profile(rep.eps0);
  double fd = 0.0;
  for (const auto &h : HarmonicPolynomial::catalog()) {
    const ParasiticSolution s = parasitic(c, h);
    std::mt19937_64 rng(cfg.seed());
    std::uniform_real_distribution<double> ux(-2.0, 2.0), ut(0.5, 4.0);
    for (int k = 0; k < 64; ++k) {
      const Vec3 x(ux(rng), ux(rng), ux(rng));
      fd = std::max(fd, stokes_residual_fd(s, x, ut(rng)));
    }
  }
  ctx.check_below("parasitic_stokes_residual", fd, 1e-8);
}

} // namespace

std::string ScenarioConfig::str(const std::string &key) const {
  const auto it = values.find(key);
  if (it == values.end()) throw ConfigError("unknown key '" + key + "'");
  return it->second;
}

double ScenarioConfig::num(const std::string &key) const {
  double v;
  if (!parse_real(str(key), v)) throw ConfigError(key + " is not a number");
  return v;
}

long ScenarioConfig::integer(const std::string &key) const {
  long v;
  if (!parse_int(str(key), v)) throw ConfigError(key + " is not an integer");
  return v;
}

std::vector<double> ScenarioConfig::list(const std::string &key) const {
  bool ok;
  auto v = split_list(str(key), ok);
  if (!ok) throw ConfigError(key + " is not a list of numbers");
  return v;
}

std::vector<std::string> scenario_names() { return knobs().front().choices; }

void validate(const ScenarioConfig &cfg) {
  for (const Knob &k : knobs()) {
    const auto it = cfg.values.find(k.name);
    if (it == cfg.values.end()) throw ConfigError(std::string("missing key ") + k.name);
    if (std::string(k.name) == "scenario" && it->second.empty()) throw ConfigError("scenario is required");
    check_value(k, it->second, "");
  }
  auto less = [&](const char *a, const char *b) {
    if (!(cfg.num(a) < cfg.num(b))) {
      std::ostringstream msg;
      msg << a << " < " << b << " required (" << a << " = " << cfg.str(a) << ", " << b << " = " << cfg.str(b) << ")";
      throw ConfigError(msg.str());
    }
  };
  less("tau1", "tau2");
  less("t_lo", "t_hi");
  less("z_min", "z_max");
  less("decay_t_lo", "decay_t_hi");
  less("K_lo", "K_hi");
  if (!(cfg.num("K_t0") <= cfg.num("K_t1"))) throw ConfigError("K_t0 <= K_t1 required");
  if (!(cfg.num("region_s_lo") <= cfg.num("region_s_hi"))) throw ConfigError("region_s_lo <= region_s_hi required");
  const double lam = cfg.num("lambda");
  if (lam < 0.0 && lam != -1.0) throw ConfigError("lambda must be -1 (automatic) or non-negative");
}

ScenarioConfig parse_config(std::istream &in, const std::string &source) {
  ScenarioConfig cfg;
  for (const Knob &k : knobs()) cfg.values[k.name] = k.fallback;
  std::map<std::string, int> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const Knob *k = find_knob(key);
    if (!k) throw ConfigError(where + "unknown key '" + key + "'");
    if (seen.count(key)) throw ConfigError(where + "duplicate key '" + key + "' (first set on line " + std::to_string(seen[key]) + ")");
    if (value.empty() && k->kind != Kind::Text) throw ConfigError(where + "empty value for '" + key + "'");
    check_value(*k, value, where);
    seen[key] = lineno;
    cfg.values[key] = value;
  }
  if (cfg.values["scenario"].empty()) throw ConfigError(source + ": scenario is required");
  validate(cfg);
  return cfg;
}

ScenarioConfig parse_config_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

void set_value(ScenarioConfig &cfg, const std::string &key, const std::string &value) {
  const Knob *k = find_knob(key);
  if (!k) throw ConfigError("unknown key '" + key + "'");
  check_value(*k, value, "");
  cfg.values[key] = value;
  validate(cfg);
}

std::string echo_config(const ScenarioConfig &cfg) {
  std::ostringstream o;
  for (const auto &[k, v] : cfg.values) o << k << " = " << v << "\n";
  return o.str();
}

RunResult run(const ScenarioConfig &cfg, const std::string &out_dir, std::ostream &log) {
  validate(cfg);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + out_dir + "': " + ec.message());
  Context ctx{cfg, out_dir, log, {}};
  log << "scenario " << cfg.scenario() << "\n";
  const std::string &s = cfg.scenario();
  if (s == "specfun-check") run_specfun(ctx);
  else if (s == "harmonics-check") run_harmonics(ctx);
  else if (s == "fundsol-check") run_fundsol(ctx);
  else if (s == "sweep") run_sweep(ctx);
  else if (s == "extend") run_extend(ctx);
  else if (s == "counterexample") run_counterexample(ctx);

  {
    CsvWriter csv(ctx.file("checks.csv"), s, {"check", "value", "threshold", "pass"});
    for (const auto &c : ctx.result.checks) csv.row(c.name, c.value, c.threshold, c.pass);
  }
  for (const auto &c : ctx.result.checks)
    if (!c.pass) ctx.result.exit_code = kExitInvariantFailure;

  std::ofstream man(ctx.dir / "manifest.txt");
  man << "# manifest generated=" << timestamp() << "\n";
  man << echo_config(cfg);
  man << "threads = " << thread_count().load() << "\n";
  for (const auto &f : ctx.result.files) man << "file = " << f << "\n";
  man << "exit_code = " << ctx.result.exit_code << "\n";
  ctx.result.files.push_back("manifest.txt");
  log << (ctx.result.exit_code == kExitPass ? "all checks passed" : "some checks FAILED") << "\n";
  return ctx.result;
}

} // namespace rst::cli
