#include "rst/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include <Eigen/SVD>

#include "rst/parallel.hpp"
#include "rst/quadrature.hpp"

namespace rst::counterexample {

namespace {

double bump(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }
double bump_prime(double u) { return u > 0.0 ? std::exp(-1.0 / u) / (u * u) : 0.0; }

// Fourth-order first derivative of a scalar function.
template <class F> double d1(F &&f, double x, double h) {
  return (f(x - 2 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2 * h)) / (12.0 * h);
}

const Vec3 kAxes[3] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};

} // namespace

CProfile::CProfile(double eps0) : eps0_(eps0) {
  if (!(eps0 > 0.0 && eps0 < 2.0)) throw PreconditionError("c profile: need 0 < eps0 < 2");
}

double CProfile::value(double t) const {
  if (t <= 2.0) return 2.0;
  if (t >= 3.0) return eps0_;
  const double u = t - 2.0;
  const double a = bump(u), b = bump(1.0 - u);
  // Each half uses the form whose small term is the tiny bump, so rounding stays monotone.
  if (u < 0.5) return 2.0 - (2.0 - eps0_) * a / (a + b);
  return eps0_ + (2.0 - eps0_) * b / (a + b);
}

double CProfile::derivative(double t) const {
  if (t <= 2.0 || t >= 3.0) return 0.0;
  const double u = t - 2.0;
  const double a = bump(u), b = bump(1.0 - u);
  const double s = a + b;
  const double dS = (bump_prime(u) * b + a * bump_prime(1.0 - u)) / (s * s);
  return -(2.0 - eps0_) * dS;
}

CProfile make_c_profile(double eps0) { return CProfile(eps0); }

HarmonicPolynomial::HarmonicPolynomial(std::vector<Term> terms, std::string name) : name_(std::move(name)) {
  std::map<std::array<int, 3>, double> acc;
  for (const Term &t : terms) {
    for (int p : t.power)
      if (p < 0) throw PreconditionError("HarmonicPolynomial: negative exponent");
    acc[t.power] += t.coef;
  }
  for (const auto &[pw, c] : acc)
    if (c != 0.0) terms_.push_back({c, pw});
}

HarmonicPolynomial HarmonicPolynomial::coordinate(int axis) {
  if (axis < 0 || axis > 2) throw PreconditionError("HarmonicPolynomial: axis out of range");
  std::array<int, 3> p{0, 0, 0};
  p[axis] = 1;
  return HarmonicPolynomial({{1.0, p}}, "x" + std::to_string(axis + 1));
}

HarmonicPolynomial HarmonicPolynomial::product12() { return HarmonicPolynomial({{1.0, {1, 1, 0}}}, "x1*x2"); }

HarmonicPolynomial HarmonicPolynomial::radius_squared() {
  return HarmonicPolynomial({{1.0, {2, 0, 0}}, {1.0, {0, 2, 0}}, {1.0, {0, 0, 2}}}, "|x|^2");
}

std::vector<HarmonicPolynomial> HarmonicPolynomial::catalog() {
  return {coordinate(0),
          coordinate(1),
          coordinate(2),
          product12(),
          HarmonicPolynomial({{1.0, {2, 0, 0}}, {-1.0, {0, 2, 0}}}, "x1^2-x2^2"),
          HarmonicPolynomial({{1.0, {1, 1, 1}}}, "x1*x2*x3"),
          HarmonicPolynomial({{1.0, {3, 0, 0}}, {-3.0, {1, 2, 0}}}, "x1^3-3x1x2^2"),
          HarmonicPolynomial({{2.0, {0, 0, 2}}, {-1.0, {2, 0, 0}}, {-1.0, {0, 2, 0}}}, "2x3^2-x1^2-x2^2")};
}

double HarmonicPolynomial::value(const Vec3 &x) const {
  double s = 0.0;
  for (const Term &t : terms_) s += t.coef * std::pow(x(0), t.power[0]) * std::pow(x(1), t.power[1]) * std::pow(x(2), t.power[2]);
  return s;
}

HarmonicPolynomial HarmonicPolynomial::derivative(int axis) const {
  std::vector<Term> out;
  for (const Term &t : terms_) {
    if (t.power[axis] == 0) continue;
    Term d = t;
    d.coef *= t.power[axis];
    d.power[axis] -= 1;
    out.push_back(d);
  }
  return HarmonicPolynomial(std::move(out));
}

Vec3 HarmonicPolynomial::gradient(const Vec3 &x) const {
  return Vec3(derivative(0).value(x), derivative(1).value(x), derivative(2).value(x));
}

HarmonicPolynomial HarmonicPolynomial::laplacian() const {
  std::vector<Term> out;
  for (int a = 0; a < 3; ++a) {
    const HarmonicPolynomial d2 = derivative(a).derivative(a);
    out.insert(out.end(), d2.terms_.begin(), d2.terms_.end());
  }
  return HarmonicPolynomial(std::move(out));
}

ParasiticSolution parasitic(const CProfile &c, const HarmonicPolynomial &h) {
  const HarmonicPolynomial lap = h.laplacian();
  if (!lap.is_zero()) {
    std::ostringstream msg;
    msg << "parasitic: h = " << (h.name().empty() ? "<polynomial>" : h.name()) << " is not harmonic (Laplacian";
    for (const auto &t : lap.terms())
      msg << " " << t.coef << "*x^(" << t.power[0] << "," << t.power[1] << "," << t.power[2] << ")";
    msg << ")";
    throw PreconditionError(msg.str());
  }
  return {c, h};
}

double stokes_residual_fd(const ParasiticSolution &s, const Vec3 &x, double t, double hx, double ht) {
  Vec3 dt;
  for (int i = 0; i < 3; ++i) dt(i) = d1([&](double tt) { return s.velocity(x, tt)(i); }, t, ht);
  Vec3 lap = -90.0 * s.velocity(x, t);
  Vec3 gq;
  for (int a = 0; a < 3; ++a) {
    lap += 16.0 * (s.velocity(x + hx * kAxes[a], t) + s.velocity(x - hx * kAxes[a], t)) -
           (s.velocity(x + 2 * hx * kAxes[a], t) + s.velocity(x - 2 * hx * kAxes[a], t));
    gq(a) = d1([&](double xa) {
      Vec3 y = x;
      y(a) = xa;
      return s.pressure(y, t);
    }, x(a), hx);
  }
  lap /= 12.0 * hx * hx;
  return (dt - lap + gq).norm();
}

void HarnackCylinder::validate() const {
  if (n_inner < 2) throw PreconditionError("HarnackCylinder: inner grid needs at least 2 points per axis");
  const bool inside = (inner_lo.array() >= outer_lo.array()).all() && (inner_hi.array() <= outer_hi.array()).all() &&
                      (inner_lo.array() <= inner_hi.array()).all();
  if (!inside || t_early < t_lo || t_late > t_hi || !(t_early < t_late))
    throw PreconditionError("HarnackCylinder: inner cube at the two times must lie in K");
}

std::vector<Vec3> HarnackCylinder::inner_grid() const {
  validate();
  const auto xs = quad::linspace(inner_lo.x(), inner_hi.x(), n_inner);
  const auto ys = quad::linspace(inner_lo.y(), inner_hi.y(), n_inner);
  const auto zs = quad::linspace(inner_lo.z(), inner_hi.z(), n_inner);
  std::vector<Vec3> pts;
  for (double z : zs)
    for (double y : ys)
      for (double x : xs) pts.emplace_back(x, y, z);
  return pts;
}

sweep::CompactBox HarnackCylinder::outer_box(int n_space, int n_time) const {
  sweep::CompactBox K;
  K.lo = outer_lo, K.hi = outer_hi, K.t0 = t_lo, K.t1 = t_hi;
  K.nx = K.ny = K.nz = n_space;
  K.nt = n_time;
  K.validate();
  return K;
}

double caloric_residual(const ScalarField &w, const std::vector<fundsol::SpaceTimePoint> &pts, double h) {
  double worst = 0.0;
  for (const auto &p : pts) {
    const double dt = d1([&](double t) { return w(p.x, t); }, p.t, h);
    double lap = -90.0 * w(p.x, p.t);
    for (int a = 0; a < 3; ++a)
      lap += 16.0 * (w(p.x + h * kAxes[a], p.t) + w(p.x - h * kAxes[a], p.t)) -
             (w(p.x + 2 * h * kAxes[a], p.t) + w(p.x - 2 * h * kAxes[a], p.t));
    lap /= 12.0 * h * h;
    const double scale = std::abs(dt) + std::abs(lap);
    const double r = std::abs(dt - lap);
    worst = std::max(worst, scale > 0.0 ? r / scale : r);
  }
  return worst;
}

double caloric_residual(const ScalarField &w, const std::vector<sweep::CompactBox> &boxes, double h) {
  double worst = 0.0;
  for (const auto &K : boxes) worst = std::max(worst, caloric_residual(w, sweep::grid_points(K), h));
  return worst;
}

HarnackRatio harnack_ratio(const ScalarField &w, const HarnackCylinder &cyl) {
  const auto grid = cyl.inner_grid();
  HarnackRatio out;
  out.sup_early = -std::numeric_limits<double>::infinity();
  out.inf_late = std::numeric_limits<double>::infinity();
  for (const Vec3 &x : grid) {
    out.sup_early = std::max(out.sup_early, w(x, cyl.t_early));
    out.inf_late = std::min(out.inf_late, w(x, cyl.t_late));
  }
  out.ratio = out.inf_late > 0.0 ? out.sup_early / out.inf_late : std::numeric_limits<double>::infinity();
  out.caloric_residual = caloric_residual(w, {cyl.outer_box(3, 3)});
  return out;
}

double HeatSource::value(const Vec3 &x, double t) const { return fundsol::heat_kernel(x - x0, t - t0); }

Vec3 HeatSource::gradient(const Vec3 &x, double t) const {
  const double s = t - t0;
  if (s <= 0.0) return Vec3::Zero();
  return -(x - x0) / (2.0 * s) * value(x, t);
}

std::vector<HeatSource> harnack_source_catalog(int count) {
  if (count < 1) throw PreconditionError("source catalog: count must be positive");
  const Vec3 dirs[4] = {Vec3::UnitZ(), Vec3(1, 1, 1).normalized(), Vec3::UnitX(), Vec3(1, -1, 0).normalized()};
  const double dists[4] = {0.0, 1.5, 3.0, 4.5};
  const double t0s[4] = {0.0, 0.5, 0.8, 0.95};
  std::vector<HeatSource> out;
  // Cycle through the base 64 and shift later blocks outward so larger catalogs add new sources.
  for (int i = 0; static_cast<int>(out.size()) < count; ++i) {
    const int block = i / 64, k = i % 64;
    const double t0 = t0s[k % 4] - 0.25 * block;
    const Vec3 d = dirs[(k / 4) % 4];
    const double r = dists[k / 16] + 0.5 * block;
    out.push_back({r * d, t0});
  }
  return out;
}

C0Estimate estimate_C0(const std::vector<HeatSource> &catalog, const HarnackCylinder &cyl) {
  C0Estimate est;
  est.ratios.resize(catalog.size());
  parallel_for(catalog.size(), [&](std::size_t i) {
    const HeatSource &s = catalog[i];
    est.ratios[i] = harnack_ratio([&](const Vec3 &x, double t) { return s.value(x, t); }, cyl).ratio;
  });
  double run = 0.0;
  for (double r : est.ratios) {
    run = std::max(run, r);
    est.running_max.push_back(run);
  }
  est.C0_hat = run;
  return est;
}

Vec3 CurlPair::value(const Vec3 &x, double t) const { return source.gradient(x, t).cross(kAxes[axis]); }

std::vector<CurlPair> curl_pair_dictionary(int count, std::uint64_t seed) {
  const auto pts = sweep::place_poles({Vec3::Zero(), 6.0, -2.0, -0.05}, count, seed);
  std::vector<CurlPair> out;
  out.reserve(pts.size());
  for (std::size_t j = 0; j < pts.size(); ++j) out.push_back({{pts[j].location, pts[j].time}, static_cast<int>(j % 3)});
  return out;
}

namespace {

std::vector<fundsol::SpaceTimePoint> caloric_probe_points(const HarnackCylinder &cyl) {
  std::vector<fundsol::SpaceTimePoint> pts;
  for (double t : {1.5, 2.25, 2.5, 2.75})
    for (const Vec3 &x : {Vec3(0, 0, 0), Vec3(1.2, -0.7, 0.4), Vec3(-1.5, 1.1, -0.9)})
      if (t >= cyl.t_lo && t <= cyl.t_hi) pts.push_back({x, t});
  return pts;
}

} // namespace

ExperimentRow fit_caloric_dictionary(const ParasiticSolution &v, const std::vector<DictionaryEntry> &dictionary,
                                     const HarnackCylinder &cyl, double C0_hat, double epsilon,
                                     const ExperimentOptions &opts, std::vector<std::string> *notices) {
  ExperimentRow row;
  row.J = static_cast<int>(dictionary.size());
  row.epsilon = epsilon;
  row.C0_hat = C0_hat;

  const auto probes = caloric_probe_points(cyl);
  std::vector<const DictionaryEntry *> used;
  for (const DictionaryEntry &e : dictionary) {
    double worst = 0.0;
    for (int c = 0; c < 3; ++c)
      worst = std::max(worst, caloric_residual([&](const Vec3 &x, double t) { return e.field(x, t)(c); }, probes));
    if (worst > opts.caloric_tolerance) {
      ++row.excluded;
      if (notices) {
        std::ostringstream msg;
        msg << "excluded dictionary field " << e.name << ": caloric residual " << worst;
        notices->push_back(msg.str());
      }
      continue;
    }
    used.push_back(&e);
  }
  row.used = static_cast<int>(used.size());

  const sweep::CompactBox K = cyl.outer_box(opts.n_space, opts.n_time);
  const auto pts = sweep::grid_points(K);
  const auto n = static_cast<Eigen::Index>(pts.size());
  const auto J = static_cast<Eigen::Index>(used.size());
  Eigen::MatrixXd A(3 * n, J);
  Eigen::VectorXd b(3 * n);
  parallel_for(pts.size(), [&](std::size_t i) {
    const auto ii = static_cast<Eigen::Index>(i);
    b.segment<3>(3 * ii) = v.velocity(pts[i].x, pts[i].t);
    for (Eigen::Index j = 0; j < J; ++j) A.block<3, 1>(3 * ii, j) = used[j]->field(pts[i].x, pts[i].t);
  });

  const sweep::LinearFit lf = sweep::solve_regularized(A, b, {});
  const sweep::VectorField fitted = [&](const Vec3 &x, double t) {
    Vec3 s = Vec3::Zero();
    for (Eigen::Index j = 0; j < J; ++j) s += lf.x(j) * used[j]->field(x, t);
    return s;
  };
  row.sup_error = sweep::sup_error([&](const Vec3 &x, double t) { return v.velocity(x, t); }, fitted, K.refined());

  // Lawson reweighting. For probability weights w, sqrt(min_x sum_i w_i |r_i(x)|^2) never exceeds
  // min_x max_i |r_i(x)|, so every iterate gives a lower bound on the best sup error over the grid.
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < std::max(1, opts.lawson_iterations); ++it) {
    Eigen::MatrixXd Aw = A;
    Eigen::VectorXd bw = b;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = std::sqrt(w(i));
      Aw.middleRows(3 * i, 3) *= s;
      bw.segment<3>(3 * i) *= s;
    }
    Eigen::VectorXd resid = bw;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(J);
    if (J > 0) {
      Eigen::BDCSVD<Eigen::MatrixXd> svd(Aw, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Eigen::VectorXd &sv = svd.singularValues();
      const Eigen::VectorXd utb = svd.matrixU().transpose() * bw;
      double proj = 0.0;
      Eigen::VectorXd coef = Eigen::VectorXd::Zero(sv.size());
      for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (!(sv(k) > 1e-15 * sv(0))) break;
        proj += utb(k) * utb(k);
        coef(k) = utb(k) / sv(k);
      }
      row.lower_bound = std::max(row.lower_bound, std::sqrt(std::max(0.0, bw.squaredNorm() - proj)));
      x = svd.matrixV() * coef;
      resid = b - A * x;
    } else {
      row.lower_bound = std::max(row.lower_bound, bw.norm());
    }
    double total = 0.0;
    Eigen::VectorXd next(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      next(i) = w(i) * resid.segment<3>(3 * i).norm();
      total += next(i);
    }
    if (!(total > 0.0)) break;
    w = next / total;
  }
  row.pass = row.lower_bound > epsilon;
  return row;
}

ContradictionCheck contradiction_chain(const sweep::VectorField &u, const ParasiticSolution &v,
                                       const HarnackCylinder &cyl, double C0_hat, double epsilon, int n_space,
                                       int n_time) {
  ContradictionCheck out;
  out.distance = sweep::sup_error(u, [&](const Vec3 &x, double t) { return v.velocity(x, t); },
                                  cyl.outer_box(n_space, n_time));
  out.within_epsilon = out.distance <= epsilon;
  const HarnackRatio hr = harnack_ratio([&](const Vec3 &x, double t) { return u(x, t)(0); }, cyl);
  out.sup_early = hr.sup_early;
  out.inf_late = hr.inf_late;
  out.sup_above_three_halves = out.sup_early > 1.5;
  out.inf_below_inverse_C0 = C0_hat * out.inf_late < 1.0;
  out.contradiction = out.within_epsilon && out.sup_above_three_halves && out.inf_below_inverse_C0;
  return out;
}

bool TheoremBReport::all_pass() const {
  if (rows.empty()) return false;
  for (const auto &r : rows)
    if (!r.pass) return false;
  for (const auto &s : synthetic)
    if (!s.contradiction) return false;
  return witness_excluded;
}

TheoremBReport theoremB_experiment(const ExperimentOptions &opts) {
  if (opts.sizes.empty()) throw PreconditionError("theoremB_experiment: no dictionary sizes");
  HarnackCylinder cyl;
  cyl.validate();
  TheoremBReport rep;
  const C0Estimate c0 = estimate_C0(harnack_source_catalog(opts.catalog_size), cyl);
  rep.C0_hat = c0.C0_hat;
  rep.eps0 = 1.0 / (2.0 * rep.C0_hat);
  rep.epsilon = rep.eps0 / 2.0;
  const ParasiticSolution v = parasitic(make_c_profile(rep.eps0), HarmonicPolynomial::coordinate(0));
  const sweep::VectorField vf = [&](const Vec3 &x, double t) { return v.velocity(x, t); };

  rep.empty_dictionary_error =
      sweep::sup_error(vf, [](const Vec3 &, double) { return Vec3::Zero(); }, cyl.outer_box(opts.n_space, opts.n_time).refined());

  const ExperimentRow witness = fit_caloric_dictionary(v, {{"parasitic witness", vf}}, cyl, rep.C0_hat, rep.epsilon,
                                                       opts, &rep.notices);
  rep.witness_excluded = witness.excluded == 1;

  const int jmax = *std::max_element(opts.sizes.begin(), opts.sizes.end());
  const auto pairs = curl_pair_dictionary(jmax, opts.seed);
  for (int J : opts.sizes) {
    std::vector<DictionaryEntry> dict;
    for (int j = 0; j < J; ++j) {
      const CurlPair cp = pairs[j];
      std::ostringstream name;
      name << "curl-pair " << j;
      dict.push_back({name.str(), [cp](const Vec3 &x, double t) { return cp.value(x, t); }});
    }
    rep.rows.push_back(fit_caloric_dictionary(v, dict, cyl, rep.C0_hat, rep.epsilon, opts, &rep.notices));
  }

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int k = 0; k < opts.synthetic_candidates; ++k) {
    const double amp = rep.epsilon * 0.999 * uni(rng);
    const Vec3 a(uni(rng) * 3.0, uni(rng) * 3.0, uni(rng) * 3.0);
    const double om = uni(rng) * 4.0, ph = uni(rng) * 2.0 * kPi;
    const sweep::VectorField u = [=, &v](const Vec3 &x, double t) {
      const double s = a.dot(x) + om * t + ph;
      return Vec3(v.velocity(x, t) + amp / std::sqrt(3.0) * Vec3(std::sin(s), std::cos(s), std::sin(2.0 * s)));
    };
    rep.synthetic.push_back(contradiction_chain(u, v, cyl, rep.C0_hat, rep.epsilon));
  }
  return rep;
}

} // namespace rst::counterexample
