#include <algorithm>
#include <cmath>

#include "rst/parallel.hpp"
#include "rst/spectral.hpp"

namespace rst::spectral {

namespace {

constexpr double kOriginNudge = 1e-9;

struct LocalFrame {
  double r;
  harmonics::SphericalPoint p;
  Vec3 er, et, ep;
};

LocalFrame frame_at(const Vec3 &x0) {
  Vec3 x = x0;
  if (x.norm() < kOriginNudge) x = Vec3(0.0, 0.0, kOriginNudge);
  LocalFrame f;
  f.r = x.norm();
  f.p = harmonics::SphericalPoint::from_direction(x);
  f.er = f.p.r_hat();
  f.et = f.p.theta_hat();
  f.ep = f.p.phi_hat();
  return f;
}

// Mode sum of one frequency given kernels per degree and coefficients per mode.
template <class CoefAt, class KernelAt>
void mode_sum(int L, const LocalFrame &f, const harmonics::HarmonicValues &hv, CoefAt &&coef, KernelAt &&kernel,
              CVec3 &v, cplx &q) {
  cplx vr = 0.0, vt = 0.0, vp = 0.0;
  q = 0.0;
  double rl = 1.0;
  for (int l = 1; l <= L; ++l) {
    rl *= f.r;
    const KernelValues kv = kernel(l);
    const double mu = l * (l + 1.0);
    for (int m = -l; m <= l; ++m) {
      const RadialCoefficients &c = coef(l, m);
      if (c.B == 0.0 && c.Cr == 0.0 && c.C2 == 0.0) continue;
      const int k = harmonics::flat_index(l, m);
      const cplx lam = -static_cast<double>(l) * c.B * kv.lam;
      const cplx dlam = -static_cast<double>(l) * c.B * kv.dlam;
      const cplx cr = c.Cr * kv.R + lam;
      const cplx dcr = c.Cr * kv.dR + dlam;
      const cplx c1 = (2.0 * cr + f.r * dcr) / mu;
      const cplx c2 = c.C2 * kv.S;
      vr += cr * hv.y[k];
      vt += c1 * hv.dtheta[k] - c2 * hv.dphi_over_sin[k];
      vp += c1 * hv.dphi_over_sin[k] + c2 * hv.dtheta[k];
      q += c.B * rl * hv.y[k];
    }
  }
  v = vr * f.er.cast<cplx>() + vt * f.et.cast<cplx>() + vp * f.ep.cast<cplx>();
}

} // namespace

GlobalSolution::GlobalSolution(CoefficientTable table, const LambdaOptions &opts) : table_(std::move(table)) {
  const ModeBand &band = table_.band;
  band.validate();
  if (table_.entries.size() != band.size() * harmonics::mode_count(band.L))
    throw PreconditionError("GlobalSolution: coefficient table does not cover every (l, m, tau) of the band");
  verify_bessel_convention(band, table_.rho);
  kernels_.reserve(band.size() * (band.L + 1));
  for (std::size_t j = 0; j < band.size(); ++j)
    for (int l = 0; l <= band.L; ++l) kernels_.emplace_back(std::max(l, 0), band.nodes[j], opts);
}

GlobalSolution assemble_global(CoefficientTable table, const LambdaOptions &opts) {
  return GlobalSolution(std::move(table), opts);
}

void GlobalSolution::spectrum(const Vec3 &x, std::span<CVec3> vhat, std::span<cplx> qhat) const {
  const ModeBand &band = table_.band;
  const int L = band.L;
  const LocalFrame f = frame_at(x);
  harmonics::HarmonicValues hv;
  harmonics::harmonic_values(L, f.p, hv);
  for (std::size_t j = 0; j < band.size(); ++j) {
    mode_sum(
        L, f, hv, [&](int l, int m) -> const RadialCoefficients & { return table_.at(j, l, m); },
        [&](int l) { return kernels_[j * (L + 1) + l].at(f.r); }, vhat[j], qhat[j]);
  }
}

void GlobalSolution::evaluate_times(const Vec3 &x, std::span<const double> ts, std::span<Vec3> v,
                                    std::span<double> q) const {
  const ModeBand &band = table_.band;
  std::vector<CVec3> vh(band.size());
  std::vector<cplx> qh(band.size());
  spectrum(x, vh, qh);
  for (std::size_t n = 0; n < ts.size(); ++n) {
    CVec3 vs = CVec3::Zero();
    cplx qs = 0.0;
    for (std::size_t j = 0; j < band.size(); ++j) {
      const cplx e = band.weights[j] * std::polar(1.0, band.nodes[j] * ts[n]);
      vs += e * vh[j];
      qs += e * qh[j];
    }
    v[n] = vs.real() / kPi;
    q[n] = qs.real() / kPi;
  }
}

Vec3 GlobalSolution::velocity(const Vec3 &x, double t) const {
  Vec3 v;
  double q;
  evaluate_times(x, std::span<const double>(&t, 1), std::span<Vec3>(&v, 1), std::span<double>(&q, 1));
  return v;
}

double GlobalSolution::pressure(const Vec3 &x, double t) const {
  Vec3 v;
  double q;
  evaluate_times(x, std::span<const double>(&t, 1), std::span<Vec3>(&v, 1), std::span<double>(&q, 1));
  return q;
}

CVec3 GlobalSolution::velocity_complex(const Vec3 &x, double t) const {
  // Both halves of the band summed explicitly; the negative half uses kernels at -tau
  // and the coefficients (-1)^m conj(C_{l,-m}) implied by conjugate symmetry.
  const ModeBand &band = table_.band;
  const int L = band.L;
  const LocalFrame f = frame_at(x);
  harmonics::HarmonicValues hv;
  harmonics::harmonic_values(L, f.p, hv);
  CVec3 total = CVec3::Zero();
  std::vector<RadialCoefficients> neg(harmonics::mode_count(L));
  for (std::size_t j = 0; j < band.size(); ++j) {
    CVec3 vp;
    cplx qp;
    mode_sum(
        L, f, hv, [&](int l, int m) -> const RadialCoefficients & { return table_.at(j, l, m); },
        [&](int l) { return kernels_[j * (L + 1) + l].at(f.r); }, vp, qp);
    for (int l = 0; l <= L; ++l)
      for (int m = -l; m <= l; ++m) {
        const RadialCoefficients &src = table_.at(j, l, -m);
        RadialCoefficients &d = neg[harmonics::flat_index(l, m)];
        const double sign = (std::abs(m) % 2 == 0) ? 1.0 : -1.0;
        d = src;
        d.m = m;
        d.tau = -src.tau;
        d.B = sign * std::conj(src.B);
        d.Cr = sign * std::conj(src.Cr);
        d.C2 = sign * std::conj(src.C2);
      }
    std::vector<RadialKernel> nk;
    for (int l = 0; l <= L; ++l) nk.emplace_back(l, -band.nodes[j]);
    CVec3 vn;
    cplx qn;
    mode_sum(
        L, f, hv, [&](int l, int m) -> const RadialCoefficients & { return neg[harmonics::flat_index(l, m)]; },
        [&](int l) { return nk[l].at(f.r); }, vn, qn);
    total += band.weights[j] * (vp * std::polar(1.0, band.nodes[j] * t) + vn * std::polar(1.0, -band.nodes[j] * t));
  }
  return total / (2.0 * kPi);
}

std::vector<Vec3> ball_grid(double rho) {
  std::vector<Vec3> pts{Vec3::Zero()};
  std::vector<Vec3> dirs;
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b)
      for (int c = -1; c <= 1; ++c)
        if (a || b || c) dirs.push_back(Vec3(a, b, c).normalized());
  for (double s : {1.0 / 3.0, 2.0 / 3.0, 1.0})
    for (const Vec3 &d : dirs) pts.push_back(s * rho * d);
  return pts;
}

ReconstructionRow reconstruction_report(std::span<const fundsol::PoleSource> poles, const GlobalSolution &sol,
                                        const ReconstructionGrid &grid) {
  const ModeBand &band = sol.band();
  ReconstructionRow row;
  row.L = band.L;
  row.tau1 = band.tau1;
  row.tau2 = band.tau2;
  row.nodes = static_cast<int>(band.size());
  const auto pts = ball_grid(grid.rho);
  const auto ts = quad::linspace(grid.t_lo, grid.t_hi, grid.n_t);
  std::vector<double> sup(pts.size()), ss(pts.size()), vs(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    std::vector<Vec3> v2(ts.size());
    std::vector<double> q2(ts.size());
    sol.evaluate_times(pts[i], ts, v2, q2);
    for (std::size_t n = 0; n < ts.size(); ++n) {
      const Vec3 v1 = fundsol::stokeslet_field(poles, {pts[i], ts[n]});
      const double e = (v2[n] - v1).norm();
      sup[i] = std::max(sup[i], e);
      ss[i] += e * e;
      vs[i] = std::max(vs[i], v1.norm());
    }
  });
  double total = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    row.sup_err = std::max(row.sup_err, sup[i]);
    row.v1_sup = std::max(row.v1_sup, vs[i]);
    total += ss[i];
  }
  row.l2_err = std::sqrt(total / (pts.size() * ts.size()));
  return row;
}

PdeCheck pde_residual_check(const GlobalSolution &sol, std::span<const Vec3> points, std::span<const double> times,
                            double h, double ht) {
  const Vec3 axes[3] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  std::vector<PdeCheck> per(points.size());
  parallel_for(points.size(), [&](std::size_t ip) {
    const Vec3 x = points[ip];
    const std::size_t nt = times.size();
    // Time stencil at x: t-2ht .. t+2ht for every t.
    std::vector<double> tst;
    for (double t : times)
      for (int s = -2; s <= 2; ++s) tst.push_back(t + s * ht);
    std::vector<Vec3> vc(tst.size());
    std::vector<double> qc(tst.size());
    sol.evaluate_times(x, tst, vc, qc);
    std::vector<Vec3> vpl[3][2], vmi[3][2];
    std::vector<double> qpl[3][2], qmi[3][2];
    for (int a = 0; a < 3; ++a)
      for (int s = 0; s < 2; ++s) {
        vpl[a][s].resize(nt), vmi[a][s].resize(nt), qpl[a][s].resize(nt), qmi[a][s].resize(nt);
        sol.evaluate_times(x + (s + 1) * h * axes[a], times, vpl[a][s], qpl[a][s]);
        sol.evaluate_times(x - (s + 1) * h * axes[a], times, vmi[a][s], qmi[a][s]);
      }
    PdeCheck out;
    for (std::size_t n = 0; n < nt; ++n) {
      const Vec3 v0 = vc[5 * n + 2];
      const Vec3 dt = (vc[5 * n] - 8.0 * vc[5 * n + 1] + 8.0 * vc[5 * n + 3] - vc[5 * n + 4]) / (12.0 * ht);
      Vec3 lap = -90.0 * v0;
      Eigen::Matrix3d grad;  // grad(i, a) = d v_i / d x_a
      Vec3 gq;
      for (int a = 0; a < 3; ++a) {
        lap += 16.0 * (vpl[a][0][n] + vmi[a][0][n]) - (vpl[a][1][n] + vmi[a][1][n]);
        grad.col(a) = (vmi[a][1][n] - 8.0 * vmi[a][0][n] + 8.0 * vpl[a][0][n] - vpl[a][1][n]) / (12.0 * h);
        gq(a) = (qmi[a][1][n] - 8.0 * qmi[a][0][n] + 8.0 * qpl[a][0][n] - qpl[a][1][n]) / (12.0 * h);
      }
      lap /= 12.0 * h * h;
      const double div = grad.trace();
      const double gscale = grad.norm();
      if (gscale > 0.0) out.max_div_relative = std::max(out.max_div_relative, std::abs(div) / gscale);
      const Vec3 res = dt - lap + gq;
      const double scale = dt.norm() + lap.norm() + gq.norm();
      if (scale > 0.0) out.max_stokes_relative = std::max(out.max_stokes_relative, res.norm() / scale);
    }
    per[ip] = out;
  });
  PdeCheck total;
  for (const PdeCheck &c : per) {
    total.max_div_relative = std::max(total.max_div_relative, c.max_div_relative);
    total.max_stokes_relative = std::max(total.max_stokes_relative, c.max_stokes_relative);
  }
  return total;
}

GrowthCheck growth_check(const GlobalSolution &sol, double r_max, std::span<const double> times) {
  const ModeBand &band = sol.band();
  const auto radii = quad::linspace(r_max / 20.0, r_max, 20);
  std::vector<Vec3> dirs;
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b)
      for (int c = -1; c <= 1; ++c)
        if (a || b || c) dirs.push_back(Vec3(a, b, c).normalized());
  std::vector<double> vmax(radii.size()), qmax(radii.size());
  parallel_for(radii.size(), [&](std::size_t i) {
    std::vector<Vec3> v(times.size());
    std::vector<double> q(times.size());
    for (const Vec3 &d : dirs) {
      sol.evaluate_times(radii[i] * d, times, v, q);
      for (std::size_t n = 0; n < times.size(); ++n) {
        vmax[i] = std::max(vmax[i], v[n].norm());
        qmax[i] = std::max(qmax[i], std::abs(q[n]));
      }
    }
  });
  GrowthCheck g;
  const double s2 = std::sqrt(band.tau2);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double rv = vmax[i] * std::exp(-s2 * radii[i]);
    const double rq = qmax[i] / std::pow(1.0 + radii[i], band.L);
    if (radii[i] <= 0.5 * r_max) {
      g.C_velocity = std::max(g.C_velocity, rv);
      g.C_pressure = std::max(g.C_pressure, rq);
    }
  }
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (radii[i] <= 0.5 * r_max) continue;
    const double rv = vmax[i] * std::exp(-s2 * radii[i]);
    const double rq = qmax[i] / std::pow(1.0 + radii[i], band.L);
    g.velocity_outer_ratio = std::max(g.velocity_outer_ratio, g.C_velocity > 0.0 ? rv / g.C_velocity : rv);
    g.pressure_outer_ratio = std::max(g.pressure_outer_ratio, g.C_pressure > 0.0 ? rq / g.C_pressure : rq);
  }
  return g;
}

} // namespace rst::spectral
