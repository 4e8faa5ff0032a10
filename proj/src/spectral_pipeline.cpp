#include <cmath>
#include <sstream>

#include "rst/parallel.hpp"
#include "rst/specfun.hpp"
#include "rst/spectral.hpp"

namespace rst::spectral {

namespace {

const Vec3 kAxes[3] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};

// Fourth-order central Laplacian from the 13-point star; f0 is the centre value.
template <class T> T laplacian_star(const T &f0, const T (&plus)[3][2], const T (&minus)[3][2], double h) {
  T acc = -90.0 * f0;
  for (int a = 0; a < 3; ++a) acc += 16.0 * (plus[a][0] + minus[a][0]) - (plus[a][1] + minus[a][1]);
  return acc / (12.0 * h * h);
}

} // namespace

cplx pressure_mode(const std::function<CVec3(const Vec3 &)> &vhat, ModeIndex mode, double tau, double rho,
                   const harmonics::SphereQuadrature &quad, const PressureModeOptions &opts) {
  if (mode.l < 1) throw PreconditionError("pressure_mode: requires l >= 1");
  const quad::Rule radial = quad::gauss_legendre(opts.radial_nodes, 0.0, rho);
  const double h = opts.fd_step_fraction * rho;
  cplx acc = 0.0;
  for (std::size_t i = 0; i < radial.size(); ++i) {
    const double r = radial.nodes[i];
    cplx shell = 0.0;
    for (std::size_t n = 0; n < quad.size(); ++n) {
      const Vec3 x = r * quad.direction(n);
      const CVec3 f0 = vhat(x);
      CVec3 plus[3][2], minus[3][2];
      for (int a = 0; a < 3; ++a)
        for (int s = 0; s < 2; ++s) {
          plus[a][s] = vhat(x + (s + 1) * h * kAxes[a]);
          minus[a][s] = vhat(x - (s + 1) * h * kAxes[a]);
        }
      const CVec3 lap = laplacian_star(f0, plus, minus, h);
      const CVec3 w = cplx(0.0, -tau) * f0 + lap;
      const Vec3 &d = quad.direction(n);
      const cplx g = w(0) * d(0) + w(1) * d(1) + w(2) * d(2);
      shell += quad.weight(n) * g * std::conj(harmonics::ylm(mode, quad.point(n)));
    }
    acc += radial.weights[i] * shell;
  }
  return acc / std::pow(rho, mode.l);
}

void verify_bessel_convention(const ModeBand &band, double rho) {
  for (int l = 0; l <= band.L; ++l) {
    for (double tau : band.nodes) {
      const cplx k = std::sqrt(cplx(0.0, tau));
      for (double r : {0.5 * rho, rho}) {
        const specfun::ComplexArg z(k * r);
        const auto I = specfun::bessel_i_scaled(specfun::HalfIntOrder(l), z);
        const auto K = specfun::bessel_k_scaled(specfun::HalfIntOrder(l), z);
        const cplx w = r * k * (K.value * I.derivative - K.derivative * I.value);
        if (std::abs(w - 1.0) > 1e-8) {
          std::ostringstream msg;
          msg << "Bessel convention mismatch: Wronskian of r^{1/2}K, r^{1/2}I is " << w << " at l=" << l
              << ", tau=" << tau << ", r=" << r << " (expected 1)";
          throw std::logic_error(msg.str());
        }
      }
    }
  }
}

RadialCoefficients &CoefficientTable::at(std::size_t j, int l, int m) {
  return entries[j * harmonics::mode_count(band.L) + harmonics::flat_index(l, m)];
}
const RadialCoefficients &CoefficientTable::at(std::size_t j, int l, int m) const {
  return entries[j * harmonics::mode_count(band.L) + harmonics::flat_index(l, m)];
}

CoefficientTable build_coefficient_table(const SpectralSampler &sampler, const ModeBand &band,
                                         const ExtensionOptions &opts) {
  band.validate();
  if (!(opts.rho > 0.0)) throw PreconditionError("build_coefficient_table: rho must be positive");
  verify_bessel_convention(band, opts.rho);
  const int L = band.L;
  const std::size_t nt = band.size();
  const std::size_t nm = harmonics::mode_count(L);
  const harmonics::SphereQuadrature quad(opts.n_theta, opts.n_phi);
  const harmonics::HarmonicTable table(quad, L);
  const std::size_t nq = quad.size();

  CoefficientTable out;
  out.band = band;
  out.rho = opts.rho;
  out.entries.resize(nt * nm);
  for (std::size_t j = 0; j < nt; ++j)
    for (int l = 0; l <= L; ++l)
      for (int m = -l; m <= l; ++m) {
        RadialCoefficients &e = out.at(j, l, m);
        e.l = l, e.m = m, e.tau = band.nodes[j], e.rho = opts.rho;
      }

  // Vector coefficients of v1-hat on the Gauss shells of (0, rho).
  const quad::Rule radial = quad::gauss_legendre(opts.radial_nodes, 0.0, opts.rho);
  const std::size_t nr = radial.size();
  std::vector<cplx> cr(nt * nr * nm), c2(nt * nr * nm);
  std::vector<CVec3> vals(nq * nt);
  for (std::size_t i = 0; i < nr; ++i) {
    const double r = radial.nodes[i];
    parallel_for(nq, [&](std::size_t n) { sampler(r * quad.direction(n), std::span<CVec3>(&vals[n * nt], nt)); });
    std::vector<CVec3> shell(nq);
    for (std::size_t j = 0; j < nt; ++j) {
      double vmax = 0.0;
      for (std::size_t n = 0; n < nq; ++n) {
        shell[n] = vals[n * nt + j];
        vmax = std::max(vmax, shell[n].norm());
      }
      const auto vc = table.project_vector(shell);
      for (std::size_t k = 0; k < nm; ++k) {
        cr[(j * nr + i) * nm + k] = vc[k].radial;
        c2[(j * nr + i) * nm + k] = vc[k].second;
      }
      if (vmax > 0.0)
        out.cr00_relative = std::max(out.cr00_relative, std::abs(vc[0].radial) / (std::sqrt(4.0 * kPi) * vmax));
    }
  }

  // Pressure modes from the radial component of -i tau v + Delta v.
  const quad::Rule pr = quad::gauss_legendre(opts.pressure.radial_nodes, 0.0, opts.rho);
  const double h = opts.pressure.fd_step_fraction * opts.rho;
  std::vector<cplx> Bacc(nt * nm, 0.0);
  std::vector<cplx> g(nq * nt);
  for (std::size_t i = 0; i < pr.size(); ++i) {
    const double r = pr.nodes[i];
    parallel_for(nq, [&](std::size_t n) {
      const Vec3 x = r * quad.direction(n);
      std::vector<CVec3> f0(nt), pl[3][2], mi[3][2];
      sampler(x, f0);
      for (int a = 0; a < 3; ++a)
        for (int s = 0; s < 2; ++s) {
          pl[a][s].resize(nt);
          mi[a][s].resize(nt);
          sampler(x + (s + 1) * h * kAxes[a], pl[a][s]);
          sampler(x - (s + 1) * h * kAxes[a], mi[a][s]);
        }
      const Vec3 &d = quad.direction(n);
      for (std::size_t j = 0; j < nt; ++j) {
        CVec3 p[3][2], q[3][2];
        for (int a = 0; a < 3; ++a)
          for (int s = 0; s < 2; ++s) p[a][s] = pl[a][s][j], q[a][s] = mi[a][s][j];
        const CVec3 lap = laplacian_star(f0[j], p, q, h);
        const CVec3 w = cplx(0.0, -band.nodes[j]) * f0[j] + lap;
        g[n * nt + j] = w(0) * d(0) + w(1) * d(1) + w(2) * d(2);
      }
    });
    std::vector<cplx> shell(nq);
    for (std::size_t j = 0; j < nt; ++j) {
      for (std::size_t n = 0; n < nq; ++n) shell[n] = g[n * nt + j];
      const auto pc = table.project_scalar(shell);
      for (std::size_t k = 0; k < nm; ++k) Bacc[j * nm + k] += pr.weights[i] * pc[k];
    }
  }

  // Constants per (tau, l), sharing the kernel across m.
  parallel_for(nt * static_cast<std::size_t>(L), [&](std::size_t idx) {
    const std::size_t j = idx / L;
    const int l = static_cast<int>(idx % L) + 1;
    const RadialKernel kernel(l, band.nodes[j], opts.lambda);
    std::vector<KernelValues> kv(nr);
    double nm1 = 0.0, np1 = 0.0;
    for (std::size_t i = 0; i < nr; ++i) {
      kv[i] = kernel.at(radial.nodes[i]);
      const double w = radial.weights[i] * radial.nodes[i] * radial.nodes[i];
      nm1 += w * std::norm(kv[i].R);
      np1 += w * std::norm(kv[i].S);
    }
    if (!(nm1 > 0.0) || !(np1 > 0.0)) throw std::logic_error("vanishing Bessel normalizer");
    for (int m = -l; m <= l; ++m) {
      const int k = harmonics::flat_index(l, m);
      RadialCoefficients &e = out.at(j, l, m);
      e.B = Bacc[j * nm + k] / std::pow(opts.rho, l);
      cplx num_r = 0.0, num_2 = 0.0;
      for (std::size_t i = 0; i < nr; ++i) {
        const double w = radial.weights[i] * radial.nodes[i] * radial.nodes[i];
        const cplx lam = -static_cast<double>(l) * e.B * kv[i].lam;
        num_r += w * (cr[(j * nr + i) * nm + k] - lam) * std::conj(kv[i].R);
        num_2 += w * c2[(j * nr + i) * nm + k] * std::conj(kv[i].S);
      }
      e.Cr = num_r / nm1;
      e.C2 = num_2 / np1;
    }
  });
  return out;
}

} // namespace rst::spectral
