#include <cmath>
#include <map>
#include <mutex>

#include "rst/specfun.hpp"
#include "rst/spectral.hpp"

namespace rst::spectral {

namespace {

const quad::Rule &cached_rule(int n, bool laguerre) {
  static std::mutex mu;
  static std::map<std::pair<int, bool>, quad::Rule> cache;
  std::lock_guard lock(mu);
  auto it = cache.find({n, laguerre});
  if (it == cache.end())
    it = cache.emplace(std::make_pair(n, laguerre), laguerre ? quad::gauss_laguerre(n) : quad::gauss_legendre(n, 0.0, 1.0))
             .first;
  return it->second;
}

// Width, in units of 1/Re k, beyond which e^{-k(r - s)} is below double precision.
constexpr double kDecayWindow = 38.0;

} // namespace

RadialKernel::RadialKernel(int l, double tau, const LambdaOptions &opts)
    : l_(l), tau_(tau), gl_(cached_rule(opts.gl_nodes, false)), lag_(cached_rule(opts.laguerre_nodes, true)) {
  if (l < 0) throw PreconditionError("RadialKernel: negative degree");
  if (tau == 0.0) throw PreconditionError("RadialKernel: tau must be nonzero");
  k_ = specfun::principal_sqrt(specfun::ComplexArg(cplx(0.0, tau)));
}

KernelValues RadialKernel::at(double r) const {
  if (!(r > 0.0)) throw SingularInputError("radial kernels exclude r <= 0");
  const specfun::HalfIntOrder nu(l_);
  const cplx z = k_ * r;
  const specfun::BesselPair I = specfun::bessel_i_scaled(nu, specfun::ComplexArg(z));
  const specfun::BesselPair K = specfun::bessel_k_scaled(nu, specfun::ComplexArg(z));
  const double a = k_.real();
  const double p = l_ + 1.5;

  // A~(r) = int_0^r s^{l+3/2} I~(ks) e^{-k(r-s)} ds over the window where the factor is visible.
  const double r0 = std::max(0.0, r - kDecayWindow / a);
  cplx At = 0.0;
  for (std::size_t q = 0; q < gl_.size(); ++q) {
    const double s = r0 + (r - r0) * gl_.nodes[q];
    const cplx Is = specfun::bessel_i_scaled(nu, specfun::ComplexArg(k_ * s)).value;
    At += gl_.weights[q] * std::pow(s, p) * Is * std::exp(-k_ * (r - s));
  }
  At *= (r - r0);

  // B~(r) = int_r^inf s^{l+3/2} K~(ks) e^{-k(s-r)} ds with s = r + u / Re k.
  cplx Bt = 0.0;
  for (std::size_t q = 0; q < lag_.size(); ++q) {
    const double u = lag_.nodes[q];
    const double s = r + u / a;
    const cplx Ks = specfun::bessel_k_scaled(nu, specfun::ComplexArg(k_ * s)).value;
    Bt += lag_.weights[q] * std::exp(cplx(u, 0.0) - k_ * u / a) * std::pow(s, p) * Ks;
  }
  Bt /= a;

  const double rm32 = std::pow(r, -1.5), rm52 = rm32 / r, rm12 = rm32 * r;
  const cplx grow = std::exp(z);
  KernelValues v;
  v.R = rm32 * I.value * grow;
  v.dR = (-1.5 * rm52 * I.value + rm32 * k_ * I.derivative) * grow;
  v.S = rm12 * I.value * grow;
  v.dS = (-0.5 * rm32 * I.value + rm12 * k_ * I.derivative) * grow;
  v.lam = rm32 * (K.value * At + I.value * Bt);
  v.dlam = (-1.5 * rm52 * K.value + rm32 * k_ * K.derivative) * At +
           (-1.5 * rm52 * I.value + rm32 * k_ * I.derivative) * Bt;
  return v;
}

cplx lambda_profile(ModeIndex mode, double tau, cplx B, double r, const LambdaOptions &opts) {
  if (B == 0.0 || mode.l == 0) return 0.0;
  return -static_cast<double>(mode.l) * B * RadialKernel(mode.l, tau, opts).at(r).lam;
}

double bessel_normalizer(int l, double tau, double rho, int j, int nodes) {
  const quad::Rule rule = quad::gauss_legendre(nodes, 0.0, rho);
  const cplx k = std::sqrt(cplx(0.0, tau));
  double acc = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double r = rule.nodes[q];
    const cplx I = specfun::bessel_i(specfun::HalfIntOrder(l), specfun::ComplexArg(k * r)).value;
    acc += rule.weights[q] * std::pow(r, j) * std::norm(I);
  }
  return acc;
}

RadialConstants radial_constants(const quad::Rule &radial, std::span<const cplx> cr_samples,
                                 std::span<const cplx> c2_samples, int l, double tau, cplx B, double rho,
                                 const LambdaOptions &opts) {
  if (cr_samples.size() != radial.size() || c2_samples.size() != radial.size())
    throw PreconditionError("radial_constants: sample count must match the radial rule");
  for (double r : radial.nodes)
    if (!(r > 0.0 && r < rho)) throw PreconditionError("radial_constants: nodes must lie in (0, rho)");
  const RadialKernel kernel(l, tau, opts);
  cplx num_r = 0.0, num_2 = 0.0;
  double norm_m1 = 0.0, norm_p1 = 0.0;
  for (std::size_t q = 0; q < radial.size(); ++q) {
    const double r = radial.nodes[q], w = radial.weights[q] * r * r;
    const KernelValues kv = kernel.at(r);
    const cplx lam = -static_cast<double>(l) * B * kv.lam;
    num_r += w * (cr_samples[q] - lam) * std::conj(kv.R);
    num_2 += w * c2_samples[q] * std::conj(kv.S);
    norm_m1 += w * std::norm(kv.R);
    norm_p1 += w * std::norm(kv.S);
  }
  if (!(norm_m1 > 0.0) || !(norm_p1 > 0.0)) throw std::logic_error("radial_constants: vanishing Bessel normalizer");
  return {num_r / norm_m1, num_2 / norm_p1};
}

ProfileValues coefficient_profiles(const RadialCoefficients &c, const RadialKernel &kernel, double r) {
  const KernelValues kv = kernel.at(r);
  const double l = c.l;
  ProfileValues p;
  p.lambda = -l * c.B * kv.lam;
  const cplx dlambda = -l * c.B * kv.dlam;
  p.cr = c.Cr * kv.R + p.lambda;
  p.dcr = c.Cr * kv.dR + dlambda;
  const double mu = l * (l + 1.0);
  p.c1 = mu > 0.0 ? (2.0 * p.cr + r * p.dcr) / mu : cplx(0.0);
  p.c2 = c.C2 * kv.S;
  p.dc2 = c.C2 * kv.dS;
  p.b = c.B * std::pow(r, c.l);
  p.db = c.l > 0 ? l * c.B * std::pow(r, c.l - 1) : cplx(0.0);
  return p;
}

ProfileValues RadialCoefficients::profiles(double r, const LambdaOptions &opts) const {
  return coefficient_profiles(*this, RadialKernel(l, tau, opts), r);
}
cplx RadialCoefficients::b(double r) const { return B * std::pow(r, l); }
cplx RadialCoefficients::lambda(double r, const LambdaOptions &opts) const { return profiles(r, opts).lambda; }
cplx RadialCoefficients::cr(double r, const LambdaOptions &opts) const { return profiles(r, opts).cr; }
cplx RadialCoefficients::c1(double r, const LambdaOptions &opts) const { return profiles(r, opts).c1; }
cplx RadialCoefficients::c2(double r, const LambdaOptions &opts) const { return profiles(r, opts).c2; }

namespace {

constexpr double kD1[7] = {-1.0 / 60, 9.0 / 60, -45.0 / 60, 0.0, 45.0 / 60, -9.0 / 60, 1.0 / 60};
constexpr double kD2[7] = {2.0 / 180, -27.0 / 180, 270.0 / 180, -490.0 / 180, 270.0 / 180, -27.0 / 180, 2.0 / 180};

template <class Get> cplx stencil(const double (&w)[7], Get &&get, double scale) {
  cplx acc = 0.0;
  for (int j = 0; j < 7; ++j) acc += w[j] * get(j - 3);
  return acc / scale;
}

} // namespace

OdeResidual ode_residual(const RadialCoefficients &c, std::span<const double> r_grid, const LambdaOptions &opts) {
  if (c.l < 1) throw PreconditionError("ode_residual: requires l >= 1");
  const RadialKernel kernel(c.l, c.tau, opts);
  const double mu = c.l * (c.l + 1.0);
  const cplx it(0.0, c.tau);
  OdeResidual out;
  auto rel = [](cplx res, double scale) { return scale > 0.0 ? std::abs(res) / scale : std::abs(res); };
  for (double r : r_grid) {
    const double h = 2e-3 * r;
    // Profiles on offsets -6..6 so that R1 can itself be differenced.
    ProfileValues pv[13];
    for (int j = -6; j <= 6; ++j) pv[j + 6] = coefficient_profiles(c, kernel, r + j * h);
    auto rr = [&](int j) { return r + j * h; };
    auto F = [&](int j) { return rr(j) * pv[j + 6].c1; };
    auto G = [&](int j) { return rr(j) * rr(j) * pv[j + 6].cr; };
    auto H = [&](int j) { return rr(j) * pv[j + 6].c2; };
    auto CR = [&](int j) { return pv[j + 6].cr; };
    auto Fp_at = [&](int j0) { return stencil(kD1, [&](int j) { return F(j0 + j); }, h); };
    auto R1_at = [&](int j0) {
      const double s = rr(j0);
      return -Fp_at(j0) + CR(j0) - (-it * G(j0) - s * s * pv[j0 + 6].db) / mu;
    };
    const ProfileValues &p = pv[6];
    const cplx Fp = Fp_at(0);
    const cplx Fpp = stencil(kD2, F, h * h);
    const cplx crp = stencil(kD1, CR, h);
    const cplx Gp = stencil(kD1, G, h);
    const cplx Gpp = stencil(kD2, G, h * h);
    const cplx Hpp = stencil(kD2, H, h * h);
    const cplx Fv = F(0), Gv = G(0), Hv = H(0);

    const cplx R1 = R1_at(0);
    const double s1 = std::abs(Fp) + std::abs(p.cr) + (std::abs(it * Gv) + r * r * std::abs(p.db)) / mu;
    const cplx R2 = -Fpp + crp + it * Fv + p.b;
    const double s2 = std::abs(Fpp) + std::abs(crp) + std::abs(it * Fv) + std::abs(p.b);
    const cplx R3 = Gp - mu * Fv;
    const double s3 = std::abs(Gp) + mu * std::abs(Fv);
    const cplx RC2 = -Hpp + (it + mu / (r * r)) * Hv;
    const double sc2 = std::abs(Hpp) + std::abs(it * Hv) + mu / (r * r) * std::abs(Hv);
    const cplx RY = -Gpp + (it + mu / (r * r)) * Gv + r * r * p.db;
    const double sy = std::abs(Gpp) + std::abs(it * Gv) + mu / (r * r) * std::abs(Gv) + r * r * std::abs(p.db);
    const double l = c.l;
    const cplx bpp = c.l >= 2 ? l * (l - 1.0) * c.B * std::pow(r, c.l - 2) : cplx(0.0);
    const cplx RP = -bpp - 2.0 / r * p.db + mu / (r * r) * p.b;
    const double sp = std::abs(bpp) + 2.0 / r * std::abs(p.db) + mu / (r * r) * std::abs(p.b);
    const cplx R1p = stencil(kD1, R1_at, h);
    const cplx gap = R2 - (R1p - it / mu * R3);

    out.line1 = std::max(out.line1, rel(R1, s1));
    out.line2 = std::max(out.line2, rel(R2, s2));
    out.line3 = std::max(out.line3, rel(R3, s3));
    out.c2_line = std::max(out.c2_line, rel(RC2, sc2));
    out.reduced = std::max(out.reduced, rel(RY, sy));
    out.pressure = std::max(out.pressure, rel(RP, sp));
    out.equivalence_gap = std::max(out.equivalence_gap, rel(gap, s2));
  }
  return out;
}

} // namespace rst::spectral
