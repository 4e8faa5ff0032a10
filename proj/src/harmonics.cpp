#include "rst/harmonics.hpp"

#include <cmath>
#include <string>

#include "rst/quadrature.hpp"

namespace rst::harmonics {

namespace {

// Q_lm = P_lm / sin^m(theta) for m >= 0 and its first two y-derivatives.
struct QValues {
  double q, dq, d2q;
};

QValues q_column(int l, int m, double y) {
  double qmm = (m % 2 == 0) ? 1.0 : -1.0;
  for (int k = 1; k <= m; ++k) qmm *= 2.0 * k - 1.0;
  if (l == m) return {qmm, 0.0, 0.0};
  double q0 = qmm, d0 = 0.0, s0 = 0.0;
  double q1 = (2 * m + 1) * y * qmm, d1 = (2 * m + 1) * qmm, s1 = 0.0;
  for (int k = m + 2; k <= l; ++k) {
    const double a = 2.0 * k - 1.0;
    const double b = k + m - 1.0;
    const double c = k - m;
    const double q2 = (a * y * q1 - b * q0) / c;
    const double d2 = (a * (q1 + y * d1) - b * d0) / c;
    const double s2 = (a * (2.0 * d1 + y * s1) - b * s0) / c;
    q0 = q1, d0 = d1, s0 = s1;
    q1 = q2, d1 = d2, s1 = s2;
  }
  return {q1, d1, s1};
}

double norm_factor(int l, int m) {
  // (l-m)!/(l+m)! as a product to stay exact for moderate l.
  double ratio = 1.0;
  for (int k = l - m + 1; k <= l + m; ++k) ratio /= k;
  return std::sqrt((2.0 * l + 1.0) / (4.0 * kPi) * ratio);
}

void check_mode(ModeIndex mode) {
  if (mode.l < 0 || mode.l > kMaxDegree || std::abs(mode.m) > mode.l)
    throw PreconditionError("invalid mode (l=" + std::to_string(mode.l) + ", m=" + std::to_string(mode.m) + ")");
}

// Y, d_theta Y, (d_phi Y)/sin and d_theta^2 Y for m >= 0.
struct ModeParts {
  cplx y, dth, dph, dth2;
};

ModeParts mode_parts(int l, int m, SphericalPoint p) {
  const double ct = std::cos(p.theta), st = std::sin(p.theta);
  const QValues q = q_column(l, m, ct);
  const double sm = std::pow(st, m);
  const double smm1 = m >= 1 ? std::pow(st, m - 1) : 0.0;
  const double smm2 = m >= 2 ? std::pow(st, m - 2) : 0.0;
  const double P = sm * q.q;
  const double dP = m * smm1 * ct * q.q - sm * st * q.dq;
  const double Pos = m >= 1 ? smm1 * q.q : 0.0;
  const double d2P = m * (m - 1) * smm2 * ct * ct * q.q - m * sm * q.q - m * sm * ct * q.dq -
                     (m + 1.0) * sm * ct * q.dq + sm * st * st * q.d2q;
  const double n = norm_factor(l, m);
  const cplx e = std::polar(1.0, m * p.phi);
  return {n * P * e, n * dP * e, cplx(0.0, m) * n * Pos * e, n * d2P * e};
}

ModeParts signed_parts(ModeIndex mode, SphericalPoint p) {
  check_mode(mode);
  const int am = std::abs(mode.m);
  ModeParts v = mode_parts(mode.l, am, p);
  if (mode.m >= 0) return v;
  const double sign = (am % 2 == 0) ? 1.0 : -1.0;
  return {sign * std::conj(v.y), sign * std::conj(v.dth), sign * std::conj(v.dph), sign * std::conj(v.dth2)};
}

} // namespace

ModeIndex::ModeIndex(int l_, int m_) : l(l_), m(m_) { check_mode(*this); }

SphericalPoint::SphericalPoint(double theta_, double phi_) : theta(theta_), phi(phi_) {
  if (!(theta >= 0.0 && theta <= kPi) || !(phi >= 0.0 && phi < 2.0 * kPi))
    throw PreconditionError("spherical point out of range");
}

SphericalPoint SphericalPoint::from_direction(const Vec3 &x) {
  const double rho = std::hypot(x.x(), x.y());
  if (rho == 0.0 && x.z() == 0.0) throw SingularInputError("direction of the zero vector");
  SphericalPoint p;
  p.theta = std::atan2(rho, x.z());
  double phi = std::atan2(x.y(), x.x());
  if (phi < 0.0) phi += 2.0 * kPi;
  if (phi >= 2.0 * kPi) phi = 0.0;
  p.phi = phi;
  return p;
}

Vec3 SphericalPoint::r_hat() const {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}
Vec3 SphericalPoint::theta_hat() const {
  return {std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi), -std::sin(theta)};
}
Vec3 SphericalPoint::phi_hat() const { return {-std::sin(phi), std::cos(phi), 0.0}; }

double legendre_plm(ModeIndex mode, double y) {
  check_mode(mode);
  if (!(std::abs(y) <= 1.0)) throw PreconditionError("legendre_plm: |y| must not exceed 1");
  const int am = std::abs(mode.m);
  const double s = std::sqrt(std::max(0.0, 1.0 - y * y));
  const double p = std::pow(s, am) * q_column(mode.l, am, y).q;
  if (mode.m >= 0) return p;
  double ratio = 1.0;
  for (int k = mode.l - am + 1; k <= mode.l + am; ++k) ratio /= k;
  return ((am % 2 == 0) ? 1.0 : -1.0) * ratio * p;
}

cplx ylm(ModeIndex mode, SphericalPoint p) { return signed_parts(mode, p).y; }

VshTriple vsh(ModeIndex mode, SphericalPoint p) {
  const ModeParts v = signed_parts(mode, p);
  const Vec3 rh = p.r_hat(), th = p.theta_hat(), ph = p.phi_hat();
  VshTriple out;
  out.Y = v.y * rh.cast<cplx>();
  out.Psi = v.dth * th.cast<cplx>() + v.dph * ph.cast<cplx>();
  out.Phi = v.dth * ph.cast<cplx>() - v.dph * th.cast<cplx>();
  return out;
}

cplx laplace_beltrami_ylm(ModeIndex mode, SphericalPoint p) {
  const ModeParts v = signed_parts(mode, p);
  const double ct = std::cos(p.theta), st = std::sin(p.theta);
  const double m2 = static_cast<double>(mode.m) * mode.m;
  return v.dth2 + (ct / st) * v.dth - m2 * v.y / (st * st);
}

void harmonic_values(int L, SphericalPoint p, HarmonicValues &out) {
  if (L < 0 || L > kMaxDegree) throw PreconditionError("harmonic_values: degree out of range");
  const int n = mode_count(L);
  out.y.assign(n, 0.0);
  out.dtheta.assign(n, 0.0);
  out.dphi_over_sin.assign(n, 0.0);
  const double ct = std::cos(p.theta), st = std::sin(p.theta);
  const cplx eiphi = std::polar(1.0, p.phi);
  cplx em = 1.0;
  double qmm = 1.0;  // (-1)^m (2m-1)!!
  double smm1 = 0.0; // sin^{m-1}
  for (int m = 0; m <= L; ++m) {
    if (m > 0) {
      qmm *= -(2.0 * m - 1.0);
      em *= eiphi;
      smm1 = (m == 1) ? 1.0 : smm1 * st;
    }
    const double sm = (m == 0) ? 1.0 : smm1 * st;
    double q0 = 0.0, d0 = 0.0;
    double q1 = qmm, d1 = 0.0;
    double nf = norm_factor(m, m);
    for (int l = m; l <= L; ++l) {
      if (l == m + 1) {
        q0 = q1, d0 = d1;
        q1 = (2 * m + 1) * ct * qmm;
        d1 = (2 * m + 1) * qmm;
      } else if (l > m + 1) {
        const double a = 2.0 * l - 1.0, b = l + m - 1.0, c = l - m;
        const double q2 = (a * ct * q1 - b * q0) / c;
        const double d2 = (a * (q1 + ct * d1) - b * d0) / c;
        q0 = q1, d0 = d1;
        q1 = q2, d1 = d2;
      }
      if (l > m) nf *= std::sqrt((2.0 * l + 1.0) / (2.0 * l - 1.0) * (l - m) / static_cast<double>(l + m));
      const double P = sm * q1;
      const double dP = m * smm1 * ct * q1 - sm * st * d1;
      const double Pos = smm1 * q1;
      const cplx y = nf * P * em;
      const cplx dth = nf * dP * em;
      const cplx dph = cplx(0.0, m) * nf * Pos * em;
      out.y[flat_index(l, m)] = y;
      out.dtheta[flat_index(l, m)] = dth;
      out.dphi_over_sin[flat_index(l, m)] = dph;
      if (m > 0) {
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        out.y[flat_index(l, -m)] = sign * std::conj(y);
        out.dtheta[flat_index(l, -m)] = sign * std::conj(dth);
        out.dphi_over_sin[flat_index(l, -m)] = sign * std::conj(dph);
      }
    }
  }
}

SphereQuadrature::SphereQuadrature(int n_theta, int n_phi) : n_theta_(n_theta), n_phi_(n_phi) {
  if (n_theta < 1 || n_phi < 1) throw PreconditionError("sphere quadrature needs positive node counts");
  const quad::Rule gl = quad::gauss_legendre(n_theta, -1.0, 1.0);
  for (int i = 0; i < n_theta; ++i) {
    const double theta = std::acos(gl.nodes[i]);
    for (int j = 0; j < n_phi; ++j) {
      SphericalPoint p;
      p.theta = theta;
      p.phi = 2.0 * kPi * j / n_phi;
      points_.push_back(p);
      dirs_.push_back(p.r_hat());
      weights_.push_back(gl.weights[i] * 2.0 * kPi / n_phi);
    }
  }
}

cplx scalar_coeff(const ScalarOnSphere &f, ModeIndex mode, const SphereQuadrature &quad) {
  cplx acc = 0.0;
  for (std::size_t i = 0; i < quad.size(); ++i)
    acc += quad.weight(i) * f(quad.point(i)) * std::conj(ylm(mode, quad.point(i)));
  return acc;
}

VectorCoeffs vector_coeffs(const VectorOnSphere &w, ModeIndex mode, const SphereQuadrature &quad) {
  cplx r = 0.0, psi = 0.0, phi = 0.0;
  for (std::size_t i = 0; i < quad.size(); ++i) {
    const SphericalPoint &p = quad.point(i);
    const VshTriple t = vsh(mode, p);
    const CVec3 v = w(p);
    const double wt = quad.weight(i);
    // Eigen's a.dot(b) is sum conj(a_i) b_i, the conjugate of <v, t>.
    r += wt * v.dot(t.Y);
    psi += wt * v.dot(t.Psi);
    phi += wt * v.dot(t.Phi);
  }
  VectorCoeffs out{std::conj(r), 0.0, 0.0};
  if (mode.l >= 1) {
    out.first = std::conj(psi) / mode.mu();
    out.second = std::conj(phi) / mode.mu();
  }
  return out;
}

HarmonicTable::HarmonicTable(const SphereQuadrature &quad, int L) : quad_(quad), L_(L) {
  if (L < 0 || L > kMaxDegree) throw PreconditionError("HarmonicTable: degree out of range");
  const std::size_t nm = mode_count(L);
  y_.resize(quad.size() * nm);
  dth_.resize(quad.size() * nm);
  dph_.resize(quad.size() * nm);
  HarmonicValues hv;
  for (std::size_t i = 0; i < quad.size(); ++i) {
    harmonic_values(L, quad.point(i), hv);
    for (std::size_t k = 0; k < nm; ++k) {
      y_[i * nm + k] = std::conj(hv.y[k]);
      dth_[i * nm + k] = std::conj(hv.dtheta[k]);
      dph_[i * nm + k] = std::conj(hv.dphi_over_sin[k]);
    }
  }
}

std::vector<cplx> HarmonicTable::project_scalar(std::span<const cplx> samples) const {
  const std::size_t nm = mode_count(L_);
  std::vector<cplx> out(nm, 0.0);
  for (std::size_t i = 0; i < quad_.size(); ++i) {
    const cplx f = quad_.weight(i) * samples[i];
    const cplx *y = &y_[i * nm];
    for (std::size_t k = 0; k < nm; ++k) out[k] += f * y[k];
  }
  return out;
}

std::vector<VectorCoeffs> HarmonicTable::project_vector(std::span<const CVec3> samples) const {
  const std::size_t nm = mode_count(L_);
  std::vector<cplx> r(nm, 0.0), psi(nm, 0.0), phi(nm, 0.0);
  for (std::size_t i = 0; i < quad_.size(); ++i) {
    const SphericalPoint &p = quad_.point(i);
    const double wt = quad_.weight(i);
    const CVec3 &v = samples[i];
    const cplx vr = wt * (v.dot(p.r_hat().cast<cplx>()));
    const cplx vt = wt * (v.dot(p.theta_hat().cast<cplx>()));
    const cplx vp = wt * (v.dot(p.phi_hat().cast<cplx>()));
    // Real unit vectors: Eigen's conjugation acts on v, undo it.
    const cplx wr = std::conj(vr), wth = std::conj(vt), wph = std::conj(vp);
    const cplx *y = &y_[i * nm];
    const cplx *dt = &dth_[i * nm];
    const cplx *dp = &dph_[i * nm];
    for (std::size_t k = 0; k < nm; ++k) {
      r[k] += wr * y[k];
      psi[k] += wth * dt[k] + wph * dp[k];
      phi[k] += wph * dt[k] - wth * dp[k];
    }
  }
  std::vector<VectorCoeffs> out(nm);
  for (int l = 0; l <= L_; ++l) {
    const double mu = l * (l + 1.0);
    for (int m = -l; m <= l; ++m) {
      const int k = flat_index(l, m);
      out[k].radial = r[k];
      out[k].first = l == 0 ? cplx(0.0) : psi[k] / mu;
      out[k].second = l == 0 ? cplx(0.0) : phi[k] / mu;
    }
  }
  return out;
}

namespace {

CVec3 basis_at(VshKind kind, ModeIndex mode, SphericalPoint p) {
  const VshTriple t = vsh(mode, p);
  switch (kind) {
  case VshKind::Y: return t.Y;
  case VshKind::Psi: return t.Psi;
  case VshKind::Phi: return t.Phi;
  }
  return CVec3::Zero();
}

double radius_of(const Vec3 &x) {
  const double r = x.norm();
  if (r == 0.0) throw SingularInputError("spherical operator formulas exclude r = 0");
  return r;
}

} // namespace

CVec3 vector_mode_field(VshKind kind, const RadialProfile &f, ModeIndex mode, const Vec3 &x) {
  const double r = radius_of(x);
  return f.value(r) * basis_at(kind, mode, SphericalPoint::from_direction(x));
}

CVec3 grad_scalar_mode(const RadialProfile &f, ModeIndex mode, const Vec3 &x) {
  const double r = radius_of(x);
  const VshTriple t = vsh(mode, SphericalPoint::from_direction(x));
  return f.derivative(r) * t.Y + (f.value(r) / r) * t.Psi;
}

cplx div_vector_mode(VshKind kind, const RadialProfile &f, ModeIndex mode, const Vec3 &x) {
  const double r = radius_of(x);
  const cplx y = ylm(mode, SphericalPoint::from_direction(x));
  switch (kind) {
  case VshKind::Y: return (f.derivative(r) + 2.0 * f.value(r) / r) * y;
  case VshKind::Psi: return -mode.mu() * f.value(r) / r * y;
  case VshKind::Phi: return 0.0;
  }
  return 0.0;
}

CVec3 curl_vector_mode(VshKind kind, const RadialProfile &f, ModeIndex mode, const Vec3 &x) {
  const double r = radius_of(x);
  const VshTriple t = vsh(mode, SphericalPoint::from_direction(x));
  const cplx fv = f.value(r), fd = f.derivative(r);
  switch (kind) {
  case VshKind::Y: return -(fv / r) * t.Phi;
  case VshKind::Psi: return (fd + fv / r) * t.Phi;
  case VshKind::Phi: return -(mode.mu() * fv / r) * t.Y - (fd + fv / r) * t.Psi;
  }
  return CVec3::Zero();
}

} // namespace rst::harmonics
