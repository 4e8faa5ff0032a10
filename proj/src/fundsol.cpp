#include "rst/fundsol.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace rst::fundsol {

namespace {

const double kInvSqrtPi = 1.0 / std::sqrt(kPi);

double checked_radius(const Vec3 &x) {
  const double r = x.norm();
  if (r < kPoleGuard) throw SingularInputError("evaluation at a pole (|x| < 1e-8)");
  return r;
}

// D(u) = (2/sqrt(pi)) u e^{-u^2} - erf(u), so that phi' = D / (4 pi r^2).
double d_of_u(double u) {
  if (u < 0.5) {
    const double u2 = u * u;
    double pw = u;  // u^{2n+1} / n! with sign
    double sum = 0.0;
    for (int n = 1; n < 40; ++n) {
      pw *= -u2 / n;
      const double term = pw * 2.0 * n / (2.0 * n + 1.0);
      sum += term;
      if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return 2.0 * kInvSqrtPi * sum;
  }
  if (u > 27.0) return -1.0;
  return 2.0 * kInvSqrtPi * u * std::exp(-u * u) - std::erf(u);
}

} // namespace

double gamma_potential(const Vec3 &x, double t) {
  const double r = checked_radius(x);
  if (t <= 0.0) return 0.0;
  return std::erf(r / (2.0 * std::sqrt(t))) / (4.0 * kPi * r);
}

double heat_kernel(const Vec3 &x, double t) {
  if (t <= 0.0) return 0.0;
  const double expo = -x.squaredNorm() / (4.0 * t);
  if (expo < -740.0) return 0.0;
  return std::pow(4.0 * kPi * t, -1.5) * std::exp(expo);
}

Mat3 stokes_green(const Vec3 &x, double t) {
  const double r = checked_radius(x);
  if (t <= 0.0) return Mat3::Zero();
  const double u = r / (2.0 * std::sqrt(t));
  const double D = d_of_u(u);
  const double gauss = u > 27.0 ? 0.0 : 4.0 * kInvSqrtPi * u * u * u * std::exp(-u * u);
  const double E = -2.0 * D - gauss;
  const double dphi_over_r = D / (4.0 * kPi * r * r * r);
  const double d2phi = E / (4.0 * kPi * r * r * r);
  const Vec3 e = x / r;
  const Mat3 ee = e * e.transpose();
  return heat_kernel(x, t) * Mat3::Identity() + d2phi * ee + dphi_over_r * (Mat3::Identity() - ee);
}

Vec3 pressure_kernel(const Vec3 &x) {
  const double r = checked_radius(x);
  return x / (4.0 * kPi * r * r * r);
}

Vec3 stokeslet_field(std::span<const PoleSource> poles, const SpaceTimePoint &p) {
  Vec3 v = Vec3::Zero();
  for (const PoleSource &s : poles) {
    const Vec3 d = p.x - s.location;
    if (d.norm() < kPoleGuard) throw SingularInputError("stokeslet_field evaluated at a pole");
    if (p.t > s.time) v += stokes_green(d, p.t - s.time) * s.strength;
  }
  return v;
}

CMat3 stokes_green_transform(const Vec3 &x, double tau) {
  if (tau < 0.0) return stokes_green_transform(x, -tau).conjugate();
  const double r = checked_radius(x);
  const cplx k = std::sqrt(cplx(0.0, tau));
  const cplx w = k * r;
  // a = f''/k^2, b = (f'/r)/k^2 with f = (1 - e^{-kr}) / r.
  cplx a, b;
  if (std::abs(w) < 1.0) {
    // r^2 f' = w^2 S1, r^3 f'' = w^3 S2.
    cplx s1 = 0.0, s2 = 0.0, wp = 1.0;  // wp = w^{m-2}
    cplx wq = 0.0;                       // w^{m-3}
    double fact = 2.0;
    for (int m = 2; m < 40; ++m) {
      if (m > 2) {
        wq = wp;
        wp *= w;
        fact *= m;
      }
      const double sign = (m % 2 == 0) ? -1.0 : 1.0;
      s1 += sign * (m - 1.0) * wp / fact;
      if (m >= 3) s2 += sign * (m - 1.0) * (m - 2.0) * wq / fact;
      if (m > 4 && std::abs(wq) / fact < 1e-18) break;
    }
    a = k * s2;
    b = s1 / r;
  } else {
    const cplx E = std::exp(-w);
    const cplx fp = k * E / r - (1.0 - E) / (r * r);
    const cplx fpp = -k * k * E / r - 2.0 * k * E / (r * r) + 2.0 * (1.0 - E) / (r * r * r);
    a = fpp / (k * k);
    b = fp / (r * k * k);
  }
  const Vec3 e = x / r;
  const Mat3 ee = e * e.transpose();
  const cplx heat = std::exp(-w) / (4.0 * kPi * r);
  return heat * Mat3::Identity().cast<cplx>() +
         (a / (4.0 * kPi)) * ee.cast<cplx>() + (b / (4.0 * kPi)) * (Mat3::Identity() - ee).cast<cplx>();
}

CVec3 stokeslet_transform(std::span<const PoleSource> poles, const Vec3 &x, double tau) {
  CVec3 v = CVec3::Zero();
  for (const PoleSource &s : poles)
    v += stokes_green_transform(x - s.location, tau) * s.strength.cast<cplx>() *
         std::polar(1.0, -tau * s.time);
  return v;
}

cplx pressure_transform(std::span<const PoleSource> poles, const Vec3 &x, double tau) {
  cplx q = 0.0;
  for (const PoleSource &s : poles)
    q += pressure_kernel(x - s.location).dot(s.strength) * std::polar(1.0, -tau * s.time);
  return q;
}

std::vector<PoleSource> read_poles_csv(std::istream &in) {
  std::vector<PoleSource> poles;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (line.find("y1") != std::string::npos) continue;
    }
    std::stringstream ss(line);
    std::string cell;
    double vals[7];
    int n = 0;
    while (std::getline(ss, cell, ',')) {
      if (n >= 7) throw PreconditionError("poles CSV line " + std::to_string(lineno) + ": more than 7 columns");
      try {
        std::size_t used = 0;
        vals[n] = std::stod(cell, &used);
      } catch (const std::exception &) {
        throw PreconditionError("poles CSV line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
      ++n;
    }
    if (n != 7) throw PreconditionError("poles CSV line " + std::to_string(lineno) + ": expected 7 columns");
    PoleSource p;
    p.location = Vec3(vals[0], vals[1], vals[2]);
    p.time = vals[3];
    p.strength = Vec3(vals[4], vals[5], vals[6]);
    if (!p.strength.allFinite() || !p.location.allFinite() || !std::isfinite(p.time))
      throw PreconditionError("poles CSV line " + std::to_string(lineno) + ": non-finite value");
    poles.push_back(p);
  }
  return poles;
}

void write_poles_csv(std::ostream &out, std::span<const PoleSource> poles) {
  out << "y1,y2,y3,s,c1,c2,c3\n";
  out.precision(17);
  for (const PoleSource &p : poles) {
    out << p.location.x() << ',' << p.location.y() << ',' << p.location.z() << ',' << p.time << ','
        << p.strength.x() << ',' << p.strength.y() << ',' << p.strength.z() << '\n';
  }
}

} // namespace rst::fundsol
