#include "rst/specfun.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace rst::specfun {

namespace {

constexpr int kSeriesCap = 500;

// Polynomial sum_k (n+k)!/(k!(n-k)!) w^k appearing in the half-integer closed forms.
cplx half_int_poly(int n, cplx w) {
  cplx acc = 0.0;
  double a = 1.0;
  cplx wk = 1.0;
  for (int k = 0; k <= n; ++k) {
    acc += a * wk;
    a *= static_cast<double>((n + k + 1) * (n - k)) / (k + 1);
    wk *= w;
  }
  return acc;
}

// Radius below which the power series is preferred over the closed form.
double series_radius(int l) { return 8.0 + 1.5 * l; }

cplx scaled_i_raw(int l, cplx z) {
  if (std::abs(z) < series_radius(l)) return std::exp(-z) * bessel_i_series(l + 0.5, ComplexArg(z));
  const cplx w = 1.0 / (2.0 * z);
  const double sign = (l % 2 == 0) ? 1.0 : -1.0;
  return (half_int_poly(l, -w) - sign * std::exp(-2.0 * z) * half_int_poly(l, w)) /
         std::sqrt(2.0 * kPi * z);
}

cplx scaled_k_raw(int l, cplx z) {
  return std::sqrt(kPi / (2.0 * z)) * half_int_poly(l, 1.0 / (2.0 * z));
}

} // namespace

ComplexArg::ComplexArg(cplx z) : z_(z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw BranchCutError("complex argument is not finite");
  if (z.imag() == 0.0 && z.real() <= 0.0)
    throw BranchCutError("complex argument " + std::to_string(z.real()) +
                         " lies on the closed negative real axis");
}

HalfIntOrder::HalfIntOrder(int l) : l_(l) {
  if (l < 0) throw PreconditionError("half-integer order requires l >= 0, got " + std::to_string(l));
}

cplx principal_sqrt(ComplexArg z) { return std::sqrt(z.value()); }

double gamma(double x) { return std::tgamma(x); }

cplx bessel_i_series(double nu, ComplexArg za) {
  const cplx z = za.value();
  const cplx q = 0.25 * z * z;
  cplx term = std::exp(nu * std::log(0.5 * z)) / std::tgamma(nu + 1.0);
  cplx sum = term;
  const double qa = std::abs(q);
  for (int k = 0; k < kSeriesCap; ++k) {
    const double denom = (k + 1.0) * (nu + k + 1.0);
    term *= q / denom;
    sum += term;
    // Terms only shrink monotonically once (k+1)|nu+k+1| exceeds |z|^2/4.
    if (std::abs(denom) > qa && std::abs(term) <= 1e-16 * std::abs(sum)) return sum;
    if (sum == 0.0 && term == 0.0) return sum;
  }
  throw ConvergenceError("bessel_i_series: no convergence within " + std::to_string(kSeriesCap) +
                         " terms for nu=" + std::to_string(nu));
}

cplx bessel_k_series(double nu, ComplexArg z) {
  const double s = std::sin(nu * kPi);
  if (std::abs(s) < 1e-14) throw PreconditionError("bessel_k_series: integer order is excluded");
  return 0.5 * kPi * (bessel_i_series(-nu, z) - bessel_i_series(nu, z)) / s;
}

cplx bessel_i_closed(HalfIntOrder nu, ComplexArg za) {
  const cplx z = za.value();
  const cplx w = 1.0 / (2.0 * z);
  const double sign = (nu.l() % 2 == 0) ? 1.0 : -1.0;
  return (std::exp(z) * half_int_poly(nu.l(), -w) - sign * std::exp(-z) * half_int_poly(nu.l(), w)) /
         std::sqrt(2.0 * kPi * z);
}

cplx bessel_k_closed(HalfIntOrder nu, ComplexArg z) {
  return std::exp(-z.value()) * scaled_k_raw(nu.l(), z.value());
}

BesselPair bessel_i_scaled(HalfIntOrder nu, ComplexArg za) {
  const cplx z = za.value();
  const cplx v = scaled_i_raw(nu.l(), z);
  const cplx up = scaled_i_raw(nu.l() + 1, z);
  return {v, up + (nu.nu() / z) * v};
}

BesselPair bessel_k_scaled(HalfIntOrder nu, ComplexArg za) {
  const cplx z = za.value();
  const cplx v = scaled_k_raw(nu.l(), z);
  const cplx down = nu.l() == 0 ? v : scaled_k_raw(nu.l() - 1, z);
  return {v, -down - (nu.nu() / z) * v};
}

BesselPair bessel_i(HalfIntOrder nu, ComplexArg z) {
  const BesselPair s = bessel_i_scaled(nu, z);
  const cplx e = std::exp(z.value());
  return {s.value * e, s.derivative * e};
}

BesselPair bessel_k(HalfIntOrder nu, ComplexArg z) {
  const BesselPair s = bessel_k_scaled(nu, z);
  const cplx e = std::exp(-z.value());
  return {s.value * e, s.derivative * e};
}

cplx wronskian_residual(HalfIntOrder nu, ComplexArg z) {
  // Scaled factors cancel: (e^z K)(e^{-z} I') - (e^z K')(e^{-z} I).
  const BesselPair i = bessel_i_scaled(nu, z);
  const BesselPair k = bessel_k_scaled(nu, z);
  return k.value * i.derivative - k.derivative * i.value - 1.0 / z.value();
}

} // namespace rst::specfun
