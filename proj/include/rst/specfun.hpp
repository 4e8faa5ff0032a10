#pragma once

#include "rst/types.hpp"

namespace rst::specfun {

/// Complex number off the closed negative real axis.
class ComplexArg {
public:
  explicit ComplexArg(cplx z);
  ComplexArg(double x) : ComplexArg(cplx(x, 0.0)) {}
  cplx value() const { return z_; }

private:
  cplx z_;
};

/// Half-integer order nu = l + 1/2.
class HalfIntOrder {
public:
  explicit HalfIntOrder(int l);
  int l() const { return l_; }
  double nu() const { return l_ + 0.5; }

private:
  int l_;
};

struct BesselPair {
  cplx value;
  cplx derivative;
};

/// Square root with positive real part.
cplx principal_sqrt(ComplexArg z);

/// I_{l+1/2}(z) and its derivative.
BesselPair bessel_i(HalfIntOrder nu, ComplexArg z);
/// K_{l+1/2}(z) and its derivative.
BesselPair bessel_k(HalfIntOrder nu, ComplexArg z);

/// e^{-z} I_{l+1/2}(z) and e^{-z} I'_{l+1/2}(z).
BesselPair bessel_i_scaled(HalfIntOrder nu, ComplexArg z);
/// e^{z} K_{l+1/2}(z) and e^{z} K'_{l+1/2}(z).
BesselPair bessel_k_scaled(HalfIntOrder nu, ComplexArg z);

/// K I' - K' I - 1/z.
cplx wronskian_residual(HalfIntOrder nu, ComplexArg z);

/// Defining power series of I_nu for real nu (negative non-integer allowed).
cplx bessel_i_series(double nu, ComplexArg z);
/// pi/2 (I_{-nu} - I_nu) / sin(nu pi) from the series; nu must not be an integer.
/// Loses accuracy to cancellation once |z| exceeds a few units.
cplx bessel_k_series(double nu, ComplexArg z);

/// Elementary closed forms for half-integer order.
cplx bessel_i_closed(HalfIntOrder nu, ComplexArg z);
cplx bessel_k_closed(HalfIntOrder nu, ComplexArg z);

/// Gamma function on the real line.
double gamma(double x);

} // namespace rst::specfun
