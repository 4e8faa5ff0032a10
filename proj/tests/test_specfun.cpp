#include "doctest.h"

#include <cmath>
#include <vector>

#include "rst/specfun.hpp"

using namespace rst;
using namespace rst::specfun;

namespace {

struct BesselRef {
  int l;
  cplx z, I, dI, K, dK;
};

// Frozen from 30-digit mpmath evaluations.
const std::vector<BesselRef> kRef = {
    {0, {1.0, 0.0}, {0.93767488824548765, 0.0}, {0.76236277047022362, 0.0}, {0.46106850444789456, 0.0}, {-0.69160275667184184, 0.0}},
    {0, {1.0, 1.0}, {0.72698064596355457, 0.64183847533798587}, {0.42850259344389657, 0.42020375309200994}, {0.068685783419996419, -0.38157825981268307}, {0.0095373356781752441, 0.49414427062085295}},
    {1, {2.0, 0.0}, {1.0994731886331097, 0.0}, {1.2216319716142228, 0.0}, {0.17990665795209217, 0.0}, {-0.25486776543213058, 0.0}},
    {2, {1.0, 2.0}, {-0.3217929195467115, 0.023874670511175543}, {-0.1986218524426361, 0.24527217014864518}, {-0.60546215319149208, 0.21891342595632886}, {0.46008981998511506, -0.61229284030144604}},
    {3, {0.3, -0.2}, {-0.00010166619796076566, -0.00018883818662375627}, {0.00018809439648504367, -0.0020767073705724455}, {-318.14484405817003, 583.50750199056408}, {5707.7265872396478, -3047.457662705121}},
    {4, {5.0, 3.0}, {-4.5306797463910891, -2.5197647506561783}, {-5.5146399363721484, -1.7472264280197622}, {-0.0092700285573731336, 0.010559679790000766}, {0.0087311601036165336, -0.015052878242409477}},
    {1, {10.0, 0.0}, {2500.9061549421178, 0.0}, {2403.6486806332533, 0.0}, {1.9792825903075698e-5, 0.0}, {-2.0962401979166534e-5, 0.0}},
    {6, {20.0, 15.0}, {-17106009.488623752, 9650690.3688654348}, {-16788369.945656413, 9950714.9157892923}, {-1.0030488784983733e-9, 9.8791618780046241e-11}, {1.0251086403481479e-9, -1.4424113578582738e-10}},
    {8, {0.7, 0.7}, {1.9416111302185136e-8, 8.6355249381691776e-9}, {1.7071321918276073e-7, -6.4421065622259477e-8}, {2521376.0380642981, -1142241.6074244149}, {-8544598.1879502147, 22179896.12994656}},
};

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

std::vector<cplx> sector_points() {
  std::vector<cplx> zs;
  for (double mod : {0.1, 0.4, 1.0, 2.5, 6.0, 12.0, 30.0})
    for (double arg : {-kPi / 4, -0.3, 0.0, 0.5, kPi / 4}) zs.push_back(std::polar(mod, arg));
  return zs;
}

} // namespace

TEST_CASE("principal_sqrt examples") {
  CHECK(std::abs(principal_sqrt(ComplexArg(4.0)) - cplx(2.0, 0.0)) < 1e-15);
  CHECK(std::abs(principal_sqrt(ComplexArg(cplx(0.0, 2.0))) - cplx(1.0, 1.0)) < 1e-15);
  CHECK_THROWS_AS(principal_sqrt(ComplexArg(-1.0)), BranchCutError);
  CHECK_THROWS_AS(ComplexArg(0.0), BranchCutError);
  for (cplx z : sector_points()) {
    const cplx w = principal_sqrt(ComplexArg(z));
    CHECK(w.real() > 0.0);
    CHECK(std::abs(w * w - z) < 1e-14 * std::abs(z));
  }
}

TEST_CASE("order validation") {
  CHECK_THROWS_AS(HalfIntOrder(-1), PreconditionError);
  CHECK(HalfIntOrder(3).nu() == doctest::Approx(3.5));
}

TEST_CASE("I and K against high-precision references") {
  for (const auto &r : kRef) {
    CAPTURE(r.l);
    CAPTURE(r.z);
    const BesselPair i = bessel_i(HalfIntOrder(r.l), ComplexArg(r.z));
    const BesselPair k = bessel_k(HalfIntOrder(r.l), ComplexArg(r.z));
    CHECK(rel(i.value, r.I) < 1e-12);
    CHECK(rel(i.derivative, r.dI) < 1e-12);
    CHECK(rel(k.value, r.K) < 1e-12);
    CHECK(rel(k.derivative, r.dK) < 1e-12);
  }
}

TEST_CASE("closed-form examples") {
  const BesselPair i = bessel_i(HalfIntOrder(0), ComplexArg(1.0));
  CHECK(rel(i.value, std::sqrt(2.0 / kPi) * std::sinh(1.0)) < 1e-14);
  const cplx series = bessel_i_series(0.5, ComplexArg(1.0));
  CHECK(rel(series, std::sqrt(2.0 / kPi) * std::sinh(1.0)) < 1e-12);
  CHECK(rel(bessel_i_series(0.5, ComplexArg(cplx(1, 1))), bessel_i_closed(HalfIntOrder(0), ComplexArg(cplx(1, 1)))) <
        1e-10);

  const BesselPair k = bessel_k(HalfIntOrder(0), ComplexArg(1.0));
  CHECK(rel(k.value, std::sqrt(kPi / 2.0) * std::exp(-1.0)) < 1e-14);
  // Defining I_{-nu}/I_nu combination slightly off the half-integer order.
  for (double d : {1e-5, -1e-5}) CHECK(rel(bessel_k_series(0.5 + d, ComplexArg(1.0)), k.value) < 2e-5);
  const cplx kmid = 0.5 * (bessel_k_series(0.5 + 1e-4, ComplexArg(1.0)) + bessel_k_series(0.5 - 1e-4, ComplexArg(1.0)));
  CHECK(rel(kmid, k.value) < 1e-8);

  const BesselPair k32 = bessel_k(HalfIntOrder(1), ComplexArg(2.0));
  CHECK(rel(k32.value, std::sqrt(kPi / 4.0) * std::exp(-2.0) * 1.5) < 1e-14);
  CHECK(rel(bessel_k_series(1.5 + 1e-4, ComplexArg(2.0)) * 0.5 + bessel_k_series(1.5 - 1e-4, ComplexArg(2.0)) * 0.5,
            k32.value) < 1e-7);
}

TEST_CASE("derivative recurrences") {
  for (int l = 0; l <= 8; ++l)
    for (cplx z : sector_points()) {
      const double nu = l + 0.5;
      const BesselPair i = bessel_i(HalfIntOrder(l), ComplexArg(z));
      const BesselPair k = bessel_k(HalfIntOrder(l), ComplexArg(z));
      const cplx i1 = bessel_i(HalfIntOrder(l + 1), ComplexArg(z)).value;
      const cplx k1 = bessel_k(HalfIntOrder(l + 1), ComplexArg(z)).value;
      CHECK(rel(i.derivative, nu / z * i.value + i1) < 1e-10);
      CHECK(rel(k.derivative, nu / z * k.value - k1) < 1e-10);
      if (l >= 1) {
        const cplx im1 = bessel_i(HalfIntOrder(l - 1), ComplexArg(z)).value;
        CHECK(rel(nu / z * i.value + i1, -nu / z * i.value + im1) < 1e-10);
      }
    }
}

TEST_CASE("Wronskian examples") {
  CHECK(std::abs(wronskian_residual(HalfIntOrder(0), ComplexArg(1.0))) < 1e-10);
  CHECK(std::abs(wronskian_residual(HalfIntOrder(2), ComplexArg(cplx(1, 2)))) < 1e-10);
  CHECK(std::abs(wronskian_residual(HalfIntOrder(1), ComplexArg(10.0)) * 10.0) < 1e-10);
}

TEST_CASE("Wronskian property over the sector") {
  for (int l = 0; l <= 4; ++l)
    for (cplx z : sector_points()) CHECK(std::abs(z * wronskian_residual(HalfIntOrder(l), ComplexArg(z))) < 1e-10);
}

TEST_CASE("small-argument regimes stay bracketed") {
  for (int l = 0; l <= 6; ++l) {
    const double nu = l + 0.5;
    double lo_i = 1e300, hi_i = 0, lo_k = 1e300, hi_k = 0;
    for (double mod : {1e-3, 0.01, 0.1, 0.5, 0.99})
      for (double arg : {-kPi / 4, 0.0, kPi / 4}) {
        const cplx z = std::polar(mod, arg);
        const double ri = std::abs(bessel_i(HalfIntOrder(l), ComplexArg(z)).value) / std::pow(mod, nu);
        const double rk = std::abs(bessel_k(HalfIntOrder(l), ComplexArg(z)).value) * std::pow(mod, nu);
        lo_i = std::min(lo_i, ri), hi_i = std::max(hi_i, ri);
        lo_k = std::min(lo_k, rk), hi_k = std::max(hi_k, rk);
      }
    // Leading constants 2^{-nu}/Gamma(nu+1) and Gamma(nu) 2^{nu-1}.
    const double ci = std::pow(2.0, -nu) / specfun::gamma(nu + 1.0), ck = specfun::gamma(nu) * std::pow(2.0, nu - 1.0);
    CHECK(lo_i > 0.25 * ci);
    CHECK(hi_i < 4.0 * ci);
    CHECK(lo_k > 0.25 * ck);
    CHECK(hi_k < 4.0 * ck);
  }
}

TEST_CASE("sector asymptotics stay in [1/10, 10]") {
  // The large-argument regime starts near |z| ~ l(l+1); below it the bracket widens with the order.
  for (int l = 0; l <= 6; ++l)
    for (double mod : {2.0, 5.0, 10.0, 25.0, 50.0})
      for (double arg : {-kPi / 4, -0.4, 0.0, 0.4, kPi / 4}) {
        if (mod < l * (l + 1.0)) continue;
        const cplx z = std::polar(mod, arg);
        const BesselPair is = bessel_i_scaled(HalfIntOrder(l), ComplexArg(z));
        const BesselPair ks = bessel_k_scaled(HalfIntOrder(l), ComplexArg(z));
        // Scaled values remove e^{+-z}; |e^{z}| = e^{Re z}.
        const double ri = std::abs(is.value) * std::sqrt(mod);
        const double rk = std::abs(ks.value) * std::sqrt(mod);
        CHECK(ri > 0.1);
        CHECK(ri < 10.0);
        CHECK(rk > 0.1);
        CHECK(rk < 10.0);
      }
}

TEST_CASE("scaled and unscaled evaluations agree") {
  for (int l = 0; l <= 5; ++l)
    for (cplx z : {cplx(0.5, 0.2), cplx(3, 3), cplx(12, -5)}) {
      const BesselPair i = bessel_i(HalfIntOrder(l), ComplexArg(z));
      const BesselPair k = bessel_k(HalfIntOrder(l), ComplexArg(z));
      CHECK(rel(bessel_i_scaled(HalfIntOrder(l), ComplexArg(z)).value * std::exp(z), i.value) < 1e-12);
      CHECK(rel(bessel_k_scaled(HalfIntOrder(l), ComplexArg(z)).value * std::exp(-z), k.value) < 1e-12);
    }
}

TEST_CASE("production path agrees with the series for |z| <= 30") {
  for (int l = 0; l <= 8; ++l)
    for (double mod : {0.05, 0.3, 1.0, 2.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0})
      for (double arg : {-kPi / 4, 0.0, 0.6, kPi / 4}) {
        const cplx z = std::polar(mod, arg);
        CAPTURE(l);
        CAPTURE(z);
        CHECK(rel(bessel_i(HalfIntOrder(l), ComplexArg(z)).value, bessel_i_series(l + 0.5, ComplexArg(z))) < 1e-10);
      }
}

TEST_CASE("raw closed form agrees with the series away from the origin") {
  for (int l = 0; l <= 8; ++l)
    for (double mod : {5.0, 10.0, 20.0, 30.0})
      for (double arg : {-kPi / 4, 0.0, kPi / 4}) {
        const cplx z = std::polar(mod, arg);
        CAPTURE(l);
        CAPTURE(z);
        CHECK(rel(bessel_i_series(l + 0.5, ComplexArg(z)), bessel_i_closed(HalfIntOrder(l), ComplexArg(z))) < 1e-10);
      }
}

TEST_CASE("gamma function") {
  CHECK(specfun::gamma(0.5) == doctest::Approx(std::sqrt(kPi)).epsilon(1e-14));
  CHECK(specfun::gamma(5.0) == doctest::Approx(24.0).epsilon(1e-14));
  CHECK(specfun::gamma(-0.5) == doctest::Approx(-2.0 * std::sqrt(kPi)).epsilon(1e-13));
}
