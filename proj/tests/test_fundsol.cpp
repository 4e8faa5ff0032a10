#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "rst/fundsol.hpp"

using namespace rst;
using namespace rst::fundsol;

namespace {

std::vector<Vec3> ball_points(double R, int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> pts;
  while (static_cast<int>(pts.size()) < n) {
    const Vec3 x(u(rng), u(rng), u(rng));
    if (x.norm() <= 1.0) pts.push_back(R * x);
  }
  return pts;
}

const std::vector<PoleSource> kPoles = {
    {Vec3(2.0, 0.0, 0.0), 0.0, Vec3(0.0, 0.0, 1.0)},
    {Vec3(-1.5, 1.2, 0.4), -0.3, Vec3(0.5, -0.2, 0.1)},
    {Vec3(0.3, -0.2, -2.4), 0.4, Vec3(-0.1, 0.7, 0.3)},
};

} // namespace

TEST_CASE("gamma potential limits and causality") {
  const Vec3 x(0.3, -0.8, 0.5);
  CHECK(std::abs(gamma_potential(x, 1e-8) - 1.0 / (4 * kPi * x.norm())) < 1e-15);
  CHECK(gamma_potential(x, -0.5) == 0.0);
  CHECK(gamma_potential(x, 0.0) == 0.0);
  CHECK_THROWS_AS(gamma_potential(Vec3::Zero(), 1.0), SingularInputError);
  CHECK_THROWS_AS(stokes_green(Vec3::Constant(1e-10), 1.0), SingularInputError);
}

TEST_CASE("gamma potential against frozen high-precision values") {
  // erf(r/(2 sqrt t))/(4 pi r) at 30 digits.
  struct Ref {
    double r, t, value;
  };
  for (const Ref &c : {Ref{0.5, 0.25, 0.082840128432673897}, Ref{1.0, 1.0, 0.041420064216336949},
                       Ref{2.0, 0.5, 0.037978337795201048}, Ref{3.0, 4.0, 0.018863989067267661}}) {
    const Vec3 x = c.r * Vec3(0.48, -0.6, 0.64);
    CHECK(gamma_potential(x, c.t) == doctest::Approx(c.value).epsilon(1e-14));
  }
}

TEST_CASE("gamma potential against brute-force quadrature of the defining integral") {
  const Vec3 x = Vec3(0.36, 0.48, 0.8);
  CHECK(std::abs(oracle::gamma_brute_force(x, 0.25) / gamma_potential(x, 0.25) - 1.0) < 1e-6);
  for (double t : {0.3, 1.0, 2.5})
    for (const Vec3 &y : {Vec3(0.7, -0.2, 0.1), Vec3(-0.4, 1.1, -0.6)})
      CHECK(std::abs(oracle::gamma_brute_force(y, t) / gamma_potential(y, t) - 1.0) < 1e-6);
}

TEST_CASE("Green tensor symmetry, parity and column divergence") {
  for (const Vec3 &x : ball_points(2.0, 12, 3)) {
    if (x.norm() < 0.2) continue;
    for (double t : {0.05, 0.5, 3.0}) {
      const Mat3 G = stokes_green(x, t);
      CHECK((G - G.transpose()).norm() <= 1e-15 * G.norm());
      CHECK((stokes_green(-x, t) - G).norm() <= 1e-15 * G.norm());
    }
  }
  const Vec3 x(1.0, 1.0, 0.0);
  const double t = 0.5, h = 1e-3;
  for (int k = 0; k < 3; ++k) {
    const std::function<Vec3(const Vec3 &)> col = [&](const Vec3 &y) { return Vec3(stokes_green(y, t).col(k)); };
    const Eigen::Matrix3d J = oracle::fd_jacobian<double>(col, x, h);
    CHECK(std::abs(J.trace()) < 1e-6 * J.norm());
  }
  CHECK(stokes_green(x, -1.0).norm() == 0.0);
}

TEST_CASE("Green tensor assembly matches the finite-difference Hessian of gamma") {
  for (const Vec3 &x : {Vec3(1.0, 1.0, 0.0), Vec3(0.6, -0.3, 0.2), Vec3(-0.2, 0.9, 1.4)})
    for (double t : {0.1, 0.5, 2.0}) {
      const std::function<double(const Vec3 &)> phi = [&](const Vec3 &y) { return gamma_potential(y, t); };
      const Eigen::Matrix3d H = oracle::fd_hessian(phi, x, 1e-2);
      const Mat3 ref = -H.trace() * Mat3::Identity() + H;
      CHECK((stokes_green(x, t) - ref).norm() < 1e-6 * ref.norm());
    }
}

TEST_CASE("pressure kernel") {
  CHECK((pressure_kernel(Vec3(1, 0, 0)) - Vec3(1.0 / (4 * kPi), 0, 0)).norm() < 1e-16);
  CHECK_THROWS_AS(pressure_kernel(Vec3::Zero()), SingularInputError);
  const std::function<double(const Vec3 &)> pot = [](const Vec3 &y) { return -1.0 / (4 * kPi * y.norm()); };
  for (const Vec3 &x : ball_points(3.0, 20, 5)) {
    if (x.norm() < 0.3) continue;
    const Vec3 p = pressure_kernel(x);
    CHECK((pressure_kernel(-x) + p).norm() < 1e-16);
    CHECK(std::abs(p.norm() * x.squaredNorm() - 1.0 / (4 * kPi)) < 1e-15);
    CHECK((oracle::fd_gradient<double>(pot, x, 1e-3) - p).norm() < 1e-8 * p.norm());
  }
}

TEST_CASE("heat kernel solves the heat equation") {
  const Vec3 x(0.4, -0.3, 0.7);
  for (double t : {0.2, 1.0}) {
    const double h = 1e-3;
    const double dt = oracle::d1([&](double s) { return heat_kernel(x, s); }, t, h);
    const std::function<double(const Vec3 &)> f = [&](const Vec3 &y) { return heat_kernel(y, t); };
    const double lap = oracle::fd_hessian(f, x, 1e-2).trace();
    CHECK(std::abs(dt - lap) < 1e-6 * std::abs(dt));
  }
  CHECK(heat_kernel(x, -1.0) == 0.0);
}

TEST_CASE("Stokeslet superposition basics") {
  const SpaceTimePoint p{Vec3(0.1, 0.2, 0.3), 1.0};
  CHECK(stokeslet_field({}, p).norm() == 0.0);
  const std::vector<PoleSource> late = {{Vec3(2, 0, 0), 1.5, Vec3(1, 1, 1)}};
  CHECK(stokeslet_field(late, p).norm() == 0.0);
  CHECK_THROWS_AS(stokeslet_field(late, SpaceTimePoint{Vec3(2, 0, 0), 2.0}), SingularInputError);
  Vec3 sum = Vec3::Zero();
  for (const auto &q : kPoles) sum += stokes_green(p.x - q.location, p.t - q.time) * q.strength;
  CHECK((stokeslet_field(kPoles, p) - sum).norm() < 1e-15);
}

TEST_CASE("sup over the ball decays like t^-3/2") {
  const auto pts = ball_points(1.0, 200, 11);
  std::vector<double> lx, ly;
  for (int i = 0; i < 30; ++i) {
    const double t = 5.0 * std::pow(40.0, i / 29.0);
    double sup = 0.0;
    for (const Vec3 &x : pts) sup = std::max(sup, stokeslet_field(kPoles, {x, t}).norm());
    lx.push_back(std::log(t));
    ly.push_back(std::log(sup));
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i] / n, my += ly[i] / n;
  for (std::size_t i = 0; i < lx.size(); ++i) sxx += (lx[i] - mx) * (lx[i] - mx), sxy += (lx[i] - mx) * (ly[i] - my);
  CHECK(std::abs(sxy / sxx + 1.5) < 0.15);
  // (1+t)^{3/2} sup|v1| stays bounded over the whole window.
  double lo = 1e300, hi = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double t = std::exp(lx[i]);
    const double s = std::pow(1 + t, 1.5) * std::exp(ly[i]);
    lo = std::min(lo, s), hi = std::max(hi, s);
  }
  CHECK(hi / lo < 3.0);
}

TEST_CASE("divergence-free and pressure-free curl criterion") {
  const auto pts = ball_points(1.0, 25, 17);
  const double h = 1e-3, H = 2e-2, ht = 1e-3;
  for (double t : {0.9, 1.4, 3.0}) {
    auto v = [&](const Vec3 &x, double s) { return stokeslet_field(kPoles, {x, s}); };
    double curl_diff = 0.0, curl_scale = 0.0;
    for (const Vec3 &x : pts) {
      const std::function<Vec3(const Vec3 &)> vf = [&](const Vec3 &y) { return v(y, t); };
      const Eigen::Matrix3d J = oracle::fd_jacobian<double>(vf, x, h);
      CHECK(std::abs(J.trace()) < 1e-6 * J.norm());
      // curl of (d_t v - Delta v) via nested differences.
      const std::function<Vec3(const Vec3 &)> heat = [&](const Vec3 &y) {
        const std::function<Vec3(const Vec3 &)> vy = [&](const Vec3 &z) { return v(z, t); };
        const Vec3 vt = oracle::d1([&](double s) { return v(y, s); }, t, ht);
        return Vec3(vt - oracle::fd_laplacian(vy, y, H));
      };
      const std::function<Vec3(const Vec3 &)> dtv = [&](const Vec3 &y) {
        return Vec3(oracle::d1([&](double s) { return v(y, s); }, t, ht));
      };
      const Vec3 c = oracle::fd_curl<double>(heat, x, H);
      const Vec3 ct = oracle::fd_curl<double>(dtv, x, H);
      curl_diff = std::max(curl_diff, c.norm());
      curl_scale = std::max(curl_scale, 2.0 * ct.norm());
    }
    CHECK(curl_diff < 1e-4 * curl_scale);
  }
}

TEST_CASE("translation covariance") {
  const Vec3 x0(0.3, -0.2, 0.1);
  const double t0 = 0.7;
  auto shifted = kPoles;
  for (auto &p : shifted) p.location += x0, p.time += t0;
  for (const Vec3 &x : ball_points(1.0, 30, 23))
    for (double t : {0.5, 2.0, 10.0}) {
      const Vec3 a = stokeslet_field(kPoles, {x, t});
      const Vec3 b = stokeslet_field(shifted, {x + x0, t + t0});
      CHECK((a - b).norm() <= 1e-12 * a.norm());
    }
}

TEST_CASE("closed-form time transform against direct quadrature") {
  std::vector<double> gx, gw;
  oracle::gauss_legendre(16, gx, gw);
  const Vec3 x(0.8, 0.9, -0.3);
  for (double tau : {0.5, 2.0, 6.0}) {
    // Panels refine near t = 0; the t^{-3/2} tail past T is below 1e-7 of the result.
    const double T = 2e4;
    CMat3 acc = CMat3::Zero();
    double a = 0.0;
    while (a < T) {
      const double w = std::min({0.02 + 0.1 * a, 0.5, T - a});
      for (int i = 0; i < 16; ++i) {
        const double t = a + 0.5 * w * (gx[i] + 1.0);
        acc += (0.5 * w * gw[i]) * stokes_green(x, t).cast<cplx>() * std::exp(cplx(0.0, -tau * t));
      }
      a += w;
    }
    const CMat3 ref = stokes_green_transform(x, tau);
    CAPTURE(tau);
    CHECK((acc - ref).norm() < 1e-5 * ref.norm());
  }
  // Transform of the superposition carries the e^{-i tau s} shifts.
  const double tau = 1.3;
  CVec3 sum = CVec3::Zero();
  for (const auto &p : kPoles)
    sum += std::exp(cplx(0.0, -tau * p.time)) * stokes_green_transform(x - p.location, tau) * p.strength.cast<cplx>();
  CHECK((stokeslet_transform(kPoles, x, tau) - sum).norm() < 1e-14 * sum.norm());
}

TEST_CASE("pole CSV round trip") {
  std::stringstream ss;
  write_poles_csv(ss, kPoles);
  const auto back = read_poles_csv(ss);
  REQUIRE(back.size() == kPoles.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK((back[i].location - kPoles[i].location).norm() == 0.0);
    CHECK(back[i].time == kPoles[i].time);
    CHECK((back[i].strength - kPoles[i].strength).norm() == 0.0);
  }
  std::stringstream bad("y1,y2,y3,s,c1,c2,c3\n1,2,3\n");
  CHECK_THROWS(read_poles_csv(bad));
}
