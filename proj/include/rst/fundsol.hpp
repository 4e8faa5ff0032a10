#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "rst/types.hpp"

namespace rst::fundsol {

/// Point force fired at time s from location y with strength c.
struct PoleSource {
  Vec3 location = Vec3::Zero();
  double time = 0.0;
  Vec3 strength = Vec3::Zero();
};

struct SpaceTimePoint {
  Vec3 x = Vec3::Zero();
  double t = 0.0;
};

/// Distance below which a query counts as sitting on a pole.
inline constexpr double kPoleGuard = 1e-8;

/// erf(|x| / (2 sqrt t)) / (4 pi |x|); zero for t <= 0.
double gamma_potential(const Vec3 &x, double t);

/// Heat kernel (4 pi t)^{-3/2} exp(-|x|^2 / 4t); zero for t <= 0.
double heat_kernel(const Vec3 &x, double t);

/// Green tensor -Delta(phi) I + grad grad phi with phi = gamma_potential.
Mat3 stokes_green(const Vec3 &x, double t);

/// x / (4 pi |x|^3).
Vec3 pressure_kernel(const Vec3 &x);

Vec3 stokeslet_field(std::span<const PoleSource> poles, const SpaceTimePoint &p);

/// Time transform int Gamma(x, t) e^{-i tau t} dt in closed form.
CMat3 stokes_green_transform(const Vec3 &x, double tau);

/// Transform of the pole superposition at frequency tau.
CVec3 stokeslet_transform(std::span<const PoleSource> poles, const Vec3 &x, double tau);

/// Transform of the pressure sum_j Pi(x - y_j) . c_j delta(t - s_j).
cplx pressure_transform(std::span<const PoleSource> poles, const Vec3 &x, double tau);

/// CSV with header y1,y2,y3,s,c1,c2,c3.
std::vector<PoleSource> read_poles_csv(std::istream &in);
void write_poles_csv(std::ostream &out, std::span<const PoleSource> poles);

} // namespace rst::fundsol
