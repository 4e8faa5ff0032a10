#pragma once

#include <functional>
#include <span>
#include <vector>

#include "rst/types.hpp"

namespace rst::harmonics {

inline constexpr int kMaxDegree = 32;

struct ModeIndex {
  int l = 0;
  int m = 0;
  ModeIndex() = default;
  ModeIndex(int l_, int m_);
  double mu() const { return l * (l + 1.0); }
};

/// Position of (l, m) in the flat ordering l^2 + l + m.
inline int flat_index(int l, int m) { return l * l + l + m; }
inline int mode_count(int L) { return (L + 1) * (L + 1); }

struct SphericalPoint {
  double theta = 0.0;
  double phi = 0.0;
  SphericalPoint() = default;
  SphericalPoint(double theta_, double phi_);
  static SphericalPoint from_direction(const Vec3 &x);
  Vec3 r_hat() const;
  Vec3 theta_hat() const;
  Vec3 phi_hat() const;
};

struct VshTriple {
  CVec3 Y;
  CVec3 Psi;
  CVec3 Phi;
};

double legendre_plm(ModeIndex mode, double y);
cplx ylm(ModeIndex mode, SphericalPoint p);
VshTriple vsh(ModeIndex mode, SphericalPoint p);

/// Gauss-Legendre in cos(theta) times a uniform azimuthal rule.
class SphereQuadrature {
public:
  SphereQuadrature(int n_theta, int n_phi);
  int n_theta() const { return n_theta_; }
  int n_phi() const { return n_phi_; }
  std::size_t size() const { return points_.size(); }
  const SphericalPoint &point(std::size_t i) const { return points_[i]; }
  const Vec3 &direction(std::size_t i) const { return dirs_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }

private:
  int n_theta_;
  int n_phi_;
  std::vector<SphericalPoint> points_;
  std::vector<Vec3> dirs_;
  std::vector<double> weights_;
};

using ScalarOnSphere = std::function<cplx(const SphericalPoint &)>;
using VectorOnSphere = std::function<CVec3(const SphericalPoint &)>;

struct VectorCoeffs {
  cplx radial;
  cplx first;
  cplx second;
};

cplx scalar_coeff(const ScalarOnSphere &f, ModeIndex mode, const SphereQuadrature &quad);
VectorCoeffs vector_coeffs(const VectorOnSphere &w, ModeIndex mode, const SphereQuadrature &quad);

/// All harmonics up to degree L tabulated at the nodes of a quadrature;
/// projects sampled fields onto every mode at once.
class HarmonicTable {
public:
  HarmonicTable(const SphereQuadrature &quad, int L);
  int degree() const { return L_; }
  const SphereQuadrature &quadrature() const { return quad_; }
  /// <f, Y_lm> for every mode, flat-indexed.
  std::vector<cplx> project_scalar(std::span<const cplx> samples) const;
  /// Vector coefficients for every mode, flat-indexed; l = 0 carries only the radial part.
  std::vector<VectorCoeffs> project_vector(std::span<const CVec3> samples) const;

private:
  const SphereQuadrature &quad_;
  int L_;
  // Per node: conj(Y), d_theta Y, (d_phi Y)/sin(theta), flat-indexed over modes.
  std::vector<cplx> y_;
  std::vector<cplx> dth_;
  std::vector<cplx> dph_;
};

/// Y_lm, d_theta Y_lm and (d_phi Y_lm)/sin(theta) for all modes up to L at one point.
struct HarmonicValues {
  std::vector<cplx> y;
  std::vector<cplx> dtheta;
  std::vector<cplx> dphi_over_sin;
};
void harmonic_values(int L, SphericalPoint p, HarmonicValues &out);

/// Radial profile f(r) with derivative.
struct RadialProfile {
  std::function<cplx(double)> value;
  std::function<cplx(double)> derivative;
};

enum class VshKind { Y, Psi, Phi };

/// f(r) X_lm(x/|x|) in Cartesian components.
CVec3 vector_mode_field(VshKind kind, const RadialProfile &f, ModeIndex mode, const Vec3 &x);
/// grad(f Y_lm) from the closed formula.
CVec3 grad_scalar_mode(const RadialProfile &f, ModeIndex mode, const Vec3 &x);
/// div(f X_lm) from the closed formula.
cplx div_vector_mode(VshKind kind, const RadialProfile &f, ModeIndex mode, const Vec3 &x);
/// curl(f X_lm) from the closed formula.
CVec3 curl_vector_mode(VshKind kind, const RadialProfile &f, ModeIndex mode, const Vec3 &x);

/// Surface Laplacian of Y_lm via its theta/phi formula (second derivatives analytic).
cplx laplace_beltrami_ylm(ModeIndex mode, SphericalPoint p);

} // namespace rst::harmonics
