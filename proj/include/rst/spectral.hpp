#pragma once

#include <functional>
#include <span>
#include <vector>

#include "rst/fundsol.hpp"
#include "rst/harmonics.hpp"
#include "rst/quadrature.hpp"

namespace rst::spectral {

using harmonics::ModeIndex;

/// Truncation (L, tau1, tau2) with Gauss-Legendre nodes on the positive half of the band.
struct ModeBand {
  int L = 8;
  double tau1 = 0.05;
  double tau2 = 40.0;
  std::vector<double> nodes;
  std::vector<double> weights;

  static ModeBand gauss_legendre(int L, double tau1, double tau2, int nodes_per_sign);
  void validate() const;
  std::size_t size() const { return nodes.size(); }
};

// ---------------------------------------------------------------------------
// Time transform

struct TimeFourierOptions {
  double t_max = 200.0;
  int n_t = 4096;
  /// Nodes t = a + (b - a) u^grading inside each segment between pole times.
  double grading = 3.0;
  /// Adds v1(x, T) T^{3/2} int_T^inf t^{-3/2} e^{-i tau t} dt for the cut tail.
  bool tail_correction = true;
};

/// Filon-trapezoid transform int v1(x, t) e^{-i tau t} dt on a graded grid,
/// with exponential weights precomputed for a fixed list of frequencies.
class TimeFourierTransform {
public:
  TimeFourierTransform(std::vector<fundsol::PoleSource> poles, std::vector<double> taus,
                       const TimeFourierOptions &opts = {});
  /// Transform at every frequency of the list.
  std::vector<CVec3> transform(const Vec3 &x) const;
  void transform(const Vec3 &x, std::span<CVec3> out) const;
  /// Bound 2 |v1(x, T)| T on the tail past T = t_max before the asymptotic correction.
  double tail_bound(const Vec3 &x) const;
  std::size_t node_count() const { return times_.size(); }
  const std::vector<double> &taus() const { return taus_; }

private:
  std::vector<fundsol::PoleSource> poles_;
  std::vector<double> taus_;
  TimeFourierOptions opts_;
  std::vector<double> times_;
  // -1 left limit, +1 right limit, 0 interior.
  std::vector<int> sides_;
  Eigen::MatrixXcd weights_;
  Eigen::MatrixXd w_re_, w_im_;

  Vec3 sample(const Vec3 &x, std::size_t n) const;
};

/// Single-frequency convenience wrapper.
CVec3 time_fourier(std::span<const fundsol::PoleSource> poles, const Vec3 &x, double tau,
                   const TimeFourierOptions &opts = {});

/// Fills v1-hat(x, tau_j) for every band node.
using SpectralSampler = std::function<void(const Vec3 &, std::span<CVec3>)>;

enum class TransformKind { Quadrature, Analytic };

SpectralSampler make_sampler(std::span<const fundsol::PoleSource> poles, const ModeBand &band,
                             TransformKind kind, const TimeFourierOptions &opts = {});

// ---------------------------------------------------------------------------
// Radial theory

struct LambdaOptions {
  int gl_nodes = 64;
  int laguerre_nodes = 32;
};

/// Values at r of r^{-3/2} I(kr), r^{-1/2} I(kr) and the Lambda kernel
/// lambda(r) (so that Lambda = -l B lambda), each with its r-derivative.
struct KernelValues {
  cplx R, dR;
  cplx S, dS;
  cplx lam, dlam;
};

/// Bessel kernels of one degree l and frequency tau, k = sqrt(i tau).
class RadialKernel {
public:
  RadialKernel(int l, double tau, const LambdaOptions &opts = {});
  KernelValues at(double r) const;
  int degree() const { return l_; }
  double tau() const { return tau_; }
  cplx k() const { return k_; }

private:
  int l_;
  double tau_;
  cplx k_;
  quad::Rule gl_;  // on [0, 1]
  quad::Rule lag_;
};

/// Lambda_lm(r) = -l B lambda(r).
cplx lambda_profile(ModeIndex mode, double tau, cplx B, double r, const LambdaOptions &opts = {});

/// int_0^rho r^j |I_{l+1/2}(sqrt(i tau) r)|^2 dr for j = -1 or 1.
double bessel_normalizer(int l, double tau, double rho, int j, int nodes = 64);

struct RadialConstants {
  cplx Cr;
  cplx C2;
};

/// Projection of sampled c^r, c^(2) at Gauss nodes of (0, rho) onto the Bessel modes.
RadialConstants radial_constants(const quad::Rule &radial, std::span<const cplx> cr_samples,
                                 std::span<const cplx> c2_samples, int l, double tau, cplx B, double rho,
                                 const LambdaOptions &opts = {});

struct ProfileValues {
  cplx cr, dcr;
  cplx c1;
  cplx c2, dc2;
  cplx lambda;
  cplx b, db;
};

struct RadialCoefficients {
  int l = 0;
  int m = 0;
  double tau = 0.0;
  cplx B = 0.0;
  cplx Cr = 0.0;
  cplx C2 = 0.0;
  double rho = 1.0;

  ProfileValues profiles(double r, const LambdaOptions &opts = {}) const;
  cplx b(double r) const;
  cplx lambda(double r, const LambdaOptions &opts = {}) const;
  cplx cr(double r, const LambdaOptions &opts = {}) const;
  cplx c1(double r, const LambdaOptions &opts = {}) const;
  cplx c2(double r, const LambdaOptions &opts = {}) const;
};

/// Profiles from a prebuilt kernel (hot path).
ProfileValues coefficient_profiles(const RadialCoefficients &c, const RadialKernel &kernel, double r);

struct OdeResidual {
  double line1 = 0.0;      // -(r c1)' + c^r = (-i tau r^2 c^r - r^2 b') / mu
  double line2 = 0.0;      // (-(r c1)' + c^r)' = -i tau r c1 - b
  double line3 = 0.0;      // (r^2 c^r)' - mu r c1 = 0
  double c2_line = 0.0;    // -(r c2)'' + (i tau + mu/r^2) r c2 = 0
  double reduced = 0.0;    // -y'' + (i tau + mu/r^2) y = -r^2 b', y = r^2 c^r
  double pressure = 0.0;   // -b'' - 2b'/r + mu b/r^2 = 0
  /// sup |R2 - R1' + (i tau/mu) R3|, the identity linking the three lines.
  double equivalence_gap = 0.0;
};

/// Pointwise-relative residuals (residual over the sum of term magnitudes), sup over the grid.
/// Derivatives of the profiles are taken by sixth-order central differences.
OdeResidual ode_residual(const RadialCoefficients &c, std::span<const double> r_grid,
                         const LambdaOptions &opts = {});

// ---------------------------------------------------------------------------
// Pressure modes

struct PressureModeOptions {
  int radial_nodes = 16;
  double fd_step_fraction = 1e-3;
};

/// B_lm = rho^{-l} int_0^rho <(-i tau v + Delta v) . r_hat, Y_lm>_S(r) dr for one frequency.
cplx pressure_mode(const std::function<CVec3(const Vec3 &)> &vhat, ModeIndex mode, double tau, double rho,
                   const harmonics::SphereQuadrature &quad, const PressureModeOptions &opts = {});

// ---------------------------------------------------------------------------
// Coefficient table and global solution

struct ExtensionOptions {
  double rho = 1.0;
  int n_theta = 24;
  int n_phi = 48;
  int radial_nodes = 64;
  PressureModeOptions pressure;
  LambdaOptions lambda;
};

struct CoefficientTable {
  ModeBand band;
  double rho = 1.0;
  /// Entry (j, l, m) at j * mode_count(L) + flat_index(l, m); l = 0 entries are zero.
  std::vector<RadialCoefficients> entries;
  /// max over radii and frequencies of |c^r_00| / (sqrt(4 pi) max |v1-hat|) on the sphere.
  double cr00_relative = 0.0;

  RadialCoefficients &at(std::size_t j, int l, int m);
  const RadialCoefficients &at(std::size_t j, int l, int m) const;
};

/// Checks that r^{1/2}K, r^{1/2}I have Wronskian 1 for every degree and band node.
void verify_bessel_convention(const ModeBand &band, double rho);

CoefficientTable build_coefficient_table(const SpectralSampler &sampler, const ModeBand &band,
                                         const ExtensionOptions &opts);

class GlobalSolution {
public:
  GlobalSolution(CoefficientTable table, const LambdaOptions &opts = {});

  Vec3 velocity(const Vec3 &x, double t) const;
  double pressure(const Vec3 &x, double t) const;
  /// Velocity and pressure at one point for several times.
  void evaluate_times(const Vec3 &x, std::span<const double> ts, std::span<Vec3> v, std::span<double> q) const;
  /// Complex mode sums at every band node (before the band integral).
  void spectrum(const Vec3 &x, std::span<CVec3> vhat, std::span<cplx> qhat) const;
  /// v2 including its imaginary part, for the real-valuedness check.
  CVec3 velocity_complex(const Vec3 &x, double t) const;

  const CoefficientTable &table() const { return table_; }
  const ModeBand &band() const { return table_.band; }

private:
  CoefficientTable table_;
  std::vector<RadialKernel> kernels_;  // (j, l) at j * (L + 1) + l
};

GlobalSolution assemble_global(CoefficientTable table, const LambdaOptions &opts = {});

// ---------------------------------------------------------------------------
// Reports

struct ReconstructionGrid {
  double rho = 1.0;
  double t_lo = 0.5;
  double t_hi = 4.0;
  int n_t = 36;
};

struct ReconstructionRow {
  int L = 0;
  double tau1 = 0.0, tau2 = 0.0;
  int nodes = 0;
  double sup_err = 0.0;
  double l2_err = 0.0;
  double v1_sup = 0.0;
  double runtime_s = 0.0;
  double relative_sup() const { return v1_sup > 0.0 ? sup_err / v1_sup : sup_err; }
};

/// Points of the error grid: origin plus three shells of 26 directions.
std::vector<Vec3> ball_grid(double rho);

ReconstructionRow reconstruction_report(std::span<const fundsol::PoleSource> poles, const GlobalSolution &sol,
                                        const ReconstructionGrid &grid);

struct PdeCheck {
  double max_div_relative = 0.0;
  double max_stokes_relative = 0.0;
};

/// Fourth-order central differences of v2, q2 at the given points and times.
PdeCheck pde_residual_check(const GlobalSolution &sol, std::span<const Vec3> points, std::span<const double> times,
                            double h = 1e-2, double ht = 1e-3);

struct GrowthCheck {
  double C_velocity = 0.0;
  double C_pressure = 0.0;
  /// Largest ratio over the outer radii divided by the constant fitted on the inner radii.
  double velocity_outer_ratio = 0.0;
  double pressure_outer_ratio = 0.0;
  bool ok() const { return velocity_outer_ratio <= 1.0 && pressure_outer_ratio <= 1.0; }
};

/// Fits C on r <= r_max/2 for |v2| <= C e^{sqrt(tau2) r} and |q2| <= C (1+r)^L,
/// then tests the same constants on r_max/2 < r <= r_max.
GrowthCheck growth_check(const GlobalSolution &sol, double r_max, std::span<const double> times);

} // namespace rst::spectral
