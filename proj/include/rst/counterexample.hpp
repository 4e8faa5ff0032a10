#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rst/sweep.hpp"

namespace rst::counterexample {

/// Decreasing C-infinity profile: 2 for t <= 2, eps0 for t >= 3.
class CProfile {
public:
  explicit CProfile(double eps0);
  double eps0() const { return eps0_; }
  double value(double t) const;
  double derivative(double t) const;

private:
  double eps0_;
};

CProfile make_c_profile(double eps0);

/// Polynomial in (x1, x2, x3) with real coefficients, kept as a list of monomials.
class HarmonicPolynomial {
public:
  struct Term {
    double coef;
    std::array<int, 3> power;
  };

  HarmonicPolynomial() = default;
  explicit HarmonicPolynomial(std::vector<Term> terms, std::string name = "");

  static HarmonicPolynomial coordinate(int axis);  // x^{axis+1}
  static HarmonicPolynomial product12();           // x1 x2
  static HarmonicPolynomial radius_squared();      // |x|^2, not harmonic
  /// Built-in harmonic catalog used by the checks.
  static std::vector<HarmonicPolynomial> catalog();

  const std::string &name() const { return name_; }
  const std::vector<Term> &terms() const { return terms_; }
  double value(const Vec3 &x) const;
  Vec3 gradient(const Vec3 &x) const;
  HarmonicPolynomial derivative(int axis) const;
  /// Exact Laplacian, with like monomials collected and zeros dropped.
  HarmonicPolynomial laplacian() const;
  bool is_zero() const { return terms_.empty(); }
  bool is_harmonic() const { return laplacian().is_zero(); }

private:
  std::vector<Term> terms_;
  std::string name_;
};

/// v = c(t) grad h, q = -c'(t) h.
struct ParasiticSolution {
  CProfile c;
  HarmonicPolynomial h;
  Vec3 velocity(const Vec3 &x, double t) const { return c.value(t) * h.gradient(x); }
  double pressure(const Vec3 &x, double t) const { return -c.derivative(t) * h.value(x); }
};

/// Throws PreconditionError naming the Laplacian when h is not harmonic.
ParasiticSolution parasitic(const CProfile &c, const HarmonicPolynomial &h);

/// |d_t v - Delta v + grad q| by fourth-order central differences with steps hx in space and ht in time.
double stokes_residual_fd(const ParasiticSolution &s, const Vec3 &x, double t, double hx = 1e-2, double ht = 2e-4);

/// K = [-2,2]^3 x [1,3] with inner cube K~ = [-1,1]^3 sampled at t = 2 and t = 3.
struct HarnackCylinder {
  Vec3 outer_lo = Vec3::Constant(-2.0), outer_hi = Vec3::Constant(2.0);
  double t_lo = 1.0, t_hi = 3.0;
  Vec3 inner_lo = Vec3::Constant(-1.0), inner_hi = Vec3::Constant(1.0);
  double t_early = 2.0, t_late = 3.0;
  int n_inner = 9;

  void validate() const;
  std::vector<Vec3> inner_grid() const;
  sweep::CompactBox outer_box(int n_space, int n_time) const;
};

using ScalarField = std::function<double(const Vec3 &, double)>;

struct HarnackRatio {
  double sup_early = 0.0;
  double inf_late = 0.0;
  /// +inf when inf_late <= 0.
  double ratio = 0.0;
  /// Relative heat-equation FD residual on the cylinder, reported only.
  double caloric_residual = 0.0;
};

HarnackRatio harnack_ratio(const ScalarField &w, const HarnackCylinder &cyl);

/// max |d_t w - Delta w| / (|d_t w| + |Delta w|) over the points, fourth-order differences.
double caloric_residual(const ScalarField &w, const std::vector<sweep::CompactBox> &boxes, double h = 1e-3);
double caloric_residual(const ScalarField &w, const std::vector<fundsol::SpaceTimePoint> &pts, double h = 1e-3);

struct HeatSource {
  Vec3 x0 = Vec3::Zero();
  double t0 = 0.0;
  double value(const Vec3 &x, double t) const;
  Vec3 gradient(const Vec3 &x, double t) const;
};

/// Deterministic catalog of heat-kernel sources firing before the cylinder.
std::vector<HeatSource> harnack_source_catalog(int count = 64);

struct C0Estimate {
  double C0_hat = 0.0;
  std::vector<double> ratios;
  std::vector<double> running_max;
};

C0Estimate estimate_C0(const std::vector<HeatSource> &catalog, const HarnackCylinder &cyl);

/// Divergence-free caloric field grad(psi) x e_axis for a heat kernel psi.
struct CurlPair {
  HeatSource source;
  int axis = 0;
  Vec3 value(const Vec3 &x, double t) const;
};

/// Curl pairs with sources at t0 < 0; the first n of a longer list are the same fields.
std::vector<CurlPair> curl_pair_dictionary(int count, std::uint64_t seed);

struct DictionaryEntry {
  std::string name;
  sweep::VectorField field;
};

struct ExperimentRow {
  int J = 0;
  int used = 0;
  int excluded = 0;
  /// Sup error of the least-squares fit on the refined grid.
  double sup_error = 0.0;
  /// Certified lower bound on the best sup error over the fit grid.
  double lower_bound = 0.0;
  double epsilon = 0.0;
  double C0_hat = 0.0;
  bool pass = false;
};

struct ContradictionCheck {
  double distance = 0.0;
  double sup_early = 0.0;
  double inf_late = 0.0;
  bool within_epsilon = false;
  bool sup_above_three_halves = false;
  bool inf_below_inverse_C0 = false;
  /// Harnack would force sup_early <= C0 inf_late < 1 < 3/2 < sup_early.
  bool contradiction = false;
};

/// Evaluates the chain for a candidate u against the witness v.
ContradictionCheck contradiction_chain(const sweep::VectorField &u, const ParasiticSolution &v,
                                       const HarnackCylinder &cyl, double C0_hat, double epsilon,
                                       int n_space = 9, int n_time = 9);

struct ExperimentOptions {
  std::vector<int> sizes{8, 32, 128};
  std::uint64_t seed = 1;
  int n_space = 5;
  int n_time = 9;
  int catalog_size = 64;
  int synthetic_candidates = 8;
  int lawson_iterations = 60;
  double caloric_tolerance = 1e-4;
};

struct TheoremBReport {
  double C0_hat = 0.0;
  double eps0 = 0.0;
  double epsilon = 0.0;
  double empty_dictionary_error = 0.0;
  bool witness_excluded = false;
  std::vector<std::string> notices;
  std::vector<ExperimentRow> rows;
  std::vector<ContradictionCheck> synthetic;
  bool all_pass() const;
};

/// Fit of v on the cylinder by a dictionary; entries failing the caloric check are dropped with a notice.
ExperimentRow fit_caloric_dictionary(const ParasiticSolution &v, const std::vector<DictionaryEntry> &dictionary,
                                     const HarnackCylinder &cyl, double C0_hat, double epsilon,
                                     const ExperimentOptions &opts, std::vector<std::string> *notices = nullptr);

TheoremBReport theoremB_experiment(const ExperimentOptions &opts = {});

} // namespace rst::counterexample
