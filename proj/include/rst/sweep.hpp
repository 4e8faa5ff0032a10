#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rst/fundsol.hpp"

namespace rst::sweep {

using VectorField = std::function<Vec3(const Vec3 &, double)>;

/// Axis-aligned box [lo, hi] times [t0, t1] with a sampling resolution per axis.
struct CompactBox {
  Vec3 lo = Vec3::Constant(-1.0);
  Vec3 hi = Vec3::Constant(1.0);
  double t0 = 1.0;
  double t1 = 2.0;
  int nx = 5, ny = 5, nz = 5, nt = 5;

  void validate() const;
  /// Same box with every resolution doubled.
  CompactBox refined() const;
  bool contains_space(const Vec3 &y) const;
};

struct SampleSet {
  std::vector<fundsol::SpaceTimePoint> points;
  std::vector<Vec3> values;
};

/// Tensor-product grid, time slowest and x fastest.
std::vector<fundsol::SpaceTimePoint> grid_points(const CompactBox &K);

SampleSet sample_target(const VectorField &v, const CompactBox &K);

/// Max over the grid of |a - b| in the Euclidean norm.
double sup_error(const VectorField &a, const VectorField &b, const CompactBox &K);

struct FitOptions {
  /// Tikhonov weight; negative selects 1e-10 * (largest column norm)^2.
  double lambda = -1.0;
  /// Singular values below cutoff * sigma_max are dropped.
  double cutoff = 1e-12;
};

struct DictionaryFit {
  /// Candidate locations with unit strengths; weights are grouped by pole (e1, e2, e3).
  std::vector<fundsol::PoleSource> poles;
  Eigen::VectorXd weights;
  double lambda = 0.0;
  int rank = 0;
  bool rank_deficient = false;
  double cond_estimate = 0.0;
  /// Root mean square of the pointwise Euclidean residual on the fit grid.
  double l2_residual = 0.0;
  /// Max pointwise residual on the doubled verification grid.
  double sup_residual = 0.0;

  /// Fitted poles with the weights folded into their strengths.
  std::vector<fundsol::PoleSource> merged() const;
  Vec3 evaluate(const Vec3 &x, double t) const;
};

/// Least-squares fit of the target on K by Stokeslet columns at the candidate poles.
DictionaryFit fit_dictionary(const VectorField &target, const CompactBox &K,
                             std::span<const fundsol::PoleSource> candidates, const FitOptions &opts = {});

/// Ball of candidate locations with a firing-time interval.
struct PoleRegion {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  double s_lo = 0.0;
  double s_hi = 0.0;
};

/// Low-discrepancy points in the region; the first n of a larger call are the same points.
std::vector<fundsol::PoleSource> place_poles(const PoleRegion &region, int count, std::uint64_t seed);

/// Dense least-squares solve shared with other dictionary fits.
struct LinearFit {
  Eigen::VectorXd x;
  double lambda = 0.0;
  int rank = 0;
  double cond_estimate = 0.0;
};
LinearFit solve_regularized(const Eigen::MatrixXd &A, const Eigen::VectorXd &b, const FitOptions &opts);

} // namespace rst::sweep
