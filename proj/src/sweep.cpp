#include "rst/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/SVD>

#include "rst/parallel.hpp"
#include "rst/quadrature.hpp"

namespace rst::sweep {

void CompactBox::validate() const {
  if (!(t0 > 0.0) || !(t1 >= t0)) throw PreconditionError("CompactBox: need 0 < t0 <= t1");
  if (!(lo.array() <= hi.array()).all() || !lo.allFinite() || !hi.allFinite())
    throw PreconditionError("CompactBox: spatial box must be bounded with lo <= hi");
  if (nx < 2 || ny < 2 || nz < 2 || nt < 2) throw PreconditionError("CompactBox: resolution must be at least 2 per axis");
}

CompactBox CompactBox::refined() const {
  CompactBox k = *this;
  k.nx *= 2, k.ny *= 2, k.nz *= 2, k.nt *= 2;
  return k;
}

bool CompactBox::contains_space(const Vec3 &y) const {
  return (y.array() >= lo.array()).all() && (y.array() <= hi.array()).all();
}

std::vector<fundsol::SpaceTimePoint> grid_points(const CompactBox &K) {
  K.validate();
  const auto xs = quad::linspace(K.lo.x(), K.hi.x(), K.nx);
  const auto ys = quad::linspace(K.lo.y(), K.hi.y(), K.ny);
  const auto zs = quad::linspace(K.lo.z(), K.hi.z(), K.nz);
  const auto ts = quad::linspace(K.t0, K.t1, K.nt);
  std::vector<fundsol::SpaceTimePoint> pts;
  pts.reserve(xs.size() * ys.size() * zs.size() * ts.size());
  for (double t : ts)
    for (double z : zs)
      for (double y : ys)
        for (double x : xs) pts.push_back({Vec3(x, y, z), t});
  return pts;
}

SampleSet sample_target(const VectorField &v, const CompactBox &K) {
  SampleSet s;
  s.points = grid_points(K);
  s.values.resize(s.points.size());
  parallel_for(s.points.size(), [&](std::size_t i) { s.values[i] = v(s.points[i].x, s.points[i].t); });
  return s;
}

double sup_error(const VectorField &a, const VectorField &b, const CompactBox &K) {
  const auto pts = grid_points(K);
  std::vector<double> err(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) { err[i] = (a(pts[i].x, pts[i].t) - b(pts[i].x, pts[i].t)).norm(); });
  return err.empty() ? 0.0 : *std::max_element(err.begin(), err.end());
}

LinearFit solve_regularized(const Eigen::MatrixXd &A, const Eigen::VectorXd &b, const FitOptions &opts) {
  LinearFit fit;
  fit.x = Eigen::VectorXd::Zero(A.cols());
  if (A.cols() == 0) return fit;
  const double maxcol = A.colwise().norm().maxCoeff();
  fit.lambda = opts.lambda < 0.0 ? 1e-10 * maxcol * maxcol : opts.lambda;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd &s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return fit;
  const Eigen::VectorXd utb = svd.matrixU().transpose() * b;
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(s.size());
  double smin = s(0);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) <= opts.cutoff * s(0)) break;
    coef(i) = s(i) / (s(i) * s(i) + fit.lambda) * utb(i);
    smin = s(i);
    ++fit.rank;
  }
  fit.x = svd.matrixV() * coef;
  fit.cond_estimate = s(0) / smin;
  return fit;
}

DictionaryFit fit_dictionary(const VectorField &target, const CompactBox &K,
                             std::span<const fundsol::PoleSource> candidates, const FitOptions &opts) {
  K.validate();
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    const auto &p = candidates[j];
    if (K.contains_space(p.location) && p.time < K.t1)
      throw PreconditionError("fit_dictionary: candidate pole " + std::to_string(j) +
                              " lies inside the sampled space-time box");
  }
  const SampleSet samples = sample_target(target, K);
  const std::size_t n = samples.points.size();
  const std::size_t J = candidates.size();
  Eigen::MatrixXd A(3 * n, 3 * J);
  Eigen::VectorXd b(3 * n);
  parallel_for(n, [&](std::size_t i) {
    const auto &pt = samples.points[i];
    b.segment<3>(3 * i) = samples.values[i];
    for (std::size_t j = 0; j < J; ++j)
      A.block<3, 3>(3 * i, 3 * j) = fundsol::stokes_green(pt.x - candidates[j].location, pt.t - candidates[j].time);
  });

  DictionaryFit fit;
  fit.poles.assign(candidates.begin(), candidates.end());
  for (auto &p : fit.poles) p.strength = Vec3::Zero();
  const LinearFit lf = solve_regularized(A, b, opts);
  fit.weights = lf.x;
  fit.lambda = lf.lambda;
  fit.rank = lf.rank;
  fit.cond_estimate = lf.cond_estimate;
  fit.rank_deficient = lf.rank < static_cast<int>(std::min(A.rows(), A.cols()));

  const Eigen::VectorXd res = b - A * fit.weights;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) ss += res.segment<3>(3 * i).squaredNorm();
  fit.l2_residual = n ? std::sqrt(ss / n) : 0.0;

  const auto merged = fit.merged();
  fit.sup_residual = sup_error(
      target, [&](const Vec3 &x, double t) { return fundsol::stokeslet_field(merged, {x, t}); }, K.refined());
  return fit;
}

std::vector<fundsol::PoleSource> DictionaryFit::merged() const {
  std::vector<fundsol::PoleSource> out = poles;
  for (std::size_t j = 0; j < out.size(); ++j) out[j].strength = weights.segment<3>(3 * j);
  return out;
}

Vec3 DictionaryFit::evaluate(const Vec3 &x, double t) const {
  const auto m = merged();
  return fundsol::stokeslet_field(m, {x, t});
}

std::vector<fundsol::PoleSource> place_poles(const PoleRegion &region, int count, std::uint64_t seed) {
  if (count < 0) throw PreconditionError("place_poles: negative count");
  if (!(region.radius > 0.0) || region.s_hi < region.s_lo) throw PreconditionError("place_poles: invalid region");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double shift[4] = {uni(rng), uni(rng), uni(rng), uni(rng)};
  auto frac = [](double v) { return v - std::floor(v); };
  std::vector<fundsol::PoleSource> poles(count);
  for (int j = 0; j < count; ++j) {
    const std::uint64_t idx = j + 1;
    const double u1 = frac(quad::radical_inverse(idx, 2) + shift[0]);
    const double u2 = frac(quad::radical_inverse(idx, 3) + shift[1]);
    const double u3 = frac(quad::radical_inverse(idx, 5) + shift[2]);
    const double u4 = frac(quad::radical_inverse(idx, 7) + shift[3]);
    const double rad = region.radius * std::cbrt(u1);
    const double ct = 2.0 * u2 - 1.0;
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    const double ph = 2.0 * kPi * u3;
    poles[j].location = region.center + rad * Vec3(st * std::cos(ph), st * std::sin(ph), ct);
    poles[j].time = region.s_lo + (region.s_hi - region.s_lo) * u4;
  }
  return poles;
}

} // namespace rst::sweep
