#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "rst/spectral.hpp"

namespace rst::spectral {

ModeBand ModeBand::gauss_legendre(int L, double tau1, double tau2, int nodes_per_sign) {
  ModeBand b;
  b.L = L;
  b.tau1 = tau1;
  b.tau2 = tau2;
  if (nodes_per_sign < 8) throw PreconditionError("ModeBand: at least 8 nodes per sign are required");
  if (!(tau1 > 0.0) || !(tau2 > tau1) || !std::isfinite(tau2))
    throw PreconditionError("ModeBand: need 0 < tau1 < tau2 < inf");
  const quad::Rule r = quad::gauss_legendre(nodes_per_sign, tau1, tau2);
  b.nodes = r.nodes;
  b.weights = r.weights;
  b.validate();
  return b;
}

void ModeBand::validate() const {
  if (L < 0 || L > harmonics::kMaxDegree) throw PreconditionError("ModeBand: L out of range [0, 32]");
  if (!(tau1 > 0.0) || !(tau2 > tau1) || !std::isfinite(tau2))
    throw PreconditionError("ModeBand: need 0 < tau1 < tau2 < inf");
  if (nodes.size() < 8 || nodes.size() != weights.size())
    throw PreconditionError("ModeBand: at least 8 nodes per sign are required");
}

namespace {

// int_0^h (1 - u/h) e^{cu} du and int_0^h (u/h) e^{cu} du with c = -i tau.
void filon_pair(double tau, double h, cplx &alpha, cplx &beta) {
  const cplx z(0.0, -tau * h);
  cplx e0, e1;  // (e^z - 1)/z and e^z/z - (e^z - 1)/z^2
  if (std::abs(z) < 0.5) {
    e0 = 0.0, e1 = 0.0;
    cplx zk = 1.0;
    double fact = 1.0;  // (k+1)!
    for (int k = 0; k < 20; ++k) {
      fact *= (k + 1);
      e0 += zk / fact;
      e1 += zk * (k + 1.0) / (fact * (k + 2));
      zk *= z;
    }
  } else {
    const cplx ez = std::exp(z);
    e0 = (ez - 1.0) / z;
    e1 = ez / z - (ez - 1.0) / (z * z);
  }
  beta = h * e1;
  alpha = h * e0 - beta;
}

// int_T^inf t^{-3/2} e^{-i tau t} dt along t = T - i u / tau, where the factor decays like e^{-u}.
cplx power_tail(double tau, double T) {
  static const quad::Rule lag = quad::gauss_laguerre(48);
  const cplx dir(0.0, -1.0 / tau);
  cplx acc = 0.0;
  for (std::size_t q = 0; q < lag.size(); ++q) acc += lag.weights[q] * std::pow(T + dir * lag.nodes[q], -1.5);
  return acc * dir * std::polar(1.0, -tau * T);
}

} // namespace

TimeFourierTransform::TimeFourierTransform(std::vector<fundsol::PoleSource> poles, std::vector<double> taus,
                                           const TimeFourierOptions &opts)
    : poles_(std::move(poles)), taus_(std::move(taus)), opts_(opts) {
  if (!(opts.t_max > 0.0) || opts.n_t < 16 || !(opts.grading >= 1.0))
    throw PreconditionError("time transform: need t_max > 0, n_t >= 16, grading >= 1");
  std::vector<double> starts;
  for (const auto &p : poles_)
    if (p.time < opts.t_max) starts.push_back(std::max(p.time, -opts.t_max));
  std::sort(starts.begin(), starts.end());
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());

  struct Segment {
    double a, b;
    int n;
  };
  std::vector<Segment> segs;
  if (!starts.empty()) {
    const double total = opts.t_max - starts.front();
    int used = 0;
    for (std::size_t i = 0; i + 1 < starts.size(); ++i) {
      const double len = starts[i + 1] - starts[i];
      const int n = std::max(32, static_cast<int>(opts.n_t * len / total));
      segs.push_back({starts[i], starts[i + 1], n});
      used += n;
    }
    segs.push_back({starts.back(), opts.t_max, std::max(32, opts.n_t - used)});
  }

  std::vector<std::pair<std::size_t, std::size_t>> intervals;
  for (const Segment &s : segs) {
    const std::size_t first = times_.size();
    for (int i = 0; i < s.n; ++i) {
      const double u = static_cast<double>(i) / (s.n - 1);
      times_.push_back(s.a + (s.b - s.a) * std::pow(u, opts.grading));
      sides_.push_back(i == 0 ? 1 : (i == s.n - 1 ? -1 : 0));
    }
    for (int i = 0; i + 1 < s.n; ++i) intervals.emplace_back(first + i, first + i + 1);
  }

  weights_ = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(taus_.size()), static_cast<Eigen::Index>(times_.size()));
  for (std::size_t j = 0; j < taus_.size(); ++j) {
    const double tau = taus_[j];
    for (const auto &[i0, i1] : intervals) {
      const double h = times_[i1] - times_[i0];
      cplx alpha, beta;
      filon_pair(tau, h, alpha, beta);
      const cplx phase = std::polar(1.0, -tau * times_[i0]);
      weights_(j, i0) += phase * alpha;
      weights_(j, i1) += phase * beta;
    }
    if (opts.tail_correction && !times_.empty() && tau != 0.0) {
      const double T = times_.back();
      weights_(j, static_cast<Eigen::Index>(times_.size() - 1)) += std::pow(T, 1.5) * power_tail(tau, T);
    }
  }
  w_re_ = weights_.real();
  w_im_ = weights_.imag();
}

Vec3 TimeFourierTransform::sample(const Vec3 &x, std::size_t n) const {
  const double t = times_[n];
  Vec3 v = Vec3::Zero();
  for (const auto &p : poles_) {
    const double dt = t - p.time;
    if (dt > 0.0 || (dt == 0.0 && sides_[n] == 1))
      v += fundsol::stokes_green(x - p.location, std::max(dt, 1e-300)) * p.strength;
  }
  return v;
}

void TimeFourierTransform::transform(const Vec3 &x, std::span<CVec3> out) const {
  if (out.size() != taus_.size()) throw PreconditionError("time transform: output size mismatch");
  for (const auto &p : poles_)
    if ((x - p.location).norm() < fundsol::kPoleGuard) throw SingularInputError("time transform at a pole");
  const Eigen::Index n = static_cast<Eigen::Index>(times_.size());
  thread_local Eigen::MatrixXd V;
  V.resize(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) V.row(i) = sample(x, static_cast<std::size_t>(i)).transpose();
  const Eigen::MatrixXd re = w_re_ * V;
  const Eigen::MatrixXd im = w_im_ * V;
  for (std::size_t j = 0; j < taus_.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    for (int c = 0; c < 3; ++c) out[j](c) = cplx(re(jj, c), im(jj, c));
  }
}

std::vector<CVec3> TimeFourierTransform::transform(const Vec3 &x) const {
  std::vector<CVec3> out(taus_.size());
  transform(x, out);
  return out;
}

double TimeFourierTransform::tail_bound(const Vec3 &x) const {
  const double T = opts_.t_max;
  return 2.0 * fundsol::stokeslet_field(poles_, {x, T}).norm() * T;
}

CVec3 time_fourier(std::span<const fundsol::PoleSource> poles, const Vec3 &x, double tau,
                   const TimeFourierOptions &opts) {
  TimeFourierTransform tf(std::vector<fundsol::PoleSource>(poles.begin(), poles.end()), {tau}, opts);
  return tf.transform(x)[0];
}

SpectralSampler make_sampler(std::span<const fundsol::PoleSource> poles, const ModeBand &band, TransformKind kind,
                             const TimeFourierOptions &opts) {
  std::vector<fundsol::PoleSource> p(poles.begin(), poles.end());
  if (kind == TransformKind::Analytic) {
    std::vector<double> taus = band.nodes;
    return [p = std::move(p), taus = std::move(taus)](const Vec3 &x, std::span<CVec3> out) {
      for (std::size_t j = 0; j < taus.size(); ++j) out[j] = fundsol::stokeslet_transform(p, x, taus[j]);
    };
  }
  auto tf = std::make_shared<TimeFourierTransform>(std::move(p), band.nodes, opts);
  return [tf](const Vec3 &x, std::span<CVec3> out) { tf->transform(x, out); };
}

} // namespace rst::spectral
