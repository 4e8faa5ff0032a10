#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rst {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3d;
using CMat3 = Eigen::Matrix3cd;

inline constexpr double kPi = std::numbers::pi;

// Argument on (-inf, 0] where the principal branch is undefined.
class BranchCutError : public std::domain_error {
public:
  explicit BranchCutError(const std::string &what) : std::domain_error(what) {}
};

// Evaluation at a singular point (a pole, the origin).
class SingularInputError : public std::domain_error {
public:
  explicit SingularInputError(const std::string &what) : std::domain_error(what) {}
};

class PreconditionError : public std::invalid_argument {
public:
  explicit PreconditionError(const std::string &what) : std::invalid_argument(what) {}
};

class ConvergenceError : public std::runtime_error {
public:
  explicit ConvergenceError(const std::string &what) : std::runtime_error(what) {}
};

} // namespace rst
