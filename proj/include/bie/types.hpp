#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace bie {

using Vec2 = Eigen::Vector2d;
using Complex = std::complex<double>;

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;
// Euler-Mascheroni constant, used in the small-argument Hankel split.
inline constexpr double kEulerGamma = 0.577215664901532860606512090082402431;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class InvalidCurveError : public Error {
 public:
  using Error::Error;
};
class PlanError : public Error {
 public:
  using Error::Error;
};
class GeometryMismatchError : public Error {
 public:
  using Error::Error;
};
class SingularityError : public Error {
 public:
  using Error::Error;
};
class SpecialFunctionError : public Error {
 public:
  using Error::Error;
};
class NearEvaluationError : public Error {
 public:
  using Error::Error;
};
class DimensionError : public Error {
 public:
  using Error::Error;
};
class SolverSingularError : public Error {
 public:
  using Error::Error;
};
class FormulationBreakdownError : public Error {
 public:
  using Error::Error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace bie
