#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace t2inv {

inline constexpr const char* kVersion = "0.3.0";

using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad labels, bad grids, unknown names, corrupt fields.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A metric that should be positive definite is not (or is degenerate).
class DegenerateMetric : public Error {
 public:
  using Error::Error;
};

/// A numerical solver failed to converge or hit a singular system.
class SolverError : public Error {
 public:
  using Error::Error;
};

template <class E = InvalidInput>
inline void require(bool cond, const std::string& what) {
  if (!cond) throw E(what);
}

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace t2inv
