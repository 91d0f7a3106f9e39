#pragma once

// Primitives on SO(3) and the two-sphere.

#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "cablequad/error.hpp"

namespace cablequad {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline const Vec3 kE1 = Vec3::UnitX();
inline const Vec3 kE2 = Vec3::UnitY();
inline const Vec3 kE3 = Vec3::UnitZ();

namespace geom {

inline constexpr double kRotationTolerance = 1e-10;
inline constexpr double kUnitTolerance = 1e-12;
inline constexpr double kSkewTolerance = 1e-8;
inline constexpr double kMinNorm = 1e-6;

/// Skew-symmetric matrix with hat(v) * w == v.cross(w).
inline Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

/// Inverse of hat. Throws NotSkewSymmetric when ||m + m^T|| >= 1e-8.
inline Vec3 vee(const Mat3& m) {
  if ((m + m.transpose()).norm() >= kSkewTolerance) {
    throw Error(ErrorCode::kNotSkewSymmetric, "vee() requires a skew-symmetric matrix");
  }
  return Vec3(m(2, 1), m(0, 2), m(1, 0));
}

/// vee of the skew part, for matrices that are only approximately skew.
inline Vec3 vee_skew_part(const Mat3& m) { return vee(0.5 * (m - m.transpose())); }

/// Rodrigues formula; uses the Taylor expansion below 1e-6 rad.
inline Mat3 exp_so3(const Vec3& v) {
  const double theta = v.norm();
  const Mat3 k = hat(v);
  double a = 0.0;
  double b = 0.0;
  if (theta < 1e-6) {
    const double t2 = theta * theta;
    a = 1.0 - t2 / 6.0;
    b = 0.5 - t2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
  }
  return Mat3::Identity() + a * k + b * k * k;
}

inline bool is_rotation(const Mat3& r, double tol = kRotationTolerance) {
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() < tol &&
         std::abs(r.determinant() - 1.0) < tol;
}

inline bool is_unit(const Vec3& q, double tol = kUnitTolerance) {
  return std::abs(q.norm() - 1.0) < tol;
}

/// Projects (q, w) back onto {||q|| = 1, q . w = 0}.
inline std::pair<Vec3, Vec3> renormalize(const Vec3& q, const Vec3& w) {
  const double norm = q.norm();
  if (!(norm > kMinNorm)) {
    throw Error(ErrorCode::kDegenerateVector, "cannot normalize a vector of norm <= 1e-6");
  }
  const Vec3 q_out = q / norm;
  Vec3 w_out = w - q_out.dot(w) * q_out;
  w_out -= q_out.dot(w_out) * q_out;  // second pass removes cancellation error
  return {q_out, w_out};
}

/// Nearest rotation in the Frobenius sense (polar factor), determinant kept at +1.
inline Mat3 orthonormalize(const Mat3& r) {
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) {
    u.col(2) *= -1.0;
  }
  return u * v.transpose();
}

/// Rotation of `angle` radians about the unit `axis`.
inline Mat3 axis_angle(const Vec3& axis, double angle) { return exp_so3(axis.normalized() * angle); }

}  // namespace geom
}  // namespace cablequad
