#pragma once

// Linearization of the simplified (fictitious-force) model about the hanging
// equilibrium, closed-loop state matrices, and a finite-difference check of
// both against the nonlinear equations of motion.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "cablequad/dynamics.hpp"
#include "cablequad/error.hpp"
#include "cablequad/geom.hpp"
#include "cablequad/model.hpp"

namespace cablequad {

/// M xdd + G x = B du, with x = [dx; C^T xi_1; ...; C^T xi_n].
struct LinearModel {
  MatX M;
  MatX G;
  MatX B;
  std::size_t n = 0;

  Eigen::Index dim() const { return static_cast<Eigen::Index>(2 * n + 3); }
};

/// z1' = A z1 + Bbb g(x, x').
struct ClosedLoopModel {
  MatX Abb;
  MatX Bbb;
};

namespace linearize {

/// C = [e1, e2].
inline Eigen::Matrix<double, 3, 2> selector() {
  Eigen::Matrix<double, 3, 2> c = Eigen::Matrix<double, 3, 2>::Zero();
  c(0, 0) = 1.0;
  c(1, 1) = 1.0;
  return c;
}

/// 3x2 placement of a link gain inside K_x, K_xdot and K_z: hat(e3) C.
/// A positive link gain then pushes the quadrotor toward the link
/// deflection q_i - e3, which is what makes the reference gains stabilizing.
inline Eigen::Matrix<double, 3, 2> link_gain_block() { return geom::hat(kE3) * selector(); }

inline Eigen::Index link_index(std::size_t i) { return static_cast<Eigen::Index>(3 + 2 * i); }

/// [k0 I3, k_1 L, ..., k_n L] with L = link_gain_block().
inline MatX gain_matrix(double k0, const std::vector<double>& per_link) {
  const std::size_t n = per_link.size();
  MatX k = MatX::Zero(3, static_cast<Eigen::Index>(2 * n + 3));
  k.leftCols<3>() = k0 * Mat3::Identity();
  for (std::size_t i = 0; i < n; ++i) k.block<3, 2>(0, link_index(i)) = per_link[i] * link_gain_block();
  return k;
}

inline LinearModel build_linear_model(const SystemParams& p) {
  const InertiaCouplings c = inertia_couplings(p);
  const std::size_t n = p.n();
  LinearModel lm;
  lm.n = n;
  const Eigen::Index dim = lm.dim();
  lm.M = MatX::Zero(dim, dim);
  lm.G = MatX::Zero(dim, dim);
  lm.B = MatX::Zero(dim, 3);
  lm.B.topRows<3>() = Mat3::Identity();
  lm.M.topLeftCorner<3, 3>() = c.M00 * Mat3::Identity();
  const Eigen::Matrix<double, 3, 2> e3c = geom::hat(kE3) * selector();
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    lm.M.block<3, 2>(0, link_index(i)) = -c.M0(ii) * e3c;
    lm.M.block<2, 3>(link_index(i), 0) = (-c.M0(ii) * e3c).transpose();
    for (std::size_t j = 0; j < n; ++j) {
      lm.M.block<2, 2>(link_index(i), link_index(j)) =
          c.Mij(ii, static_cast<Eigen::Index>(j)) * Eigen::Matrix2d::Identity();
    }
    lm.G.block<2, 2>(link_index(i), link_index(i)) =
        link_gravity_coefficient(p, i) * Eigen::Matrix2d::Identity();
  }
  return lm;
}

inline ClosedLoopModel closed_loop(const LinearModel& lm, const MatX& Kx, const MatX& Kdx) {
  const Eigen::Index dim = lm.dim();
  if (Kx.rows() != 3 || Kx.cols() != dim || Kdx.rows() != 3 || Kdx.cols() != dim) {
    throw Error(ErrorCode::kInvalidParams, "gain matrices must be 3 x (2n+3)");
  }
  Eigen::PartialPivLU<MatX> lu(lm.M);
  if (!(lu.rcond() > 1e-14)) throw Error(ErrorCode::kSingularMass, "linearized mass matrix is singular");
  const MatX m_inv = lu.inverse();
  ClosedLoopModel cl;
  cl.Abb = MatX::Zero(2 * dim, 2 * dim);
  cl.Abb.topRightCorner(dim, dim) = MatX::Identity(dim, dim);
  cl.Abb.bottomLeftCorner(dim, dim) = -m_inv * (lm.G + lm.B * Kx);
  cl.Abb.bottomRightCorner(dim, dim) = -m_inv * lm.B * Kdx;
  cl.Bbb = MatX::Zero(2 * dim, dim);
  cl.Bbb.bottomRows(dim) = m_inv;
  return cl;
}

/// z1 = [x - xd; C^T (e3 x q_i); v; C^T w_i].
inline VecX lin_state(const SystemState& s, const Vec3& xd) {
  const std::size_t n = s.n();
  const auto dim = static_cast<Eigen::Index>(2 * n + 3);
  const Eigen::Matrix<double, 3, 2> c = selector();
  VecX z(2 * dim);
  z.head<3>() = s.x - xd;
  z.segment<3>(dim) = s.v;
  for (std::size_t i = 0; i < n; ++i) {
    z.segment<2>(link_index(i)) = c.transpose() * kE3.cross(s.q[i]);
    z.segment<2>(dim + link_index(i)) = c.transpose() * s.w[i];
  }
  return z;
}

/// Inverse of lin_state near the hanging equilibrium (links in the lower
/// hemisphere, R = I, Omega = 0).
inline SystemState state_from_lin(const VecX& z, std::size_t n, const Vec3& xd = Vec3::Zero()) {
  const auto dim = static_cast<Eigen::Index>(2 * n + 3);
  SystemState s = SystemState::hanging(n, xd + z.head<3>());
  s.v = z.segment<3>(dim);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d xq = z.segment<2>(link_index(i));
    const Eigen::Vector2d wq = z.segment<2>(dim + link_index(i));
    // e3 x q = (-q2, q1, 0).
    const double q1 = xq(1);
    const double q2 = -xq(0);
    const double q3 = std::sqrt(std::max(0.0, 1.0 - q1 * q1 - q2 * q2));
    s.q[i] = Vec3(q1, q2, q3);
    s.w[i] = Vec3(wq(0), wq(1), -(wq(0) * q1 + wq(1) * q2) / q3);
  }
  return s;
}

/// Time derivative of z1 under the simplified nonlinear model with the
/// fictitious input u = -M00 g e3 - Kx x - Kdx x'.
inline VecX simplified_closed_loop_rhs(const SystemParams& p, const MatX& Kx, const MatX& Kdx, const VecX& z) {
  const std::size_t n = p.n();
  const auto dim = static_cast<Eigen::Index>(2 * n + 3);
  SystemParams nominal = p;
  nominal.delta_x.setZero();
  nominal.delta_R.setZero();
  const SystemState s = state_from_lin(z, n);
  const double m00 = inertia_couplings(p).M00;
  const Vec3 u = -m00 * p.g * kE3 - Kx * z.head(dim) - Kdx * z.tail(dim);
  const Acceleration acc = dynamics::translational_accel_qform(s, u, nominal);

  const Eigen::Matrix<double, 3, 2> c = selector();
  VecX zdot(2 * dim);
  zdot.head<3>() = s.v;
  zdot.segment<3>(dim) = acc.xdd;
  for (std::size_t i = 0; i < n; ++i) {
    zdot.segment<2>(link_index(i)) = c.transpose() * kE3.cross(s.w[i].cross(s.q[i]));
    zdot.segment<2>(dim + link_index(i)) = c.transpose() * acc.wd[i];
  }
  return zdot;
}

/// Central-difference Jacobian of simplified_closed_loop_rhs at z1 = 0.
inline MatX fd_closed_loop_jacobian(const SystemParams& p, const MatX& Kx, const MatX& Kdx, double eps) {
  const auto size = static_cast<Eigen::Index>(4 * p.n() + 6);
  MatX jac(size, size);
  for (Eigen::Index k = 0; k < size; ++k) {
    VecX zp = VecX::Zero(size);
    VecX zm = VecX::Zero(size);
    zp(k) = eps;
    zm(k) = -eps;
    jac.col(k) = (simplified_closed_loop_rhs(p, Kx, Kdx, zp) - simplified_closed_loop_rhs(p, Kx, Kdx, zm)) /
                 (2.0 * eps);
  }
  return jac;
}

/// Max over columns of ||J_fd(:,k) - A(:,k)|| / max(||A(:,k)||, 1).
inline double fd_jacobian_check(const SystemParams& p, const MatX& Kx, const MatX& Kdx, double eps) {
  if (!(eps >= 1e-8 && eps <= 1e-4)) {
    throw Error(ErrorCode::kInvalidParams, "finite-difference step must lie in [1e-8, 1e-4]");
  }
  const ClosedLoopModel cl = closed_loop(build_linear_model(p), Kx, Kdx);
  const MatX jac = fd_closed_loop_jacobian(p, Kx, Kdx, eps);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < jac.cols(); ++k) {
    const double denom = std::max(cl.Abb.col(k).norm(), 1.0);
    worst = std::max(worst, (jac.col(k) - cl.Abb.col(k)).norm() / denom);
  }
  return worst;
}

}  // namespace linearize
}  // namespace cablequad
