#pragma once

// Equations of motion of the quadrotor with an n-link cable, in the
// link-acceleration (q-double-dot) form and the link angular-acceleration
// (omega-dot) form, plus a fixed-step RK4 integrator.

#include <cstddef>
#include <tuple>
#include <vector>

#include "cablequad/error.hpp"
#include "cablequad/geom.hpp"
#include "cablequad/model.hpp"

namespace cablequad {

struct ControlInput {
  double f = 0.0;          // total thrust magnitude [N]
  Vec3 M = Vec3::Zero();   // body moment [N m]
};

struct Acceleration {
  Vec3 xdd = Vec3::Zero();
  std::vector<Vec3> qdd;
  std::vector<Vec3> wd;
  Vec3 Omega_dot = Vec3::Zero();
};

namespace dynamics {

inline constexpr double kMaxCondition = 1e12;

/// Thrust vector -f R e3 plus the translational disturbance.
inline Vec3 applied_force(const SystemState& s, const ControlInput& u, const SystemParams& p) {
  return -u.f * s.R * kE3 + p.delta_x;
}

inline Eigen::Index block(std::size_t i) { return static_cast<Eigen::Index>(3 + 3 * i); }

/// Block matrix acting on (xdd, qdd_1..qdd_n).
inline MatX qform_matrix(const SystemState& s, const InertiaCouplings& c) {
  const std::size_t n = s.n();
  const auto dim = static_cast<Eigen::Index>(3 + 3 * n);
  MatX a = MatX::Zero(dim, dim);
  a.topLeftCorner<3, 3>() = c.M00 * Mat3::Identity();
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const Mat3 qh2 = geom::hat(s.q[i]) * geom::hat(s.q[i]);
    a.block<3, 3>(0, block(i)) = c.M0(ii) * Mat3::Identity();
    a.block<3, 3>(block(i), 0) = -c.M0(ii) * qh2;
    for (std::size_t j = 0; j < n; ++j) {
      const double mij = c.Mij(ii, static_cast<Eigen::Index>(j));
      a.block<3, 3>(block(i), block(j)) = (i == j) ? Mat3(mij * Mat3::Identity()) : Mat3(-mij * qh2);
    }
  }
  return a;
}

inline VecX qform_rhs(const SystemState& s, const Vec3& force, const SystemParams& p,
                      const InertiaCouplings& c) {
  const std::size_t n = s.n();
  VecX b(static_cast<Eigen::Index>(3 + 3 * n));
  b.head<3>() = force + c.M00 * p.g * kE3;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const Mat3 qh = geom::hat(s.q[i]);
    const Vec3 qdot = s.w[i].cross(s.q[i]);
    b.segment<3>(block(i)) = -qdot.squaredNorm() * c.Mij(ii, ii) * s.q[i] -
                             link_gravity_coefficient(p, i) * qh * qh * kE3;
  }
  return b;
}

/// Symmetric block matrix acting on (xdd, wd_1..wd_n).
inline MatX wform_matrix(const SystemState& s, const InertiaCouplings& c) {
  const std::size_t n = s.n();
  const auto dim = static_cast<Eigen::Index>(3 + 3 * n);
  MatX a = MatX::Zero(dim, dim);
  a.topLeftCorner<3, 3>() = c.M00 * Mat3::Identity();
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const Mat3 qi = geom::hat(s.q[i]);
    a.block<3, 3>(0, block(i)) = -c.M0(ii) * qi;
    a.block<3, 3>(block(i), 0) = c.M0(ii) * qi;
    for (std::size_t j = 0; j < n; ++j) {
      const double mij = c.Mij(ii, static_cast<Eigen::Index>(j));
      a.block<3, 3>(block(i), block(j)) =
          (i == j) ? Mat3(mij * Mat3::Identity()) : Mat3(-mij * qi * geom::hat(s.q[j]));
    }
  }
  return a;
}

inline VecX wform_rhs(const SystemState& s, const Vec3& force, const SystemParams& p,
                      const InertiaCouplings& c) {
  const std::size_t n = s.n();
  VecX b(static_cast<Eigen::Index>(3 + 3 * n));
  Vec3 top = force + c.M00 * p.g * kE3;
  for (std::size_t j = 0; j < n; ++j) {
    top += c.M0(static_cast<Eigen::Index>(j)) * s.w[j].squaredNorm() * s.q[j];
  }
  b.head<3>() = top;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const Mat3 qi = geom::hat(s.q[i]);
    Vec3 row = link_gravity_coefficient(p, i) * qi * kE3;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      row += c.Mij(ii, static_cast<Eigen::Index>(j)) * s.w[j].squaredNorm() * qi * s.q[j];
    }
    b.segment<3>(block(i)) = row;
  }
  return b;
}

/// Dense LU solve; throws SingularSystem when the condition estimate exceeds 1e12.
inline VecX solve_dense(const MatX& a, const VecX& b) {
  Eigen::PartialPivLU<MatX> lu(a);
  const double rcond = lu.rcond();
  if (!(rcond * kMaxCondition > 1.0)) {
    throw Error(ErrorCode::kSingularSystem, "equations of motion are rank deficient");
  }
  return lu.solve(b);
}

/// Translational and link accelerations from the q-double-dot form under a
/// given applied translational force (excluding gravity).
inline Acceleration translational_accel_qform(const SystemState& s, const Vec3& force,
                                              const SystemParams& p) {
  const InertiaCouplings c = inertia_couplings(p);
  const VecX sol = solve_dense(qform_matrix(s, c), qform_rhs(s, force, p, c));
  Acceleration acc;
  acc.xdd = sol.head<3>();
  acc.qdd.resize(s.n());
  acc.wd.resize(s.n());
  for (std::size_t i = 0; i < s.n(); ++i) {
    acc.qdd[i] = sol.segment<3>(block(i));
    // qdd = -hat(q) wd - |w|^2 q with wd orthogonal to q, so wd = q x qdd.
    acc.wd[i] = s.q[i].cross(acc.qdd[i]);
  }
  return acc;
}

inline Acceleration translational_accel_wform(const SystemState& s, const Vec3& force,
                                              const SystemParams& p) {
  const InertiaCouplings c = inertia_couplings(p);
  const VecX sol = solve_dense(wform_matrix(s, c), wform_rhs(s, force, p, c));
  Acceleration acc;
  acc.xdd = sol.head<3>();
  acc.qdd.resize(s.n());
  acc.wd.resize(s.n());
  for (std::size_t i = 0; i < s.n(); ++i) {
    acc.wd[i] = sol.segment<3>(block(i));
    acc.qdd[i] = -geom::hat(s.q[i]) * acc.wd[i] - s.w[i].squaredNorm() * s.q[i];
  }
  return acc;
}

/// Omega_dot = J^{-1} (M + Delta_R - Omega x J Omega).
inline Vec3 attitude_accel(const SystemState& s, const ControlInput& u, const SystemParams& p) {
  return p.J.ldlt().solve(u.M + p.delta_R - s.Omega.cross(p.J * s.Omega));
}

inline Acceleration solve_accel_qform(const SystemState& s, const ControlInput& u, const SystemParams& p) {
  Acceleration acc = translational_accel_qform(s, applied_force(s, u, p), p);
  acc.Omega_dot = attitude_accel(s, u, p);
  return acc;
}

inline Acceleration solve_accel_wform(const SystemState& s, const ControlInput& u, const SystemParams& p) {
  Acceleration acc = translational_accel_wform(s, applied_force(s, u, p), p);
  acc.Omega_dot = attitude_accel(s, u, p);
  return acc;
}

struct StateDerivative {
  Vec3 dx;
  Vec3 dv;
  Mat3 dR;
  Vec3 dOmega;
  std::vector<Vec3> dq;
  std::vector<Vec3> dw;
};

inline StateDerivative derivative(const SystemState& s, const ControlInput& u, const SystemParams& p) {
  const Acceleration acc = solve_accel_qform(s, u, p);
  StateDerivative d;
  d.dx = s.v;
  d.dv = acc.xdd;
  d.dR = s.R * geom::hat(s.Omega);
  d.dOmega = acc.Omega_dot;
  d.dq.resize(s.n());
  for (std::size_t i = 0; i < s.n(); ++i) d.dq[i] = s.w[i].cross(s.q[i]);
  d.dw = acc.wd;
  return d;
}

/// s + h * d, componentwise, without any projection.
inline SystemState euler_update(const SystemState& s, const StateDerivative& d, double h) {
  SystemState out = s;
  out.x += h * d.dx;
  out.v += h * d.dv;
  out.R += h * d.dR;
  out.Omega += h * d.dOmega;
  for (std::size_t i = 0; i < s.n(); ++i) {
    out.q[i] += h * d.dq[i];
    out.w[i] += h * d.dw[i];
  }
  return out;
}

/// Restores ||q_i|| = 1, q_i . w_i = 0 and R in SO(3).
inline void project_to_manifold(SystemState& s) {
  for (std::size_t i = 0; i < s.n(); ++i) {
    std::tie(s.q[i], s.w[i]) = geom::renormalize(s.q[i], s.w[i]);
  }
  s.R = geom::orthonormalize(s.R);
}

/// Classical RK4 step with the input held constant, followed by projection.
inline SystemState rk4_step(const SystemState& s, const ControlInput& u, const SystemParams& p, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidParams, "time step must be positive");
  const StateDerivative k1 = derivative(s, u, p);
  const StateDerivative k2 = derivative(euler_update(s, k1, 0.5 * dt), u, p);
  const StateDerivative k3 = derivative(euler_update(s, k2, 0.5 * dt), u, p);
  const StateDerivative k4 = derivative(euler_update(s, k3, dt), u, p);

  SystemState out = s;
  const double w = dt / 6.0;
  out.x += w * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
  out.v += w * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
  out.R += w * (k1.dR + 2.0 * k2.dR + 2.0 * k3.dR + k4.dR);
  out.Omega += w * (k1.dOmega + 2.0 * k2.dOmega + 2.0 * k3.dOmega + k4.dOmega);
  for (std::size_t i = 0; i < s.n(); ++i) {
    out.q[i] += w * (k1.dq[i] + 2.0 * k2.dq[i] + 2.0 * k3.dq[i] + k4.dq[i]);
    out.w[i] += w * (k1.dw[i] + 2.0 * k2.dw[i] + 2.0 * k3.dw[i] + k4.dw[i]);
  }
  project_to_manifold(out);
  return out;
}

}  // namespace dynamics
}  // namespace cablequad
