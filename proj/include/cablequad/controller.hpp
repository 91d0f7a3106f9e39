#pragma once

// Geometric controller: ideal thrust vector with saturated integral action,
// desired attitude, attitude tracking errors, thrust magnitude and moment.
//
// Sign convention: A is the desired value of the thrust vector -f R e3.
// At hover A = -M00 g e3, so b3c = e3, Rc = I and f = +M00 g.

#include <algorithm>
#include <cmath>
#include <optional>
#include <tuple>
#include <utility>

#include "cablequad/dynamics.hpp"
#include "cablequad/error.hpp"
#include "cablequad/gains.hpp"
#include "cablequad/geom.hpp"
#include "cablequad/linearize.hpp"
#include "cablequad/model.hpp"

namespace cablequad {

struct ControllerConfig {
  GainSet gains;
  Vec3 xd = Vec3::Zero();
  MatX P;   // Lyapunov solution for the closed-loop linearization
  MatX PB;  // P * Bbb, (4n+6) x (2n+3)
  double dt_ctrl = 1e-3;
};

struct ControllerState {
  VecX ex;                 // translational/link integral, stored unsaturated
  Vec3 eI = Vec3::Zero();  // attitude integral
  std::optional<Mat3> prev_Rc;
  std::optional<Vec3> prev_Omegac;
  double t_last = 0.0;

  static ControllerState zero(std::size_t n) {
    ControllerState cs;
    cs.ex = VecX::Zero(static_cast<Eigen::Index>(2 * n + 3));
    return cs;
  }
};

struct ControlOutput {
  ControlInput u;
  Vec3 A = Vec3::Zero();
  Mat3 Rc = Mat3::Identity();
  Vec3 Omegac = Vec3::Zero();
  Vec3 Omegac_dot = Vec3::Zero();
  Vec3 eR = Vec3::Zero();
  Vec3 eOmega = Vec3::Zero();
  VecX z1;
  ControllerState next;
};

namespace controller {

/// Builds the configuration, solving the Lyapunov equation for P with the
/// proportional/derivative gains (Q = identity when empty).
inline ControllerConfig make_config(const SystemParams& p, const GainSet& g, const Vec3& xd, double dt_ctrl,
                                    const MatX& Q = MatX()) {
  if (!(dt_ctrl > 0.0)) throw Error(ErrorCode::kInvalidParams, "control period must be positive");
  const ClosedLoopModel cl = linearize::closed_loop(linearize::build_linear_model(p), g.Kx(), g.Kdx());
  const MatX q = Q.size() == 0 ? MatX::Identity(cl.Abb.rows(), cl.Abb.cols()) : Q;
  ControllerConfig cfg;
  cfg.gains = g;
  cfg.xd = xd;
  cfg.P = gains::solve_lyapunov(cl.Abb, q);
  cfg.PB = cfg.P * cl.Bbb;
  cfg.dt_ctrl = dt_ctrl;
  return cfg;
}

/// Elementwise clamp to [-sigma, sigma].
inline VecX saturate(const VecX& y, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::kInvalidParams, "saturation bound must be positive");
  return y.cwiseMax(-sigma).cwiseMin(sigma);
}

inline Vec3 ideal_force(const VecX& z1, const VecX& ex, const ControllerConfig& cfg, const SystemParams& p) {
  const Eigen::Index dim = z1.size() / 2;
  const GainSet& g = cfg.gains;
  const double m00 = inertia_couplings(p).M00;
  Vec3 a = -g.Kx() * z1.head(dim) - g.Kdx() * z1.tail(dim) - g.Kz() * saturate(ex, g.sigma) - m00 * p.g * kE3;
  if (!(a.norm() >= 1e-9)) throw Error(ErrorCode::kDegenerateForce, "ideal thrust vector vanishes");
  return a;
}

/// Rc = [b1c, b3c x b1c, b3c] with b3c = -A/|A| and b1c the projection of b1d.
inline Mat3 desired_attitude(const Vec3& A, const Vec3& b1d) {
  const double a_norm = A.norm();
  if (!(a_norm > 1e-9)) throw Error(ErrorCode::kDegenerateForce, "ideal thrust vector vanishes");
  const Vec3 b3c = -A / a_norm;
  const Mat3 h = geom::hat(b3c);
  const Vec3 side = h * b1d;
  if (side.norm() < std::sin(1e-6) * b1d.norm()) {
    throw Error(ErrorCode::kParallelAxes, "b1d is parallel to the commanded thrust axis");
  }
  const Vec3 proj = -(h * h * b1d);
  Mat3 rc;
  rc.col(0) = proj / proj.norm();
  rc.col(1) = side / side.norm();
  rc.col(2) = b3c;
  return rc;
}

/// e_R = 1/2 vee(Rc^T R - R^T Rc), e_Omega = Omega - R^T Rc Omega_c.
inline std::pair<Vec3, Vec3> attitude_errors(const Mat3& R, const Vec3& Omega, const Mat3& Rc, const Vec3& Omegac) {
  const Vec3 eR = 0.5 * geom::vee_skew_part(Rc.transpose() * R - R.transpose() * Rc);
  const Vec3 eOmega = Omega - R.transpose() * Rc * Omegac;
  return {eR, eOmega};
}

/// One controller update. Omega_c and its rate come from backward
/// differences of the stored Rc and Omega_c (zero until history exists);
/// the integrals advance by explicit Euler over dt.
inline ControlOutput control_step(const SystemState& s, const ControllerState& cs, const ControllerConfig& cfg,
                                  const SystemParams& p, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidParams, "control step must be positive");
  const GainSet& g = cfg.gains;
  ControlOutput out;
  out.z1 = linearize::lin_state(s, cfg.xd);
  out.A = ideal_force(out.z1, cs.ex, cfg, p);
  out.Rc = desired_attitude(out.A, g.b1d);

  if (cs.prev_Rc) {
    out.Omegac = geom::vee_skew_part(out.Rc.transpose() * (out.Rc - *cs.prev_Rc) / dt);
    if (cs.prev_Omegac) out.Omegac_dot = (out.Omegac - *cs.prev_Omegac) / dt;
  }
  std::tie(out.eR, out.eOmega) = attitude_errors(s.R, s.Omega, out.Rc, out.Omegac);

  const Mat3& R = s.R;
  const Vec3& W = s.Omega;
  out.u.f = -out.A.dot(R * kE3);
  out.u.M = -g.kR * out.eR - g.kOmega * out.eOmega - g.kI * cs.eI + W.cross(p.J * W) -
            p.J * (geom::hat(W) * R.transpose() * out.Rc * out.Omegac -
                   R.transpose() * out.Rc * out.Omegac_dot);

  out.next = cs;
  out.next.ex = cs.ex + cfg.PB.transpose() * out.z1 * dt;
  out.next.eI = cs.eI + (out.eOmega + g.c2 * out.eR) * dt;
  out.next.prev_Rc = out.Rc;
  if (cs.prev_Rc) out.next.prev_Omegac = out.Omegac;
  out.next.t_last = cs.t_last + dt;
  return out;
}

}  // namespace controller
}  // namespace cablequad
