#pragma once

// Numerical invariant checks shared by the CLI `validate` verb and the
// acceptance suite. Each check returns the measured quantity; thresholds
// live with the callers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "cablequad/controller.hpp"
#include "cablequad/dynamics.hpp"
#include "cablequad/linearize.hpp"
#include "cablequad/model.hpp"
#include "cablequad/simharness.hpp"

namespace cablequad::validation {

/// Uniformly distributed unit vector.
template <class Rng>
Vec3 random_unit(Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(nd(rng), nd(rng), nd(rng));
  } while (v.norm() < 1e-6);
  return v.normalized();
}

/// Random feasible state: unit links with orthogonal rates, random attitude.
template <class Rng>
SystemState random_state(std::size_t n, Rng& rng, double rate_scale = 2.0) {
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  auto rvec = [&](double s) { return Vec3(s * ud(rng), s * ud(rng), s * ud(rng)); };
  SystemState s = SystemState::hanging(n, rvec(1.0));
  s.v = rvec(1.0);
  s.R = geom::exp_so3(rvec(3.0));
  s.Omega = rvec(rate_scale);
  for (std::size_t i = 0; i < n; ++i) {
    s.q[i] = random_unit(rng);
    const Vec3 w = rvec(rate_scale);
    s.w[i] = w - w.dot(s.q[i]) * s.q[i];
  }
  return s;
}

/// Reference parameters with n identical links and no disturbances.
inline SystemParams uniform_params(std::size_t n) {
  SystemParams p = reference_params();
  p.link_masses.assign(n, 0.1);
  p.link_lengths.assign(n, 0.1);
  p.delta_x.setZero();
  p.delta_R.setZero();
  return p;
}

struct EquivalenceResult {
  double max_accel_diff = 0.0;    // max-abs over xdd, qdd, wd
  double max_asymmetry = 0.0;     // max-abs of (A - A^T) for the omega-form matrix
  double max_constraint = 0.0;    // max |q . wd| from the q-form solution
};

inline EquivalenceResult formulation_equivalence(std::size_t n, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  const SystemParams p = uniform_params(n);
  const InertiaCouplings c = inertia_couplings(p);
  EquivalenceResult r;
  for (int t = 0; t < trials; ++t) {
    const SystemState s = random_state(n, rng);
    const Vec3 force(5.0 * ud(rng), 5.0 * ud(rng), -10.0 + 5.0 * ud(rng));
    const Acceleration a = dynamics::translational_accel_qform(s, force, p);
    const Acceleration b = dynamics::translational_accel_wform(s, force, p);
    double d = (a.xdd - b.xdd).cwiseAbs().maxCoeff();
    for (std::size_t i = 0; i < n; ++i) {
      d = std::max(d, (a.qdd[i] - b.qdd[i]).cwiseAbs().maxCoeff());
      d = std::max(d, (a.wd[i] - b.wd[i]).cwiseAbs().maxCoeff());
      r.max_constraint = std::max(r.max_constraint, std::abs(s.q[i].dot(b.wd[i])));
    }
    r.max_accel_diff = std::max(r.max_accel_diff, d);
    const MatX w = dynamics::wform_matrix(s, c);
    r.max_asymmetry = std::max(r.max_asymmetry, (w - w.transpose()).cwiseAbs().maxCoeff());
  }
  return r;
}

/// Initial state for the free-motion checks: curved cable with moving links.
inline SystemState free_motion_initial_state(std::size_t n) {
  SystemState s = SystemState::hanging(n, Vec3::Zero());
  s.v = Vec3(0.3, -0.2, 0.1);
  s.Omega = Vec3(0.5, -0.3, 0.2);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 0.6 - 0.1 * static_cast<double>(i);
    s.q[i] = geom::axis_angle(kE2, a) * kE3;
    const Vec3 w(0.4 * std::cos(static_cast<double>(i)), 0.8, 0.3);
    s.w[i] = w - w.dot(s.q[i]) * s.q[i];
  }
  return s;
}

struct FreeMotionResult {
  double max_rel_energy_drift = 0.0;
  double max_horizontal_momentum_change = 0.0;
  double max_vertical_momentum_rel_error = 0.0;
  double max_unit_error = 0.0;
  double max_orthogonality_error = 0.0;
};

/// Integrates the uncontrolled, undisturbed system (f = 0, M = 0).
inline FreeMotionResult free_motion(const SystemParams& p, const SystemState& s0, double duration, double dt) {
  const ControlInput u{};
  const double m00 = inertia_couplings(p).M00;
  const double e0 = total_energy(s0, p).E;
  const Vec3 p0 = linear_momentum(s0, p);
  const auto steps = static_cast<long>(std::llround(duration / dt));
  FreeMotionResult r;
  SystemState s = s0;
  for (long k = 1; k <= steps; ++k) {
    s = dynamics::rk4_step(s, u, p, dt);
    const double t = static_cast<double>(k) * dt;
    r.max_rel_energy_drift = std::max(r.max_rel_energy_drift, std::abs(total_energy(s, p).E - e0) / std::abs(e0));
    const Vec3 dp = linear_momentum(s, p) - p0;
    r.max_horizontal_momentum_change = std::max(r.max_horizontal_momentum_change, dp.head<2>().cwiseAbs().maxCoeff());
    const double expected = m00 * p.g * t;
    r.max_vertical_momentum_rel_error = std::max(r.max_vertical_momentum_rel_error, std::abs(dp.z() - expected) / expected);
    for (std::size_t i = 0; i < s.n(); ++i) {
      r.max_unit_error = std::max(r.max_unit_error, std::abs(s.q[i].norm() - 1.0));
      r.max_orthogonality_error = std::max(r.max_orthogonality_error, std::abs(s.q[i].dot(s.w[i])));
    }
  }
  return r;
}

/// Max |‖q_i‖ - 1| and |q_i . w_i| over every logged sample.
inline std::pair<double, double> constraint_errors(const sim::TrajectoryLog& log) {
  double unit = 0.0;
  double ortho = 0.0;
  for (const auto& smp : log.samples) {
    for (std::size_t i = 0; i < smp.state.n(); ++i) {
      unit = std::max(unit, std::abs(smp.state.q[i].norm() - 1.0));
      ortho = std::max(ortho, std::abs(smp.state.q[i].dot(smp.state.w[i])));
    }
  }
  return {unit, ortho};
}

/// Largest deviation from the equilibrium over the log: position, velocity,
/// link and attitude errors.
inline double equilibrium_deviation(const sim::TrajectoryLog& log, const Vec3& xd) {
  double worst = 0.0;
  for (const auto& smp : log.samples) {
    worst = std::max({worst, (smp.state.x - xd).norm(), smp.state.v.norm(), smp.state.Omega.norm(), smp.e_q,
                      smp.e_w, smp.Psi, smp.eR_norm, smp.eW_norm, (smp.state.R - Mat3::Identity()).norm()});
  }
  return worst;
}

struct MonotonicityResult {
  long entry_index = -1;  // first sample with Psi < psi1
  long steps = 0;
  long non_increasing = 0;
  double fraction() const { return steps > 0 ? static_cast<double>(non_increasing) / static_cast<double>(steps) : 0.0; }
};

/// Fraction of consecutive logged samples with V(k+1) <= V(k) + slack after
/// the attitude error first enters Psi < psi1.
inline MonotonicityResult lyapunov_monotonicity(const sim::TrajectoryLog& log, double psi1, double slack) {
  MonotonicityResult r;
  const auto& smp = log.samples;
  for (std::size_t k = 0; k < smp.size(); ++k) {
    if (smp[k].Psi < psi1) {
      r.entry_index = static_cast<long>(k);
      break;
    }
  }
  if (r.entry_index < 0) return r;
  for (auto k = static_cast<std::size_t>(r.entry_index); k + 1 < smp.size(); ++k) {
    ++r.steps;
    if (smp[k + 1].V_lyap <= smp[k].V_lyap + slack) ++r.non_increasing;
  }
  return r;
}

struct ControllerIdentityResult {
  double max_thrust_identity_error = 0.0;  // |f - ‖A‖ e3^T Rc^T R e3|
  double max_scaling_error = 0.0;          // ‖Rc(sA) - Rc(A)‖ over sampled s > 0
};

inline ControllerIdentityResult controller_identities(const sim::TrajectoryLog& log, const Vec3& b1d) {
  ControllerIdentityResult r;
  for (const auto& smp : log.samples) {
    const double rhs = smp.A.norm() * kE3.dot(smp.Rc.transpose() * smp.state.R * kE3);
    r.max_thrust_identity_error = std::max(r.max_thrust_identity_error, std::abs(smp.u.f - rhs));
    for (double scale : {1e-3, 0.5, 2.0, 1e3}) {
      const Mat3 rc = controller::desired_attitude(scale * smp.A, b1d);
      r.max_scaling_error = std::max(r.max_scaling_error, (rc - smp.Rc).cwiseAbs().maxCoeff());
    }
  }
  return r;
}

/// Open-loop (zero gain) and closed-loop FD Jacobian errors.
inline std::pair<double, double> linearization_errors(const SystemParams& p, const GainSet& g, double eps) {
  const auto dim = static_cast<Eigen::Index>(2 * p.n() + 3);
  const MatX zero = MatX::Zero(3, dim);
  return {linearize::fd_jacobian_check(p, zero, zero, eps), linearize::fd_jacobian_check(p, g.Kx(), g.Kdx(), eps)};
}

}  // namespace cablequad::validation
