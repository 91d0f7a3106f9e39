#pragma once

// Physical parameters, state container, and scalar quantities of the
// quadrotor / n-link cable system.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "cablequad/error.hpp"
#include "cablequad/geom.hpp"

namespace cablequad {

struct SystemParams {
  double m = 0.5;                       // quadrotor mass [kg]
  Mat3 J = Mat3::Identity();            // quadrotor inertia [kg m^2]
  std::vector<double> link_masses;      // m_i [kg], mass lumped at outboard end
  std::vector<double> link_lengths;     // l_i [m]
  double g = 9.81;                      // [m/s^2]
  Vec3 delta_x = Vec3::Zero();          // fixed translational disturbance [N]
  Vec3 delta_R = Vec3::Zero();          // fixed rotational disturbance [N m]

  std::size_t n() const { return link_masses.size(); }

  /// Throws InvalidParams on the first violated invariant.
  void validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidParams, msg); };
    if (!(m > 0.0)) fail("quadrotor mass must be positive");
    if (!(g > 0.0)) fail("gravity must be positive");
    if (link_masses.empty()) fail("at least one link is required");
    if (link_masses.size() != link_lengths.size()) fail("link mass/length counts differ");
    for (std::size_t i = 0; i < n(); ++i) {
      if (!(link_masses[i] > 0.0)) fail("link masses must be positive");
      if (!(link_lengths[i] > 0.0)) fail("link lengths must be positive");
    }
    if ((J - J.transpose()).cwiseAbs().maxCoeff() > 1e-12 * J.cwiseAbs().maxCoeff()) {
      fail("inertia matrix must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(J);
    if (!(eig.eigenvalues().minCoeff() > 0.0)) fail("inertia matrix must be positive definite");
    if (!delta_x.allFinite() || !delta_R.allFinite()) fail("disturbances must be finite");
  }

  double lambda_min_J() const { return Eigen::SelfAdjointEigenSolver<Mat3>(J).eigenvalues().minCoeff(); }
  double lambda_max_J() const { return Eigen::SelfAdjointEigenSolver<Mat3>(J).eigenvalues().maxCoeff(); }
};

/// Reference numerical example: 0.5 kg quadrotor, five
/// 0.1 kg / 0.1 m links, with the fixed disturbances active.
inline SystemParams reference_params() {
  SystemParams p;
  p.m = 0.5;
  p.J = Vec3(0.557e-2, 0.557e-2, 1.05e-2).asDiagonal();
  p.link_masses.assign(5, 0.1);
  p.link_lengths.assign(5, 0.1);
  p.g = 9.81;
  p.delta_x = Vec3(-0.0125, 0.0125, 0.01);
  p.delta_R = Vec3(0.03, -0.02, 0.01);
  return p;
}

struct InertiaCouplings {
  double M00 = 0.0;
  VecX M0;  // M0(i) = M_{0,i+1}
  MatX Mij;
};

/// Mass outboard of link i (inclusive), sum_{a >= i} m_a, zero-based.
inline double outboard_mass(const SystemParams& p, std::size_t i) {
  double total = 0.0;
  for (std::size_t a = i; a < p.n(); ++a) total += p.link_masses[a];
  return total;
}

inline InertiaCouplings inertia_couplings(const SystemParams& p) {
  const std::size_t n = p.n();
  InertiaCouplings c;
  c.M00 = p.m + outboard_mass(p, 0);
  c.M0.resize(static_cast<Eigen::Index>(n));
  c.Mij.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    c.M0(ii) = outboard_mass(p, i) * p.link_lengths[i];
    for (std::size_t j = i; j < n; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      c.Mij(ii, jj) = outboard_mass(p, j) * p.link_lengths[i] * p.link_lengths[j];
      c.Mij(jj, ii) = c.Mij(ii, jj);
    }
  }
  return c;
}

/// Gravity stiffness of link i: (sum_{a >= i} m_a) g l_i.
inline double link_gravity_coefficient(const SystemParams& p, std::size_t i) {
  return outboard_mass(p, i) * p.g * p.link_lengths[i];
}

struct SystemState {
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Mat3 R = Mat3::Identity();
  Vec3 Omega = Vec3::Zero();
  std::vector<Vec3> q;  // link directions (unit)
  std::vector<Vec3> w;  // link angular velocities, inertial frame

  std::size_t n() const { return q.size(); }

  /// All links hanging along e3, everything at rest.
  static SystemState hanging(std::size_t n, const Vec3& x = Vec3::Zero()) {
    SystemState s;
    s.x = x;
    s.q.assign(n, kE3);
    s.w.assign(n, Vec3::Zero());
    return s;
  }

  bool is_valid(double tol = 1e-9) const {
    if (q.size() != w.size()) return false;
    if (!geom::is_rotation(R)) return false;
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (std::abs(q[i].norm() - 1.0) >= tol) return false;
      if (std::abs(q[i].dot(w[i])) >= tol) return false;
    }
    return x.allFinite() && v.allFinite() && Omega.allFinite();
  }
};

/// Mass positions x_i = x + sum_{a <= i} l_a q_a.
inline std::vector<Vec3> payload_positions(const SystemState& s, const SystemParams& p) {
  std::vector<Vec3> out;
  out.reserve(s.n());
  Vec3 pos = s.x;
  for (std::size_t i = 0; i < s.n(); ++i) {
    pos += p.link_lengths[i] * s.q[i];
    out.push_back(pos);
  }
  return out;
}

struct Energy {
  double T = 0.0;
  double V = 0.0;
  double E = 0.0;
};

inline Energy total_energy(const SystemState& s, const SystemParams& p) {
  const InertiaCouplings c = inertia_couplings(p);
  const std::size_t n = s.n();
  std::vector<Vec3> qdot(n);
  for (std::size_t i = 0; i < n; ++i) qdot[i] = s.w[i].cross(s.q[i]);

  double T = 0.5 * c.M00 * s.v.squaredNorm() + 0.5 * s.Omega.dot(p.J * s.Omega);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    T += c.M0(ii) * s.v.dot(qdot[i]);
    for (std::size_t j = 0; j < n; ++j) {
      T += 0.5 * c.Mij(ii, static_cast<Eigen::Index>(j)) * qdot[i].dot(qdot[j]);
    }
  }
  double V = -c.M00 * p.g * kE3.dot(s.x);
  for (std::size_t i = 0; i < n; ++i) V -= link_gravity_coefficient(p, i) * kE3.dot(s.q[i]);
  return {T, V, T + V};
}

struct LinkErrors {
  double e_q = 0.0;
  double e_w = 0.0;
};

/// e_q = sum ||q_i - e3||, e_w = sum ||w_i||.
inline LinkErrors link_errors(const SystemState& s) {
  LinkErrors e;
  for (std::size_t i = 0; i < s.n(); ++i) {
    e.e_q += (s.q[i] - kE3).norm();
    e.e_w += s.w[i].norm();
  }
  return e;
}

/// Psi = 1/2 tr(I - Rc^T R), in [0, 2].
inline double attitude_error_psi(const Mat3& R, const Mat3& Rc) {
  return 0.5 * (Mat3::Identity() - Rc.transpose() * R).trace();
}

inline Vec3 linear_momentum(const SystemState& s, const SystemParams& p) {
  const InertiaCouplings c = inertia_couplings(p);
  Vec3 total = c.M00 * s.v;
  for (std::size_t i = 0; i < s.n(); ++i) {
    total += c.M0(static_cast<Eigen::Index>(i)) * s.w[i].cross(s.q[i]);
  }
  return total;
}

}  // namespace cablequad
