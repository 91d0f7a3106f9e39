#include <cmath>
#include <numbers>
#include <random>

#include "test_util.hpp"

namespace cablequad {
namespace {

TEST(SystemParams, ReferenceValuesValidate) {
  EXPECT_NO_THROW(reference_params().validate());
  EXPECT_EQ(reference_params().n(), 5u);
}

TEST(SystemParams, RejectsInvalid) {
  SystemParams p = reference_params();
  p.m = 0.0;
  EXPECT_THROW_CODE(p.validate(), ErrorCode::kInvalidParams);
  p = reference_params();
  p.link_lengths[2] = 0.0;
  EXPECT_THROW_CODE(p.validate(), ErrorCode::kInvalidParams);
  p = reference_params();
  p.link_masses.clear();
  p.link_lengths.clear();
  EXPECT_THROW_CODE(p.validate(), ErrorCode::kInvalidParams);
  p = reference_params();
  p.J(0, 1) = 1e-3;
  EXPECT_THROW_CODE(p.validate(), ErrorCode::kInvalidParams);
  p = reference_params();
  p.J(2, 2) = -1.0;
  EXPECT_THROW_CODE(p.validate(), ErrorCode::kInvalidParams);
  p = reference_params();
  p.g = 0.0;
  EXPECT_THROW_CODE(p.validate(), ErrorCode::kInvalidParams);
}

// M00 = m + sum m_i, M0i = (sum_{a>=i} m_a) l_i, Mij = (sum_{a>=max(i,j)} m_a) l_i l_j.
TEST(InertiaCouplings, ReferenceExamples) {
  const InertiaCouplings c = inertia_couplings(reference_params());
  EXPECT_NEAR(c.M00, 1.0, 1e-15);
  EXPECT_NEAR(c.M0(0), 0.05, 1e-15);
  EXPECT_NEAR(c.Mij(1, 2), 0.003, 1e-15);
}

TEST(InertiaCouplings, MatchesDefinitionOnRandomParams) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ud(0.05, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    SystemParams p = reference_params();
    const std::size_t n = 1 + trial % 6;
    p.link_masses.resize(n);
    p.link_lengths.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      p.link_masses[i] = ud(rng);
      p.link_lengths[i] = ud(rng);
    }
    const InertiaCouplings c = inertia_couplings(p);
    double total = p.m;
    for (double mi : p.link_masses) total += mi;
    EXPECT_NEAR(c.M00, total, 1e-12);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double outboard = 0.0;
        for (std::size_t a = std::max(i, j); a < n; ++a) outboard += p.link_masses[a];
        const auto ii = static_cast<Eigen::Index>(i);
        const auto jj = static_cast<Eigen::Index>(j);
        EXPECT_NEAR(c.Mij(ii, jj), outboard * p.link_lengths[i] * p.link_lengths[j], 1e-12);
        EXPECT_EQ(c.Mij(ii, jj), c.Mij(jj, ii));
        EXPECT_GT(c.Mij(ii, jj), 0.0);
      }
      double outboard = 0.0;
      for (std::size_t a = i; a < n; ++a) outboard += p.link_masses[a];
      EXPECT_NEAR(c.M0(static_cast<Eigen::Index>(i)), outboard * p.link_lengths[i], 1e-12);
    }
  }
}

TEST(PayloadPositions, Examples) {
  const auto pos = payload_positions(SystemState::hanging(5), reference_params());
  ASSERT_EQ(pos.size(), 5u);
  EXPECT_LT((pos.back() - Vec3(0, 0, 0.5)).norm(), 1e-15);

  SystemParams p = reference_params();
  p.link_masses = {0.1};
  p.link_lengths = {0.7};
  SystemState s = SystemState::hanging(1, Vec3(1, 0, 0));
  s.q[0] = kE1;
  EXPECT_LT((payload_positions(s, p)[0] - Vec3(1.7, 0, 0)).norm(), 1e-15);
}

TEST(TotalEnergy, HangingEquilibrium) {
  const Energy e = total_energy(SystemState::hanging(5), reference_params());
  EXPECT_EQ(e.T, 0.0);
  EXPECT_NEAR(e.V, -1.4715, 1e-12);
  EXPECT_NEAR(e.E, -1.4715, 1e-12);
}

TEST(TotalEnergy, SpinAndStaticConfigurations) {
  SystemState s = SystemState::hanging(5);
  s.Omega = kE3;
  EXPECT_NEAR(total_energy(s, reference_params()).T, 0.5 * 1.05e-2, 1e-15);

  std::mt19937_64 rng(9);
  SystemState r = validation::random_state(5, rng);
  r.v.setZero();
  r.Omega.setZero();
  for (auto& w : r.w) w.setZero();
  EXPECT_EQ(total_energy(r, reference_params()).T, 0.0);
}

TEST(TotalEnergy, KineticEnergyNonNegative) {
  std::mt19937_64 rng(13);
  const SystemParams p = reference_params();
  for (int k = 0; k < 10000; ++k) {
    EXPECT_GE(total_energy(validation::random_state(5, rng), p).T, 0.0);
  }
}

// T = 1/2 sum of point-mass kinetic energies plus the rotational term.
TEST(TotalEnergy, MatchesPointMassSum) {
  std::mt19937_64 rng(17);
  const SystemParams p = reference_params();
  for (int k = 0; k < 100; ++k) {
    const SystemState s = validation::random_state(5, rng);
    double t = 0.5 * p.m * s.v.squaredNorm() + 0.5 * s.Omega.dot(p.J * s.Omega);
    double v = -p.m * p.g * s.x.z();
    Vec3 vel = s.v;
    Vec3 pos = s.x;
    for (std::size_t i = 0; i < 5; ++i) {
      vel += p.link_lengths[i] * s.w[i].cross(s.q[i]);
      pos += p.link_lengths[i] * s.q[i];
      t += 0.5 * p.link_masses[i] * vel.squaredNorm();
      v -= p.link_masses[i] * p.g * pos.z();
    }
    const Energy e = total_energy(s, p);
    EXPECT_NEAR(e.T, t, 1e-12 * std::max(1.0, t));
    EXPECT_NEAR(e.V, v, 1e-12 * std::max(1.0, std::abs(v)));
  }
}

TEST(LinkErrors, Examples) {
  const LinkErrors a = link_errors(SystemState::hanging(5));
  EXPECT_EQ(a.e_q, 0.0);
  EXPECT_EQ(a.e_w, 0.0);

  SystemState one = SystemState::hanging(1);
  one.q[0] = kE1;
  EXPECT_NEAR(link_errors(one).e_q, std::sqrt(2.0), 1e-15);
  EXPECT_EQ(link_errors(one).e_w, 0.0);

  SystemState two = SystemState::hanging(2);
  two.w[0] = Vec3(1, 0, 0);
  two.w[1] = Vec3(0, 2, 0);
  EXPECT_EQ(link_errors(two).e_q, 0.0);
  EXPECT_EQ(link_errors(two).e_w, 3.0);
}

TEST(LinkErrors, ZeroOnlyWhenHanging) {
  SystemState s = SystemState::hanging(3);
  s.q[1] = geom::axis_angle(kE1, 1e-6) * kE3;
  EXPECT_GT(link_errors(s).e_q, 1e-12);
}

TEST(AttitudeErrorPsi, Examples) {
  const Mat3 r = geom::axis_angle(Vec3(1, 2, 3), 0.4);
  EXPECT_NEAR(attitude_error_psi(r, r), 0.0, 1e-15);
  EXPECT_NEAR(attitude_error_psi(geom::axis_angle(kE1, std::numbers::pi / 2), Mat3::Identity()), 1.0, 1e-15);
  EXPECT_NEAR(attitude_error_psi(geom::axis_angle(kE1, std::numbers::pi), Mat3::Identity()), 2.0, 1e-15);
}

TEST(LinearMomentum, Examples) {
  EXPECT_EQ(linear_momentum(SystemState::hanging(5), reference_params()), Vec3::Zero());

  SystemState s = SystemState::hanging(5);
  s.v = kE1;
  EXPECT_LT((linear_momentum(s, reference_params()) - kE1).norm(), 1e-15);

  SystemParams p = reference_params();
  p.link_masses = {0.5};
  p.link_lengths = {0.1};
  SystemState one = SystemState::hanging(1);
  one.w[0] = kE1;
  EXPECT_LT((linear_momentum(one, p) - Vec3(0, -0.05, 0)).norm(), 1e-15);
}

TEST(SystemState, Validity) {
  SystemState s = SystemState::hanging(2);
  EXPECT_TRUE(s.is_valid());
  s.q[0] = Vec3(0, 0, 1.1);
  EXPECT_FALSE(s.is_valid());
}

}  // namespace
}  // namespace cablequad
