#include <cmath>
#include <random>

#include "test_util.hpp"

namespace cablequad {
namespace {

TEST(LinearModel, ReferenceBlocks) {
  const LinearModel lm = linearize::build_linear_model(reference_params());
  ASSERT_EQ(lm.dim(), 13);
  EXPECT_LT(testing::max_abs_diff(lm.M.topLeftCorner(3, 3), Mat3::Identity()), 1e-15);
  Eigen::Matrix<double, 3, 2> mxq;
  mxq << 0, 0.05, -0.05, 0, 0, 0;
  EXPECT_LT(testing::max_abs_diff(lm.M.block(0, 3, 3, 2), mxq), 1e-15);
  EXPECT_LT(testing::max_abs_diff(lm.G.block(3, 3, 2, 2), 0.4905 * Eigen::Matrix2d::Identity()), 1e-15);
  EXPECT_EQ(lm.G.topLeftCorner(3, 3), Mat3::Zero());
  MatX b = MatX::Zero(13, 3);
  b.topRows(3) = Mat3::Identity();
  EXPECT_EQ(lm.B, b);
}

TEST(LinearModel, MassMatrixSymmetricPositiveDefinite) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ud(0.01, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    SystemParams p = reference_params();
    const std::size_t n = 1 + trial % 7;
    p.m = ud(rng);
    p.link_masses.resize(n);
    p.link_lengths.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      p.link_masses[i] = ud(rng);
      p.link_lengths[i] = ud(rng);
    }
    const LinearModel lm = linearize::build_linear_model(p);
    EXPECT_LT(testing::max_abs_diff(lm.M, lm.M.transpose()), 1e-15);
    EXPECT_GT(gains::min_eig_symmetric(lm.M), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = linearize::link_index(i);
      EXPECT_GT(lm.G(k, k), 0.0);
    }
  }
}

TEST(ClosedLoop, ZeroGainsLeaveTranslationUnactuated) {
  const LinearModel lm = linearize::build_linear_model(reference_params());
  const MatX zero = MatX::Zero(3, 13);
  const ClosedLoopModel cl = linearize::closed_loop(lm, zero, zero);
  Eigen::EigenSolver<MatX> es(cl.Abb, false);
  int near_zero = 0;
  for (const auto& ev : es.eigenvalues()) {
    EXPECT_LT(std::abs(ev.real()), 1e-8);
    if (std::abs(ev) < 1e-6) ++near_zero;
  }
  EXPECT_GE(near_zero, 6);
}

TEST(ClosedLoop, ReferenceGainsAreHurwitz) {
  const GainSet g = reference_gains();
  const ClosedLoopModel cl = linearize::closed_loop(linearize::build_linear_model(reference_params()), g.Kx(), g.Kdx());
  EXPECT_LT(gains::spectral_abscissa(cl.Abb), 0.0);
  EXPECT_NEAR(gains::spectral_abscissa(cl.Abb), -0.5052, 1e-3);
}

TEST(ClosedLoop, BottomBlockInvertsMass) {
  const LinearModel lm = linearize::build_linear_model(reference_params());
  const GainSet g = reference_gains();
  const ClosedLoopModel cl = linearize::closed_loop(lm, g.Kx(), g.Kdx());
  EXPECT_LT(testing::max_abs_diff(lm.M * cl.Bbb.bottomRows(13), MatX::Identity(13, 13)), 1e-12);
  EXPECT_EQ(cl.Bbb.topRows(13), MatX::Zero(13, 13));
}

TEST(ClosedLoop, RejectsBadShapesAndSingularMass) {
  LinearModel lm = linearize::build_linear_model(reference_params());
  EXPECT_THROW_CODE(linearize::closed_loop(lm, MatX::Zero(3, 5), MatX::Zero(3, 13)), ErrorCode::kInvalidParams);
  lm.M.setZero();
  EXPECT_THROW_CODE(linearize::closed_loop(lm, MatX::Zero(3, 13), MatX::Zero(3, 13)), ErrorCode::kSingularMass);
}

TEST(GainMatrix, LinkBlockPlacement) {
  const MatX k = linearize::gain_matrix(2.0, {3.0});
  Eigen::Matrix<double, 3, 5> expected;
  expected << 2, 0, 0, 0, -3,
              0, 2, 0, 3, 0,
              0, 0, 2, 0, 0;
  EXPECT_EQ(k, MatX(expected));
}

TEST(LinState, Examples) {
  EXPECT_EQ(linearize::lin_state(SystemState::hanging(5, Vec3(1, 2, 3)), Vec3(1, 2, 3)), VecX::Zero(26));

  SystemState one = SystemState::hanging(1, Vec3(0.3, -0.2, 0.1));
  one.q[0] = kE1;
  one.w[0] = Vec3(0, 0.5, 0);
  const VecX z = linearize::lin_state(one, Vec3(0.1, 0.1, 0.1));
  EXPECT_EQ(z.segment<2>(3), Eigen::Vector2d(0, 1));
  EXPECT_EQ(z.head<3>(), Vec3(0.3, -0.2, 0.1) - Vec3(0.1, 0.1, 0.1));
  EXPECT_EQ(z.segment<2>(8), Eigen::Vector2d(0, 0.5));
}

TEST(LinState, RoundTripNearEquilibrium) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ud(-0.2, 0.2);
  VecX z(26);
  for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = ud(rng);
  const SystemState s = linearize::state_from_lin(z, 5, Vec3(1, 0, 0));
  EXPECT_TRUE(s.is_valid());
  EXPECT_LT((linearize::lin_state(s, Vec3(1, 0, 0)) - z).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(FdJacobian, MatchesClosedAndOpenLoop) {
  const auto [open, closed] = validation::linearization_errors(reference_params(), reference_gains(), 1e-6);
  EXPECT_LT(open, 1e-4);
  EXPECT_LT(closed, 1e-4);
}

TEST(FdJacobian, SecondOrderInStep) {
  const GainSet g = reference_gains();
  const SystemParams p = reference_params();
  const double e1 = linearize::fd_jacobian_check(p, g.Kx(), g.Kdx(), 1e-4);
  const double e2 = linearize::fd_jacobian_check(p, g.Kx(), g.Kdx(), 5e-5);
  EXPECT_NEAR(e1 / e2, 4.0, 0.4);
}

TEST(FdJacobian, RejectsStepOutsideRange) {
  const GainSet g = reference_gains();
  EXPECT_THROW_CODE(linearize::fd_jacobian_check(reference_params(), g.Kx(), g.Kdx(), 1e-3), ErrorCode::kInvalidParams);
  EXPECT_THROW_CODE(linearize::fd_jacobian_check(reference_params(), g.Kx(), g.Kdx(), 1e-9), ErrorCode::kInvalidParams);
}

}  // namespace
}  // namespace cablequad
