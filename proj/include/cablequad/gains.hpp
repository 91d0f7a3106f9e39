#pragma once

// Controller gains and numeric stability certificates: Hurwitz margin,
// Lyapunov solution, attitude-gain bound, and the two quadratic-form
// positivity conditions of the composite Lyapunov analysis.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "cablequad/error.hpp"
#include "cablequad/geom.hpp"
#include "cablequad/linearize.hpp"
#include "cablequad/model.hpp"

namespace cablequad {

struct GainSet {
  double kx = 0.0;
  double kdx = 0.0;
  std::vector<double> kq;  // per link
  std::vector<double> kw;  // per link
  std::vector<double> kz;  // [translational, link 1..n]
  double kR = 0.0;
  double kOmega = 0.0;
  double kI = 0.0;
  double c1 = 0.0;  // listed with the reference gains; no role in the control law
  double c2 = 0.0;
  double sigma = 0.1;
  Vec3 b1d = kE1;

  std::size_t n() const { return kq.size(); }

  MatX Kx() const { return linearize::gain_matrix(kx, kq); }
  MatX Kdx() const { return linearize::gain_matrix(kdx, kw); }
  MatX Kz() const {
    return linearize::gain_matrix(kz.empty() ? 0.0 : kz.front(),
                                  std::vector<double>(kz.begin() + (kz.empty() ? 0 : 1), kz.end()));
  }

  /// Same gains with both integral actions removed (K_z = 0, k_I = 0).
  GainSet without_integral() const {
    GainSet g = *this;
    std::fill(g.kz.begin(), g.kz.end(), 0.0);
    g.kI = 0.0;
    return g;
  }

  bool integral_enabled() const {
    return kI > 0.0 || std::any_of(kz.begin(), kz.end(), [](double k) { return k > 0.0; });
  }

  /// Integral gains may be zero (integral action disabled); all others must be positive.
  void validate(std::size_t links) const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidParams, msg); };
    if (kq.size() != links || kw.size() != links) fail("k_q and k_w need one entry per link");
    if (kz.size() != links + 1) fail("k_z needs n + 1 entries");
    if (!(kx > 0.0 && kdx > 0.0 && kR > 0.0 && kOmega > 0.0 && c2 > 0.0 && sigma > 0.0)) {
      fail("k_x, k_xdot, k_R, k_Omega, c2 and sigma must be positive");
    }
    for (std::size_t i = 0; i < links; ++i) {
      if (!(kq[i] > 0.0 && kw[i] > 0.0)) fail("link gains must be positive");
    }
    if (!(kI >= 0.0)) fail("k_I must be non-negative");
    for (double k : kz) {
      if (!(k >= 0.0)) fail("k_z entries must be non-negative");
    }
    if (!geom::is_unit(b1d, 1e-9)) fail("b1d must be a unit vector");
  }
};

/// Reference gain set for the five-link example. k_z = 1 and sigma = 0.1
/// are local defaults; no values are given for them.
inline GainSet reference_gains() {
  GainSet g;
  g.kx = 12.8;
  g.kdx = 4.22;
  g.kq = {11.01, 6.67, 1.97, 0.41, 0.069};
  g.kw = {0.93, 0.24, 0.032, 0.030, 0.025};
  g.kz.assign(6, 1.0);
  g.kR = 0.65;
  g.kOmega = 0.11;
  g.kI = 1.5;
  g.c1 = 0.7;
  g.c2 = 0.7;
  g.sigma = 0.1;
  g.b1d = kE1;
  return g;
}

namespace gains {

inline double spectral_abscissa(const MatX& a) {
  Eigen::EigenSolver<MatX> es(a, false);
  return es.eigenvalues().real().maxCoeff();
}

inline double min_eig_symmetric(const MatX& a) {
  Eigen::SelfAdjointEigenSolver<MatX> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double lyapunov_residual(const MatX& a, const MatX& p, const MatX& q) {
  return (a.transpose() * p + p * a + q).norm() / q.norm();
}

/// Solves A^T P + P A = -Q by Bartels-Stewart on the complex Schur form of A.
inline MatX solve_lyapunov(const MatX& a, const MatX& q) {
  if (a.rows() != a.cols() || q.rows() != a.rows() || q.cols() != a.cols()) {
    throw Error(ErrorCode::kInvalidParams, "Lyapunov operands must be square and conformant");
  }
  if (!(spectral_abscissa(a) < 0.0)) throw Error(ErrorCode::kNotHurwitz, "closed-loop matrix is not Hurwitz");

  using CMat = Eigen::MatrixXcd;
  Eigen::ComplexSchur<MatX> schur(a);
  const CMat& u = schur.matrixU();
  const CMat& t = schur.matrixT();
  const Eigen::Index n = a.rows();

  // T^H Y + Y T = -U^H Q U, column by column (T^H is lower triangular).
  const CMat c = -(u.adjoint() * q.cast<std::complex<double>>() * u);
  const CMat th = t.adjoint();
  CMat y = CMat::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXcd rhs = c.col(j);
    for (Eigen::Index k = 0; k < j; ++k) rhs -= y.col(k) * t(k, j);
    CMat lhs = th;
    lhs.diagonal().array() += t(j, j);
    y.col(j) = lhs.triangularView<Eigen::Lower>().solve(rhs);
  }
  MatX p = (u * y * u.adjoint()).real();
  return 0.5 * (p + p.transpose());
}

/// Upper bound on c2 for the attitude quadratic form to be positive definite.
inline double c2_bound(double kR, double kOmega, double lam_m, double lam_M, double B2) {
  const double first = std::sqrt(kR * lam_m) / lam_M;
  const double second = 4.0 * kOmega / (8.0 * kR * lam_M + (kOmega + B2) * (kOmega + B2));
  return std::min(first, second);
}

inline Eigen::Matrix2d attitude_form(double kR, double kOmega, double c2, double lam_M, double B2) {
  Eigen::Matrix2d w2;
  w2 << c2 * kR, -0.5 * c2 * (kOmega + B2),
        -0.5 * c2 * (kOmega + B2), kOmega - 2.0 * c2 * lam_M;
  return w2;
}

struct CertifyOptions {
  double psi1 = 0.9;  // attitude domain bound, < 1
  double psi2 = 1.9;  // attitude domain bound, < 2
  double B2 = 0.0;    // bound on ||(2J - tr(J) I) R^T Rc Omega_c||
  MatX Q;             // Lyapunov weight; identity when empty
};

struct Certificate {
  double hurwitz_margin = 0.0;
  double lyap_residual = 0.0;
  double P_min_eig = 0.0;
  double P_max_eig = 0.0;
  double lambda_min_Q = 0.0;
  double c2 = 0.0;
  double c2_bound = 0.0;
  double W2_min_eig = 0.0;
  double W_min_eig = 0.0;
  Eigen::Matrix2d W2 = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d W = Eigen::Matrix2d::Zero();
  double delta = 0.0;
  double integral_limit = 0.0;  // min k_z * sigma
  bool integral_feasible = false;
  double B1 = 0.0;
  double B2 = 0.0;
  double c3 = 0.0;
  double alpha = 0.0;
  double Kmax = 0.0;
  double Kzm = 0.0;
  double psi1 = 0.0;
  double psi2 = 0.0;
  MatX P;

  std::vector<std::string> failures() const {
    std::vector<std::string> out;
    if (!(hurwitz_margin < 0.0)) out.emplace_back("hurwitz");
    if (!(lyap_residual < 1e-10)) out.emplace_back("lyapunov_residual");
    if (!(P_min_eig > 0.0)) out.emplace_back("P_positive_definite");
    if (!(c2 < c2_bound)) out.emplace_back("c2_bound");
    if (!(W2_min_eig > 0.0)) out.emplace_back("W2_positive_definite");
    if (!(W_min_eig > 0.0)) out.emplace_back("W_positive_definite");
    if (!integral_feasible) out.emplace_back("integral_feasible");
    return out;
  }

  bool passed() const { return failures().empty(); }
};

inline double max_abs(const MatX& m) { return m.cwiseAbs().maxCoeff(); }

inline Certificate certify(const LinearModel& lm, const GainSet& g, const SystemParams& p, double delta,
                           const CertifyOptions& opts = {}) {
  if (!(opts.psi1 > 0.0 && opts.psi1 < 1.0)) throw Error(ErrorCode::kInvalidParams, "psi1 must lie in (0, 1)");
  if (!(opts.psi2 > 0.0 && opts.psi2 < 2.0)) throw Error(ErrorCode::kInvalidParams, "psi2 must lie in (0, 2)");
  if (!(opts.B2 >= 0.0)) throw Error(ErrorCode::kInvalidParams, "B2 must be non-negative");

  const auto dim = static_cast<double>(lm.dim());
  const MatX kx = g.Kx();
  const MatX kdx = g.Kdx();
  const MatX kz = g.Kz();
  const ClosedLoopModel cl = linearize::closed_loop(lm, kx, kdx);
  const MatX q = opts.Q.size() == 0 ? MatX::Identity(cl.Abb.rows(), cl.Abb.cols()) : opts.Q;

  Certificate c;
  c.psi1 = opts.psi1;
  c.psi2 = opts.psi2;
  c.hurwitz_margin = spectral_abscissa(cl.Abb);
  c.P = solve_lyapunov(cl.Abb, q);
  c.lyap_residual = lyapunov_residual(cl.Abb, c.P, q);
  {
    Eigen::SelfAdjointEigenSolver<MatX> es(c.P, Eigen::EigenvaluesOnly);
    c.P_min_eig = es.eigenvalues().minCoeff();
    c.P_max_eig = es.eigenvalues().maxCoeff();
  }
  c.lambda_min_Q = min_eig_symmetric(q);

  const double lam_m = p.lambda_min_J();
  const double lam_M = p.lambda_max_J();
  c.B2 = opts.B2;
  c.c2 = g.c2;
  c.c2_bound = c2_bound(g.kR, g.kOmega, lam_m, lam_M, opts.B2);
  c.W2 = attitude_form(g.kR, g.kOmega, g.c2, lam_M, opts.B2);
  c.W2_min_eig = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(c.W2).eigenvalues().minCoeff();

  c.alpha = std::sqrt(opts.psi1 * (2.0 - opts.psi1));
  c.Kmax = std::max(max_abs(kx), max_abs(kdx)) * std::sqrt(3.0 * dim);
  c.Kzm = std::sqrt(3.0) * dim * max_abs(kz);
  c.B1 = inertia_couplings(p).M00 * p.g;
  c.c3 = 2.0 * Eigen::JacobiSVD<MatX>(c.P * cl.Bbb * lm.B).singularValues()(0);

  const double off = -0.5 * c.c3 * (c.B1 + g.sigma * c.Kzm);
  c.W << c.lambda_min_Q - 2.0 * c.c3 * c.Kmax * c.alpha, off,
         off, c.W2_min_eig;
  c.W_min_eig = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(c.W).eigenvalues().minCoeff();

  c.delta = delta;
  c.integral_limit = g.kz.empty() ? 0.0 : *std::min_element(g.kz.begin(), g.kz.end()) * g.sigma;
  c.integral_feasible = delta < c.integral_limit;
  return c;
}

/// Throws CertificateFailed naming every violated inequality.
inline void require_pass(const Certificate& c) {
  const auto failed = c.failures();
  if (failed.empty()) return;
  std::string msg = "failed:";
  for (const auto& f : failed) msg += " " + f;
  throw Error(ErrorCode::kCertificateFailed, msg);
}

/// One "key: value" line per field.
inline std::string to_report(const Certificate& c) {
  std::ostringstream os;
  os << std::setprecision(10);
  auto yes_no = [](bool b) { return b ? "true" : "false"; };
  os << "hurwitz_margin: " << c.hurwitz_margin << '\n'
     << "lyap_residual: " << c.lyap_residual << '\n'
     << "P_min_eig: " << c.P_min_eig << '\n'
     << "P_max_eig: " << c.P_max_eig << '\n'
     << "lambda_min_Q: " << c.lambda_min_Q << '\n'
     << "c2: " << c.c2 << '\n'
     << "c2_bound: " << c.c2_bound << '\n'
     << "W2_min_eig: " << c.W2_min_eig << '\n'
     << "W_min_eig: " << c.W_min_eig << '\n'
     << "W11: " << c.W(0, 0) << '\n'
     << "W12: " << c.W(0, 1) << '\n'
     << "delta: " << c.delta << '\n'
     << "integral_limit: " << c.integral_limit << '\n'
     << "integral_feasible: " << yes_no(c.integral_feasible) << '\n'
     << "psi1: " << c.psi1 << '\n'
     << "psi2: " << c.psi2 << '\n'
     << "B1: " << c.B1 << '\n'
     << "B2: " << c.B2 << '\n'
     << "c3: " << c.c3 << '\n'
     << "alpha: " << c.alpha << '\n'
     << "Kmax: " << c.Kmax << '\n'
     << "Kzm: " << c.Kzm << '\n';
  const auto failed = c.failures();
  os << "failed:";
  if (failed.empty()) os << " none";
  for (const auto& f : failed) os << ' ' << f;
  os << '\n' << "pass: " << yes_no(failed.empty()) << '\n';
  return os.str();
}

}  // namespace gains
}  // namespace cablequad
