#pragma once

// Closed-loop simulation: scenario definition, fixed-step loop, trajectory
// log, summary metrics and CSV / plot-script export.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cablequad/controller.hpp"
#include "cablequad/dynamics.hpp"
#include "cablequad/error.hpp"
#include "cablequad/gains.hpp"
#include "cablequad/geom.hpp"
#include "cablequad/linearize.hpp"
#include "cablequad/model.hpp"

namespace cablequad {

struct Scenario {
  std::string name = "custom";
  SystemParams params;
  GainSet gains;
  Vec3 x0 = Vec3::Zero();
  Vec3 v0 = Vec3::Zero();
  Mat3 R0 = Mat3::Identity();
  Vec3 Omega0 = Vec3::Zero();
  std::vector<Vec3> q0;
  std::vector<Vec3> w0;
  Vec3 xd = Vec3::Zero();
  double duration = 10.0;
  double dt_int = 1e-3;
  double dt_ctrl = 1e-3;
  double dt_log = 0.0;  // 0 means dt_ctrl
  bool enable_integral = true;
  double Q_scale = 1.0;  // Lyapunov weight Q = Q_scale * I

  double log_period() const { return dt_log > 0.0 ? dt_log : dt_ctrl; }

  void validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidScenario, msg); };
    params.validate();
    gains.validate(params.n());
    if (q0.size() != params.n() || w0.size() != params.n()) fail("link_init must give one direction and rate per link");
    for (const Vec3& q : q0) {
      if (!geom::is_unit(q, 1e-9)) fail("link_init directions must be unit vectors");
    }
    if (!geom::is_rotation(R0, 1e-9)) fail("R0 must be a rotation matrix");
    if (!(duration > 0.0)) fail("duration must be positive");
    if (!(dt_int > 0.0 && dt_ctrl > 0.0)) fail("time steps must be positive");
    if (dt_int > dt_ctrl * (1.0 + 1e-12)) fail("dt_int must not exceed dt_ctrl");
    if (!(Q_scale > 0.0)) fail("Q_scale must be positive");
    auto is_multiple = [](double a, double b) {
      const double r = a / b;
      return std::abs(r - std::round(r)) < 1e-6 && std::round(r) >= 1.0;
    };
    if (!is_multiple(dt_ctrl, dt_int)) fail("dt_ctrl must be an integer multiple of dt_int");
    if (!is_multiple(log_period(), dt_int)) fail("dt_log must be an integer multiple of dt_int");
    if (!is_multiple(duration, dt_int)) fail("duration must be an integer multiple of dt_int");
  }

  /// Initial state with (q_i, w_i) projected onto the constraint manifold.
  SystemState initial_state() const {
    SystemState s;
    s.x = x0;
    s.v = v0;
    s.R = R0;
    s.Omega = Omega0;
    s.q = q0;
    s.w = w0;
    for (std::size_t i = 0; i < s.n(); ++i) std::tie(s.q[i], s.w[i]) = geom::renormalize(s.q[i], s.w[i]);
    return s;
  }

  GainSet effective_gains() const { return enable_integral ? gains : gains.without_integral(); }
};

namespace sim {

/// q_i(0) = rotation of e3 about e2 by the given angles (degrees).
inline std::vector<Vec3> curved_links(const std::vector<double>& angles_deg) {
  std::vector<Vec3> q;
  q.reserve(angles_deg.size());
  for (double deg : angles_deg) q.push_back(geom::axis_angle(kE2, deg * std::numbers::pi / 180.0) * kE3);
  return q;
}

/// Five-link reference scenario with the fixed disturbances active.
/// The cable's initial curvature is not given numerically; the links start
/// at 60, 50, 40, 30, 20 degrees from e3 about e2.
inline Scenario reference_scenario() {
  Scenario sc;
  sc.name = "paper-sim";
  sc.params = reference_params();
  sc.gains = reference_gains();
  sc.x0 = Vec3(0.6, -0.7, 0.2);
  sc.q0 = curved_links({60.0, 50.0, 40.0, 30.0, 20.0});
  sc.w0.assign(5, Vec3::Zero());
  sc.xd = Vec3::Zero();
  sc.duration = 10.0;
  sc.dt_int = 1e-3;
  sc.dt_ctrl = 1e-3;
  return sc;
}

/// Reference system at rest in the hanging equilibrium at x_d, no disturbances.
inline Scenario equilibrium_scenario() {
  Scenario sc = reference_scenario();
  sc.name = "equilibrium";
  sc.params.delta_x.setZero();
  sc.params.delta_R.setZero();
  sc.x0 = sc.xd;
  sc.q0.assign(5, kE3);
  return sc;
}

inline Scenario preset(const std::string& name) {
  if (name == "paper-sim") return reference_scenario();
  if (name == "equilibrium") return equilibrium_scenario();
  throw Error(ErrorCode::kInvalidScenario, "unknown preset '" + name + "'");
}

struct Sample {
  double t = 0.0;
  SystemState state;
  ControlInput u;
  Vec3 A = Vec3::Zero();
  Mat3 Rc = Mat3::Identity();
  double e_q = 0.0;
  double e_w = 0.0;
  double Psi = 0.0;
  double eR_norm = 0.0;
  double eW_norm = 0.0;
  double E = 0.0;
  double V_lyap = 0.0;
  double ex_norm = 0.0;  // controller integrals; not exported
  double eI_norm = 0.0;
};

struct TrajectoryLog {
  std::size_t n = 0;
  std::vector<Sample> samples;
  double max_d_norm = 0.0;  // peak ||(2J - tr(J) I) R^T Rc Omega_c|| over all control updates
  std::vector<std::string> warnings;
};

/// 2 * integral of (B Kz sat(mu) - B dx) . dmu along the segment from `from` to `to`.
inline double integral_potential(const VecX& from, const VecX& to, const MatX& Kz, const Vec3& delta_x, double sigma) {
  auto antideriv = [sigma](double y) {
    const double a = std::abs(y);
    return a <= sigma ? 0.5 * y * y : sigma * a - 0.5 * sigma * sigma;
  };
  VecX mean_sat(from.size());
  for (Eigen::Index j = 0; j < from.size(); ++j) {
    const double d = to(j) - from(j);
    mean_sat(j) = std::abs(d) > 1e-14 ? (antideriv(to(j)) - antideriv(from(j))) / d
                                      : std::clamp(from(j), -sigma, sigma);
  }
  const Vec3 force = Kz * mean_sat - delta_x;
  return 2.0 * force.dot((to - from).head<3>());
}

/// Composite Lyapunov value V1 + V2 at one sample. Integral terms are
/// omitted when the corresponding integral gain is zero.
inline double lyapunov_value(const ControlOutput& out, const ControllerState& cs, const ControllerConfig& cfg,
                             const SystemParams& p, const SystemState& s) {
  const GainSet& g = cfg.gains;
  double v1 = out.z1.dot(cfg.P * out.z1);
  const double kz0 = g.kz.empty() ? 0.0 : g.kz.front();
  if (kz0 > 0.0) {
    VecX p_eq = VecX::Zero(cs.ex.size());
    p_eq.head<3>() = p.delta_x / kz0;
    v1 += integral_potential(p_eq, cs.ex, g.Kz(), p.delta_x, g.sigma);
  }
  double v2 = 0.5 * out.eOmega.dot(p.J * out.eOmega) + g.kR * attitude_error_psi(s.R, out.Rc) +
              g.c2 * out.eR.dot(out.eOmega);
  if (g.kI > 0.0) v2 += 0.5 * g.kI * (cs.eI - p.delta_R / g.kI).squaredNorm();
  return v1 + v2;
}

inline Sample make_sample(double t, const SystemState& s, const ControlOutput& out, const ControllerState& cs,
                          const ControllerConfig& cfg, const SystemParams& p) {
  Sample smp;
  smp.t = t;
  smp.state = s;
  smp.u = out.u;
  smp.A = out.A;
  smp.Rc = out.Rc;
  const LinkErrors le = link_errors(s);
  smp.e_q = le.e_q;
  smp.e_w = le.e_w;
  smp.Psi = attitude_error_psi(s.R, out.Rc);
  smp.eR_norm = out.eR.norm();
  smp.eW_norm = out.eOmega.norm();
  smp.E = total_energy(s, p).E;
  smp.V_lyap = lyapunov_value(out, cs, cfg, p, s);
  smp.ex_norm = cs.ex.norm();
  smp.eI_norm = cs.eI.norm();
  return smp;
}

inline TrajectoryLog run(const Scenario& sc) {
  sc.validate();
  const SystemParams& p = sc.params;
  const std::size_t n = p.n();
  const GainSet g = sc.effective_gains();
  const MatX q = sc.Q_scale * MatX::Identity(static_cast<Eigen::Index>(4 * n + 6), static_cast<Eigen::Index>(4 * n + 6));
  const ControllerConfig cfg = controller::make_config(p, g, sc.xd, sc.dt_ctrl, q);

  const auto steps = static_cast<long>(std::llround(sc.duration / sc.dt_int));
  const auto ctrl_every = static_cast<long>(std::llround(sc.dt_ctrl / sc.dt_int));
  const auto log_every = static_cast<long>(std::llround(sc.log_period() / sc.dt_int));
  const Mat3 d_map = 2.0 * p.J - p.J.trace() * Mat3::Identity();

  TrajectoryLog log;
  log.n = n;
  {
    gains::CertifyOptions opts;
    opts.Q = q;
    const gains::Certificate cert =
        gains::certify(linearize::build_linear_model(p), g, p, p.delta_x.cwiseAbs().maxCoeff(), opts);
    for (const auto& f : cert.failures()) log.warnings.push_back("certificate check failed: " + f);
  }
  log.samples.reserve(static_cast<std::size_t>(steps / log_every + 1));
  SystemState s = sc.initial_state();
  ControllerState cs = ControllerState::zero(n);
  ControllerState cs_at_update = cs;
  ControlOutput held;

  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * sc.dt_int;
    try {
      if (k % ctrl_every == 0) {
        cs_at_update = cs;
        held = controller::control_step(s, cs, cfg, p, sc.dt_ctrl);
        cs = held.next;
        log.max_d_norm = std::max(log.max_d_norm, (d_map * s.R.transpose() * held.Rc * held.Omegac).norm());
      }
      if (k % log_every == 0) log.samples.push_back(make_sample(t, s, held, cs_at_update, cfg, p));
      if (k == steps) break;
      s = dynamics::rk4_step(s, held.u, p, sc.dt_int);
    } catch (const Error& e) {
      std::ostringstream os;
      os << "at t=" << t << ": " << e.what();
      throw Error(e.code(), os.str());
    }
  }
  return log;
}

struct Metrics {
  double final_position_error = 0.0;
  double final_e_q = 0.0;
  double final_e_w = 0.0;
  double final_Psi = 0.0;
  double final_eR_norm = 0.0;
  double final_eW_norm = 0.0;
  double settling_time = 0.0;  // 5% of the initial position error; infinity if never settled
  double peak_f = 0.0;
  double peak_M_norm = 0.0;
};

inline Metrics metrics(const TrajectoryLog& log, const Vec3& xd) {
  if (log.samples.empty()) throw Error(ErrorCode::kEmptyLog, "trajectory log has no samples");
  const Sample& last = log.samples.back();
  Metrics m;
  m.final_position_error = (last.state.x - xd).norm();
  m.final_e_q = last.e_q;
  m.final_e_w = last.e_w;
  m.final_Psi = last.Psi;
  m.final_eR_norm = last.eR_norm;
  m.final_eW_norm = last.eW_norm;
  for (const Sample& smp : log.samples) {
    m.peak_f = std::max(m.peak_f, smp.u.f);
    m.peak_M_norm = std::max(m.peak_M_norm, smp.u.M.norm());
  }
  const double threshold = 0.05 * (log.samples.front().state.x - xd).norm();
  m.settling_time = log.samples.front().t;
  for (auto it = log.samples.rbegin(); it != log.samples.rend(); ++it) {
    if ((it->state.x - xd).norm() > threshold) {
      m.settling_time = (it == log.samples.rbegin()) ? std::numeric_limits<double>::infinity() : std::prev(it)->t;
      break;
    }
  }
  return m;
}

inline std::string to_report(const Metrics& m) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "final_position_error: " << m.final_position_error << '\n'
     << "final_e_q: " << m.final_e_q << '\n'
     << "final_e_w: " << m.final_e_w << '\n'
     << "final_Psi: " << m.final_Psi << '\n'
     << "final_eR_norm: " << m.final_eR_norm << '\n'
     << "final_eW_norm: " << m.final_eW_norm << '\n'
     << "settling_time: " << m.settling_time << '\n'
     << "peak_f: " << m.peak_f << '\n'
     << "peak_M_norm: " << m.peak_M_norm << '\n';
  return os.str();
}

inline std::vector<std::string> csv_columns(std::size_t n) {
  std::vector<std::string> cols = {"t", "x1", "x2", "x3", "v1", "v2", "v3"};
  for (int r = 1; r <= 3; ++r) {
    for (int c = 1; c <= 3; ++c) cols.push_back("R" + std::to_string(r) + std::to_string(c));
  }
  for (const char* w : {"W1", "W2", "W3"}) cols.emplace_back(w);
  for (std::size_t i = 1; i <= n; ++i) {
    for (int k = 1; k <= 3; ++k) cols.push_back("q" + std::to_string(i) + std::to_string(k));
    for (int k = 1; k <= 3; ++k) cols.push_back("w" + std::to_string(i) + std::to_string(k));
  }
  for (const char* c : {"f", "M1", "M2", "M3", "e_q", "e_w", "Psi", "eR_norm", "eW_norm", "E", "V_lyap"}) {
    cols.emplace_back(c);
  }
  return cols;
}

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::vector<double> sample_row(const Sample& smp) {
  const SystemState& s = smp.state;
  std::vector<double> row = {smp.t, s.x.x(), s.x.y(), s.x.z(), s.v.x(), s.v.y(), s.v.z()};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) row.push_back(s.R(r, c));
  }
  row.insert(row.end(), {s.Omega.x(), s.Omega.y(), s.Omega.z()});
  for (std::size_t i = 0; i < s.n(); ++i) {
    row.insert(row.end(), {s.q[i].x(), s.q[i].y(), s.q[i].z(), s.w[i].x(), s.w[i].y(), s.w[i].z()});
  }
  row.insert(row.end(), {smp.u.f, smp.u.M.x(), smp.u.M.y(), smp.u.M.z(), smp.e_q, smp.e_w, smp.Psi, smp.eR_norm,
                         smp.eW_norm, smp.E, smp.V_lyap});
  return row;
}

inline std::filesystem::path plot_script_path(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_extension(".gp");
  return p;
}

/// Gnuplot commands regenerating the attitude / link / rate / force /
/// position / velocity panels from the CSV.
inline std::string plot_script(const std::string& csv_name, std::size_t n) {
  const auto cols = csv_columns(n);
  auto col = [&cols](const std::string& name) {
    return std::to_string(std::find(cols.begin(), cols.end(), name) - cols.begin() + 1);
  };
  std::ostringstream os;
  os << "# Usage: gnuplot " << std::filesystem::path(csv_name).replace_extension(".gp").string() << '\n'
     << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set terminal pngcairo size 1200,1400\n"
     << "set output '" << std::filesystem::path(csv_name).replace_extension(".png").string() << "'\n"
     << "set multiplot layout 3,2\n"
     << "set xlabel 't [s]'\n"
     << "data = '" << csv_name << "'\n"
     << "set title 'Attitude error function Psi'\n"
     << "plot data using " << col("t") << ':' << col("Psi") << " with lines\n"
     << "set title 'Link direction error e_q and angular velocity error e_w'\n"
     << "plot data using " << col("t") << ':' << col("e_q") << " with lines, data using " << col("t") << ':'
     << col("e_w") << " with lines\n"
     << "set title 'Quadrotor angular velocity'\n"
     << "plot for [c in '" << col("W1") << ' ' << col("W2") << ' ' << col("W3") << "'] data using "
     << col("t") << ":(column(int(c))) with lines\n"
     << "set title 'Thrust f and moment M'\n"
     << "plot for [c in '" << col("f") << ' ' << col("M1") << ' ' << col("M2") << ' ' << col("M3")
     << "'] data using " << col("t") << ":(column(int(c))) with lines\n"
     << "set title 'Quadrotor position'\n"
     << "plot for [c in '" << col("x1") << ' ' << col("x2") << ' ' << col("x3") << "'] data using " << col("t")
     << ":(column(int(c))) with lines\n"
     << "set title 'Quadrotor velocity'\n"
     << "plot for [c in '" << col("v1") << ' ' << col("v2") << ' ' << col("v3") << "'] data using " << col("t")
     << ":(column(int(c))) with lines\n"
     << "unset multiplot\n";
  return os.str();
}

/// Writes the CSV at `csv_path` and the plot script next to it (.gp).
inline void export_log(const TrajectoryLog& log, const std::filesystem::path& csv_path) {
  {
    std::ofstream out(csv_path);
    if (!out) throw Error(ErrorCode::kIoError, "cannot open " + csv_path.string() + " for writing");
    const auto cols = csv_columns(log.n);
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const Sample& smp : log.samples) {
      const auto row = sample_row(smp);
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
      out << '\n';
    }
    if (!out) throw Error(ErrorCode::kIoError, "write to " + csv_path.string() + " failed");
  }
  std::ofstream gp(plot_script_path(csv_path));
  if (!gp) throw Error(ErrorCode::kIoError, "cannot write plot script next to " + csv_path.string());
  gp << plot_script(csv_path.filename().string(), log.n);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  CsvTable table;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(item);
    return parts;
  };
  if (std::getline(in, line)) table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line)) {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc()) throw Error(ErrorCode::kIoError, "malformed number '" + cell + "'");
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace sim
}  // namespace cablequad
