#pragma once

// Command-line front end. Exit codes: 0 success, 1 failed certificate,
// failed validation or numerical failure during a run, 2 bad input.

#include <algorithm>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cablequad/cablequad.hpp"

namespace cablequad::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitBadInput = 2;

struct Command {
  std::string verb;
  std::string scenario_path;  // empty: the paper-sim preset
  std::string out_dir = ".";
  bool no_integral = false;
  std::optional<double> dt_int;
  std::optional<double> dt_ctrl;
  std::optional<double> duration;
  std::uint64_t seed = 1;
};

inline const std::vector<std::string>& verbs() {
  static const std::vector<std::string> v = {"simulate", "linearize", "certify", "validate", "demo-paper"};
  return v;
}

inline Scenario resolve_scenario(const Command& cmd) {
  Scenario sc = cmd.scenario_path.empty() ? sim::reference_scenario() : io::load_scenario(cmd.scenario_path);
  if (cmd.no_integral) sc.enable_integral = false;
  if (cmd.dt_int) sc.dt_int = *cmd.dt_int;
  if (cmd.dt_ctrl) sc.dt_ctrl = *cmd.dt_ctrl;
  if (cmd.duration) sc.duration = *cmd.duration;
  sc.validate();
  return sc;
}

inline std::filesystem::path out_path(const Command& cmd, const std::string& file) {
  std::filesystem::create_directories(cmd.out_dir);
  return std::filesystem::path(cmd.out_dir) / file;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  out << text;
}

inline void dump_matrix(std::ostream& os, const std::string& name, const MatX& m) {
  os << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? " " : "") << sim::format_double(m(r, c));
    os << '\n';
  }
}

inline std::string simulate_and_export(const Scenario& sc, const Command& cmd, const std::string& stem,
                                       std::ostream& err, sim::Metrics* out_metrics = nullptr) {
  const sim::TrajectoryLog log = sim::run(sc);
  for (const auto& w : log.warnings) err << "warning: " << w << '\n';
  sim::export_log(log, out_path(cmd, stem + ".csv"));
  const sim::Metrics m = sim::metrics(log, sc.xd);
  if (out_metrics) *out_metrics = m;
  const std::string report = "scenario: " + sc.name + "\nintegral: " + (sc.enable_integral ? "on" : "off") + "\n" +
                             sim::to_report(m);
  write_text(out_path(cmd, stem + "_metrics.txt"), report);
  return report;
}

inline int do_simulate(const Command& cmd, std::ostream& out, std::ostream& err) {
  const Scenario sc = resolve_scenario(cmd);
  out << simulate_and_export(sc, cmd, sc.name, err);
  return kExitOk;
}

inline int do_linearize(const Command& cmd, std::ostream& out) {
  const Scenario sc = resolve_scenario(cmd);
  const LinearModel lm = linearize::build_linear_model(sc.params);
  const GainSet g = sc.effective_gains();
  const ClosedLoopModel cl = linearize::closed_loop(lm, g.Kx(), g.Kdx());
  std::ostringstream os;
  dump_matrix(os, "M", lm.M);
  dump_matrix(os, "G", lm.G);
  dump_matrix(os, "B", lm.B);
  dump_matrix(os, "A_closed", cl.Abb);
  dump_matrix(os, "B_closed", cl.Bbb);
  Eigen::EigenSolver<MatX> es(cl.Abb, false);
  std::vector<std::complex<double>> ev(es.eigenvalues().begin(), es.eigenvalues().end());
  std::sort(ev.begin(), ev.end(), [](auto a, auto b) { return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag(); });
  os << "eigenvalues " << ev.size() << " 2\n";
  for (const auto& e : ev) os << sim::format_double(e.real()) << ' ' << sim::format_double(e.imag()) << '\n';
  write_text(out_path(cmd, "linearization.txt"), os.str());
  out << "spectral_abscissa: " << gains::spectral_abscissa(cl.Abb) << '\n'
      << "written: " << out_path(cmd, "linearization.txt").string() << '\n';
  return kExitOk;
}

inline int do_certify(const Command& cmd, std::ostream& out, std::ostream& err) {
  const Scenario sc = resolve_scenario(cmd);
  const GainSet g = sc.effective_gains();
  gains::CertifyOptions opts;
  const auto dim = static_cast<Eigen::Index>(4 * sc.params.n() + 6);
  opts.Q = sc.Q_scale * MatX::Identity(dim, dim);
  // B2 bounds ||(2J - tr(J) I) R^T Rc Omega_c||; take the peak of the nominal run.
  opts.B2 = sim::run(sc).max_d_norm;
  const gains::Certificate c = gains::certify(linearize::build_linear_model(sc.params), g, sc.params,
                                              sc.params.delta_x.cwiseAbs().maxCoeff(), opts);
  const std::string report = gains::to_report(c);
  write_text(out_path(cmd, "certificate.txt"), report);
  out << report;
  if (!c.passed()) {
    err << "certificate failed\n";
    return kExitFailed;
  }
  return kExitOk;
}

inline int do_validate(const Command& cmd, std::ostream& out) {
  const Scenario sc = resolve_scenario(cmd);
  int failures = 0;
  std::ostringstream os;
  os << std::setprecision(4) << std::scientific;
  auto line = [&](bool ok, const std::string& name, double value, double limit) {
    os << (ok ? "PASS " : "FAIL ") << name << ": " << value << " (limit " << limit << ")\n";
    if (!ok) ++failures;
  };

  double diff = 0.0;
  double asym = 0.0;
  for (std::size_t n : {1u, 2u, 5u}) {
    const auto r = validation::formulation_equivalence(n, 200, cmd.seed + n);
    diff = std::max(diff, r.max_accel_diff);
    asym = std::max(asym, r.max_asymmetry);
  }
  line(diff < 1e-9, "formulation_equivalence", diff, 1e-9);
  line(asym < 1e-12, "omega_form_symmetry", asym, 1e-12);

  SystemParams free = sc.params;
  free.delta_x.setZero();
  free.delta_R.setZero();
  const auto fm = validation::free_motion(free, validation::free_motion_initial_state(free.n()), 2.0, 1e-3);
  line(fm.max_rel_energy_drift < 1e-4, "energy_drift", fm.max_rel_energy_drift, 1e-4);
  line(fm.max_horizontal_momentum_change < 1e-8, "horizontal_momentum", fm.max_horizontal_momentum_change, 1e-8);
  line(fm.max_vertical_momentum_rel_error < 1e-6, "vertical_momentum", fm.max_vertical_momentum_rel_error, 1e-6);

  const GainSet g = sc.effective_gains();
  const auto [open, closed] = validation::linearization_errors(sc.params, g, 1e-6);
  line(open < 1e-4, "linearization_open_loop", open, 1e-4);
  line(closed < 1e-4, "linearization_closed_loop", closed, 1e-4);

  const sim::TrajectoryLog log = sim::run(sc);
  const auto [unit, ortho] = validation::constraint_errors(log);
  line(unit < 1e-12, "link_unit_norm", unit, 1e-12);
  line(ortho < 1e-9, "link_rate_orthogonality", ortho, 1e-9);
  const auto ident = validation::controller_identities(log, g.b1d);
  line(ident.max_thrust_identity_error < 1e-12, "thrust_identity", ident.max_thrust_identity_error, 1e-12);
  line(ident.max_scaling_error < 1e-12, "attitude_scale_invariance", ident.max_scaling_error, 1e-12);

  Scenario eq = sc;
  eq.params.delta_x.setZero();
  eq.params.delta_R.setZero();
  eq.x0 = eq.xd;
  eq.v0.setZero();
  eq.R0.setIdentity();
  eq.Omega0.setZero();
  eq.q0.assign(eq.params.n(), kE3);
  eq.w0.assign(eq.params.n(), Vec3::Zero());
  const double dev = validation::equilibrium_deviation(sim::run(eq), eq.xd);
  line(dev < 1e-6, "equilibrium_fixed_point", dev, 1e-6);

  os << (failures == 0 ? "validation passed" : "validation failed: " + std::to_string(failures) + " check(s)") << '\n';
  out << os.str();
  write_text(out_path(cmd, "validation.txt"), os.str());
  return failures == 0 ? kExitOk : kExitFailed;
}

inline int do_demo_paper(const Command& cmd, std::ostream& out, std::ostream& err) {
  Scenario sc = resolve_scenario(cmd);
  sim::Metrics without;
  sim::Metrics with;
  sc.enable_integral = false;
  simulate_and_export(sc, cmd, sc.name + "_no_integral", err, &without);
  sc.enable_integral = true;
  simulate_and_export(sc, cmd, sc.name + "_integral", err, &with);

  std::ostringstream os;
  os << std::setprecision(6);
  os << "# " << sc.name << ": effect of the integral term under fixed disturbances\n"
     << std::left << std::setw(24) << "metric" << std::setw(16) << "no_integral" << "integral\n";
  auto row = [&os](const std::string& name, double a, double b) {
    os << std::setw(24) << name << std::setw(16) << a << b << '\n';
  };
  row("final_position_error", without.final_position_error, with.final_position_error);
  row("final_e_q", without.final_e_q, with.final_e_q);
  row("final_e_w", without.final_e_w, with.final_e_w);
  row("final_Psi", without.final_Psi, with.final_Psi);
  row("final_eR_norm", without.final_eR_norm, with.final_eR_norm);
  row("final_eW_norm", without.final_eW_norm, with.final_eW_norm);
  row("settling_time", without.settling_time, with.settling_time);
  row("peak_f", without.peak_f, with.peak_f);
  row("peak_M_norm", without.peak_M_norm, with.peak_M_norm);
  write_text(out_path(cmd, "demo_paper_report.txt"), os.str());
  out << os.str();
  return kExitOk;
}

inline int dispatch(const Command& cmd, std::ostream& out, std::ostream& err) {
  if (cmd.verb == "simulate") return do_simulate(cmd, out, err);
  if (cmd.verb == "linearize") return do_linearize(cmd, out);
  if (cmd.verb == "certify") return do_certify(cmd, out, err);
  if (cmd.verb == "validate") return do_validate(cmd, out);
  if (cmd.verb == "demo-paper") return do_demo_paper(cmd, out, err);
  throw Error(ErrorCode::kInvalidScenario, "unknown verb '" + cmd.verb + "'");
}

inline bool is_input_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::kInvalidParams:
    case ErrorCode::kInvalidScenario:
    case ErrorCode::kIoError:
    case ErrorCode::kNotSkewSymmetric:
    case ErrorCode::kDegenerateVector:
      return true;
    default:
      return false;
  }
}

/// Parses argv and runs the command; returns the process exit status.
inline int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Command cmd;
  CLI::App app{"Quadrotor with a flexible cable: simulation, linearization and stability certificates",
               "cablequad"};
  app.add_option("verb", cmd.verb, "simulate | linearize | certify | validate | demo-paper")->required();
  app.add_option("--scenario", cmd.scenario_path, "Scenario JSON file (default: the paper-sim preset)");
  app.add_option("--out", cmd.out_dir, "Output directory")->capture_default_str();
  app.add_flag("--no-integral", cmd.no_integral, "Disable integral action (k_I = 0, K_z = 0)");
  app.add_option("--dt-int", cmd.dt_int, "Integration step [s]");
  app.add_option("--dt-ctrl", cmd.dt_ctrl, "Controller period [s]");
  app.add_option("--duration", cmd.duration, "Simulated time [s]");
  app.add_option("--seed", cmd.seed, "Seed for randomized validation")->capture_default_str();
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kExitBadInput;
  }
  if (std::find(verbs().begin(), verbs().end(), cmd.verb) == verbs().end()) {
    err << "error: unknown verb '" << cmd.verb << "'\n" << app.help();
    return kExitBadInput;
  }
  try {
    return dispatch(cmd, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_input_error(e.code()) ? kExitBadInput : kExitFailed;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
}

}  // namespace cablequad::cli
