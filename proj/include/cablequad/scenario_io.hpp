#pragma once

// JSON scenario files. A file may name a preset ("preset": "paper-sim") and
// override any subset of fields; unknown keys are rejected.
//
// Keys: name, preset, duration, dt_int, dt_ctrl, dt_log, enable_integral,
// Q_scale, x0, v0, R0 (9 row-major values), Omega0, xd, link_init
// ({"q": [[..],..], "w": [[..],..]}), params {m, J (9 values), link_masses,
// link_lengths, g, delta_x, delta_R}, gains {kx, kdx, kq, kw, kz, kR,
// kOmega, kI, c1, c2, sigma, b1d}.

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cablequad/error.hpp"
#include "cablequad/simharness.hpp"

namespace cablequad::io {

using Json = nlohmann::json;

namespace detail {

[[noreturn]] inline void bad(const std::string& msg) { throw Error(ErrorCode::kInvalidScenario, msg); }

inline void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) bad(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) bad("unknown key '" + key + "' in " + where);
  }
}

inline double number(const Json& j, const std::string& key) {
  if (!j.is_number()) bad("'" + key + "' must be a number");
  return j.get<double>();
}

inline std::vector<double> numbers(const Json& j, const std::string& key) {
  if (!j.is_array()) bad("'" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(number(v, key));
  return out;
}

inline Vec3 vec3(const Json& j, const std::string& key) {
  const auto v = numbers(j, key);
  if (v.size() != 3) bad("'" + key + "' must have 3 entries");
  return Vec3(v[0], v[1], v[2]);
}

inline Mat3 mat3(const Json& j, const std::string& key) {
  const auto v = numbers(j, key);
  if (v.size() != 9) bad("'" + key + "' must have 9 row-major entries");
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m(r, c) = v[static_cast<std::size_t>(3 * r + c)];
  }
  return m;
}

inline std::vector<Vec3> vec3_list(const Json& j, const std::string& key) {
  if (!j.is_array()) bad("'" + key + "' must be an array of 3-vectors");
  std::vector<Vec3> out;
  for (const auto& v : j) out.push_back(vec3(v, key));
  return out;
}

inline Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

inline Json to_json(const Mat3& m) {
  Json a = Json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) a.push_back(m(r, c));
  }
  return a;
}

inline Json to_json(const std::vector<Vec3>& vs) {
  Json a = Json::array();
  for (const auto& v : vs) a.push_back(to_json(v));
  return a;
}

inline void apply_params(const Json& j, SystemParams& p) {
  check_keys(j, {"m", "J", "link_masses", "link_lengths", "g", "delta_x", "delta_R"}, "params");
  if (j.contains("m")) p.m = number(j["m"], "m");
  if (j.contains("J")) p.J = mat3(j["J"], "J");
  if (j.contains("link_masses")) p.link_masses = numbers(j["link_masses"], "link_masses");
  if (j.contains("link_lengths")) p.link_lengths = numbers(j["link_lengths"], "link_lengths");
  if (j.contains("g")) p.g = number(j["g"], "g");
  if (j.contains("delta_x")) p.delta_x = vec3(j["delta_x"], "delta_x");
  if (j.contains("delta_R")) p.delta_R = vec3(j["delta_R"], "delta_R");
}

inline void apply_gains(const Json& j, GainSet& g) {
  check_keys(j, {"kx", "kdx", "kq", "kw", "kz", "kR", "kOmega", "kI", "c1", "c2", "sigma", "b1d"}, "gains");
  if (j.contains("kx")) g.kx = number(j["kx"], "kx");
  if (j.contains("kdx")) g.kdx = number(j["kdx"], "kdx");
  if (j.contains("kq")) g.kq = numbers(j["kq"], "kq");
  if (j.contains("kw")) g.kw = numbers(j["kw"], "kw");
  if (j.contains("kz")) g.kz = numbers(j["kz"], "kz");
  if (j.contains("kR")) g.kR = number(j["kR"], "kR");
  if (j.contains("kOmega")) g.kOmega = number(j["kOmega"], "kOmega");
  if (j.contains("kI")) g.kI = number(j["kI"], "kI");
  if (j.contains("c1")) g.c1 = number(j["c1"], "c1");
  if (j.contains("c2")) g.c2 = number(j["c2"], "c2");
  if (j.contains("sigma")) g.sigma = number(j["sigma"], "sigma");
  if (j.contains("b1d")) g.b1d = vec3(j["b1d"], "b1d");
}

}  // namespace detail

inline Scenario scenario_from_json(const Json& j) {
  using namespace detail;
  check_keys(j,
             {"name", "preset", "params", "gains", "x0", "v0", "R0", "Omega0", "link_init", "xd", "duration",
              "dt_int", "dt_ctrl", "dt_log", "enable_integral", "Q_scale"},
             "scenario");
  Scenario sc;
  if (j.contains("preset")) {
    if (!j["preset"].is_string()) bad("'preset' must be a string");
    sc = sim::preset(j["preset"].get<std::string>());
  }
  if (j.contains("name")) {
    if (!j["name"].is_string()) bad("'name' must be a string");
    sc.name = j["name"].get<std::string>();
  }
  if (j.contains("params")) apply_params(j["params"], sc.params);
  if (j.contains("gains")) apply_gains(j["gains"], sc.gains);
  if (j.contains("x0")) sc.x0 = vec3(j["x0"], "x0");
  if (j.contains("v0")) sc.v0 = vec3(j["v0"], "v0");
  if (j.contains("R0")) sc.R0 = mat3(j["R0"], "R0");
  if (j.contains("Omega0")) sc.Omega0 = vec3(j["Omega0"], "Omega0");
  if (j.contains("xd")) sc.xd = vec3(j["xd"], "xd");
  if (j.contains("link_init")) {
    const Json& li = j["link_init"];
    check_keys(li, {"q", "w"}, "link_init");
    if (li.contains("q")) sc.q0 = vec3_list(li["q"], "link_init.q");
    if (li.contains("w")) {
      sc.w0 = vec3_list(li["w"], "link_init.w");
    } else if (li.contains("q")) {
      sc.w0.assign(sc.q0.size(), Vec3::Zero());
    }
  }
  if (j.contains("duration")) sc.duration = number(j["duration"], "duration");
  if (j.contains("dt_int")) sc.dt_int = number(j["dt_int"], "dt_int");
  if (j.contains("dt_ctrl")) sc.dt_ctrl = number(j["dt_ctrl"], "dt_ctrl");
  if (j.contains("dt_log")) sc.dt_log = number(j["dt_log"], "dt_log");
  if (j.contains("enable_integral")) {
    if (!j["enable_integral"].is_boolean()) bad("'enable_integral' must be true or false");
    sc.enable_integral = j["enable_integral"].get<bool>();
  }
  if (j.contains("Q_scale")) sc.Q_scale = number(j["Q_scale"], "Q_scale");
  sc.validate();
  return sc;
}

inline Json scenario_to_json(const Scenario& sc) {
  using detail::to_json;
  Json j;
  j["name"] = sc.name;
  j["params"] = {{"m", sc.params.m},
                 {"J", to_json(sc.params.J)},
                 {"link_masses", sc.params.link_masses},
                 {"link_lengths", sc.params.link_lengths},
                 {"g", sc.params.g},
                 {"delta_x", to_json(sc.params.delta_x)},
                 {"delta_R", to_json(sc.params.delta_R)}};
  const GainSet& g = sc.gains;
  j["gains"] = {{"kx", g.kx}, {"kdx", g.kdx}, {"kq", g.kq},         {"kw", g.kw},         {"kz", g.kz},
                {"kR", g.kR}, {"kOmega", g.kOmega}, {"kI", g.kI}, {"c1", g.c1}, {"c2", g.c2},
                {"sigma", g.sigma}, {"b1d", to_json(g.b1d)}};
  j["x0"] = to_json(sc.x0);
  j["v0"] = to_json(sc.v0);
  j["R0"] = to_json(sc.R0);
  j["Omega0"] = to_json(sc.Omega0);
  j["xd"] = to_json(sc.xd);
  j["link_init"] = {{"q", to_json(sc.q0)}, {"w", to_json(sc.w0)}};
  j["duration"] = sc.duration;
  j["dt_int"] = sc.dt_int;
  j["dt_ctrl"] = sc.dt_ctrl;
  j["dt_log"] = sc.dt_log;
  j["enable_integral"] = sc.enable_integral;
  j["Q_scale"] = sc.Q_scale;
  return j;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open scenario file " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidScenario, path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

inline void save_scenario(const Scenario& sc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  out << scenario_to_json(sc).dump(2) << '\n';
}

}  // namespace cablequad::io
