#include <filesystem>
#include <fstream>

#include "test_util.hpp"

namespace cablequad {
namespace {

TEST(ScenarioIo, PresetWithOverrides) {
  const io::Json j = io::Json::parse(R"({
    "preset": "paper-sim",
    "name": "short",
    "duration": 2.0,
    "enable_integral": false,
    "x0": [0.1, 0.2, 0.3],
    "R0": [1, 0, 0, 0, 1, 0, 0, 0, 1],
    "gains": {"kx": 10.0},
    "params": {"delta_x": [0, 0, 0]}
  })");
  const Scenario sc = io::scenario_from_json(j);
  EXPECT_EQ(sc.name, "short");
  EXPECT_EQ(sc.duration, 2.0);
  EXPECT_FALSE(sc.enable_integral);
  EXPECT_EQ(sc.x0, Vec3(0.1, 0.2, 0.3));
  EXPECT_EQ(sc.gains.kx, 10.0);
  EXPECT_EQ(sc.gains.kdx, 4.22);
  EXPECT_EQ(sc.params.delta_x, Vec3::Zero());
  EXPECT_EQ(sc.params.delta_R, Vec3(0.03, -0.02, 0.01));
}

TEST(ScenarioIo, RowMajorRotation) {
  const Mat3 r = geom::axis_angle(kE3, 0.3);
  io::Json j = io::scenario_to_json(sim::reference_scenario());
  j["R0"] = {r(0, 0), r(0, 1), r(0, 2), r(1, 0), r(1, 1), r(1, 2), r(2, 0), r(2, 1), r(2, 2)};
  EXPECT_EQ(io::scenario_from_json(j).R0, r);
}

TEST(ScenarioIo, RoundTripThroughFile) {
  Scenario sc = sim::reference_scenario();
  sc.name = "round";
  sc.gains.kq[2] = 1.234567890123456789;
  sc.dt_log = 5e-3;
  const auto path = std::filesystem::temp_directory_path() / "cablequad_scenario_round.json";
  io::save_scenario(sc, path);
  const Scenario back = io::load_scenario(path);
  EXPECT_EQ(io::scenario_to_json(back), io::scenario_to_json(sc));
  EXPECT_EQ(back.gains.kq[2], sc.gains.kq[2]);
  EXPECT_EQ(back.q0, sc.q0);
}

TEST(ScenarioIo, LinkInitDefaultsRatesToZero) {
  const io::Json j = io::Json::parse(R"({"preset": "paper-sim",
    "params": {"link_masses": [0.1, 0.1], "link_lengths": [0.2, 0.2]},
    "gains": {"kq": [1, 1], "kw": [1, 1], "kz": [1, 1, 1]},
    "link_init": {"q": [[0, 0, 1], [1, 0, 0]]}})");
  const Scenario sc = io::scenario_from_json(j);
  ASSERT_EQ(sc.w0.size(), 2u);
  EXPECT_EQ(sc.w0[1], Vec3::Zero());
  EXPECT_EQ(sc.q0[1], kE1);
}

TEST(ScenarioIo, RejectsMalformedInput) {
  EXPECT_THROW_CODE(io::scenario_from_json(io::Json::parse(R"({"bogus": 1})")), ErrorCode::kInvalidScenario);
  EXPECT_THROW_CODE(io::scenario_from_json(io::Json::parse(R"({"preset": "paper-sim", "x0": [1, 2]})")),
                    ErrorCode::kInvalidScenario);
  EXPECT_THROW_CODE(io::scenario_from_json(io::Json::parse(R"({"preset": "paper-sim", "duration": "long"})")),
                    ErrorCode::kInvalidScenario);
  EXPECT_THROW_CODE(io::scenario_from_json(io::Json::parse(R"({"preset": "paper-sim", "gains": {"kk": 1}})")),
                    ErrorCode::kInvalidScenario);
  EXPECT_THROW_CODE(io::scenario_from_json(io::Json::parse(R"({"preset": "mars"})")), ErrorCode::kInvalidScenario);
  EXPECT_THROW_CODE(io::load_scenario("/nonexistent_dir/s.json"), ErrorCode::kIoError);
  const auto path = std::filesystem::temp_directory_path() / "cablequad_bad.json";
  std::ofstream(path) << "{ not json";
  EXPECT_THROW_CODE(io::load_scenario(path), ErrorCode::kInvalidScenario);
}

}  // namespace
}  // namespace cablequad
