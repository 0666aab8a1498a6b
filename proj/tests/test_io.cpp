#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "blochctl/costs.hpp"
#include "blochctl/dynamics.hpp"
#include "blochctl/io.hpp"
#include "testutil.hpp"

using namespace bloch;
namespace fs = std::filesystem;

namespace {

// Scratch file helper; everything lands under the test working directory.
struct TempFile {
  fs::path path;
  explicit TempFile(const std::string& name) : path(fs::path("io_scratch") / name) {
    fs::create_directories(path.parent_path());
  }
  ~TempFile() {
    std::error_code ec;
    fs::remove(path, ec);
  }
  void write(const std::string& content) const {
    std::ofstream f(path, std::ios::binary);
    f << content;
  }
};

io::FileSpec demo_spec() {
  io::FileSpec spec;
  spec.family = PulseFamily::B3;
  spec.theta = 1.25;
  spec.branch_n = 1;
  spec.a = 2.0;
  spec.omega = 7.5;
  spec.axis = Vec3::unit_y();
  spec.s_initial = Vec3::unit_z();
  spec.s_final = Vec3{std::sin(1.25), 0.0, std::cos(1.25)};
  spec.grid_n = 200;
  return spec;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("format_float round-trips doubles exactly") {
  for (double x : {0.1, 1.0 / 3.0, 2.9608813203275486, 1e-300, -0.0, 6.02e23,
                   std::numbers::pi}) {
    const std::string s = io::format_float(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }
}

TEST_CASE("parse_vec3 accepts triples and rejects everything else") {
  const Vec3 v = io::parse_vec3(" 0.5, -1.25 , 3e-2 ");
  CHECK(v.x == 0.5);
  CHECK(v.y == -1.25);
  CHECK(v.z == 0.03);
  CHECK_THROWS_AS(io::parse_vec3("1,2"), std::invalid_argument);
  CHECK_THROWS_AS(io::parse_vec3("1,2,3,4"), std::invalid_argument);
  CHECK_THROWS_AS(io::parse_vec3("1,foo,3"), std::invalid_argument);
  CHECK_THROWS_AS(io::parse_vec3("1,nan,3"), std::invalid_argument);
  CHECK_THROWS_AS(io::parse_vec3(""), std::invalid_argument);
}

TEST_CASE("pulse json round-trips schedule and spec") {
  const io::FileSpec spec = demo_spec();
  const CoshPulse pulse(spec.theta, spec.branch_n, spec.omega);
  const UnitAxis axis(spec.axis);
  const auto sched = sample_schedule(pulse, axis, spec.grid_n);
  const auto traj = rotation_trajectory(
      spec.s_initial, axis, [&](double t) { return pulse.accumulated(t); }, spec.grid_n);
  const auto costs = cost_report(pulse, traj, spec.a, spec.omega, spec.grid_n);

  const std::string text = io::pulse_json(spec, costs, sched, 99, {"warned"});
  // the document is well-formed json with the expected frame
  const auto doc = nlohmann::json::parse(text);
  CHECK(doc["meta"]["kind"] == "pulse");
  CHECK(doc["meta"]["version"] == io::kFileFormatVersion);
  CHECK(doc["meta"]["seed"] == 99);
  CHECK(doc["meta"]["spec"]["family"] == "b3");
  CHECK(doc["meta"]["spec"]["branch_n"] == 1);
  CHECK(doc["meta"]["warnings"][0] == "warned");
  CHECK(doc["meta"]["costs"]["fluence"].get<double>() == costs.fluence);
  CHECK(doc["samples"].size() == sched.t.size());

  TempFile tmp("roundtrip.json");
  tmp.write(text);
  const io::LoadedPulse loaded = io::load_pulse(tmp.path.string());
  REQUIRE(loaded.spec.has_value());
  CHECK(loaded.spec->family == PulseFamily::B3);
  CHECK(loaded.spec->theta == spec.theta);
  CHECK(loaded.spec->omega == spec.omega);
  CHECK((loaded.spec->s_final - spec.s_final).norm() == 0.0);
  REQUIRE(loaded.schedule.size() == sched.size());
  for (std::size_t k = 0; k < sched.size(); ++k) {
    CHECK(loaded.schedule.t[k] == sched.t[k]);
    CHECK(loaded.schedule.b[k].x == sched.b[k].x);
    CHECK(loaded.schedule.b[k].y == sched.b[k].y);
    CHECK(loaded.schedule.b[k].z == sched.b[k].z);
  }
}

TEST_CASE("schedule csv round-trips bitwise") {
  const ParabolicPulse pulse(2.0, 0);
  const auto sched = sample_schedule(pulse, UnitAxis(Vec3::unit_y()), 150);
  const std::string text = io::schedule_csv(sched);
  CHECK(text.rfind("t,bx,by,bz\n", 0) == 0);

  TempFile tmp("roundtrip.csv");
  tmp.write(text);
  const io::LoadedPulse loaded = io::load_pulse(tmp.path.string());
  CHECK_FALSE(loaded.spec.has_value());
  REQUIRE(loaded.schedule.size() == sched.size());
  for (std::size_t k = 0; k < sched.size(); ++k) {
    CHECK(loaded.schedule.b[k].y == sched.b[k].y);
  }
}

TEST_CASE("load_pulse rejects malformed input") {
  TempFile tmp("bad.csv");

  tmp.write("x,y,z\n0,0,0,0\n");
  CHECK_THROWS_AS(io::load_pulse(tmp.path.string()), io::SchemaError);

  tmp.write("t,bx,by,bz\n0,1,2\n");
  CHECK_THROWS_AS(io::load_pulse(tmp.path.string()), io::SchemaError);

  tmp.write("t,bx,by,bz\n0,1,2,inf\n0.5,1,2,3\n1,1,2,3\n");
  CHECK_THROWS_AS(io::load_pulse(tmp.path.string()), io::SchemaError);

  // non-uniform grid
  tmp.write("t,bx,by,bz\n0,1,0,0\n0.6,1,0,0\n1,1,0,0\n");
  CHECK_THROWS_AS(io::load_pulse(tmp.path.string()), io::SchemaError);

  // too few samples
  tmp.write("t,bx,by,bz\n0,1,0,0\n1,1,0,0\n");
  CHECK_THROWS_AS(io::load_pulse(tmp.path.string()), io::SchemaError);

  TempFile bad_json("bad.json");
  bad_json.write("{\"meta\": {\"kind\": \"trajectory\"}, \"samples\": []}");
  CHECK_THROWS_AS(io::load_pulse(bad_json.path.string()), io::SchemaError);
  bad_json.write("{not json");
  CHECK_THROWS_AS(io::load_pulse(bad_json.path.string()), io::SchemaError);
  CHECK_THROWS_AS(io::load_pulse("does_not_exist.json"), io::SchemaError);
}

TEST_CASE("trajectory json reports the propagation outcome") {
  const io::FileSpec spec = demo_spec();
  const ParabolicPulse pulse(spec.theta, spec.branch_n);
  const UnitAxis axis(spec.axis);
  const auto sched = sample_schedule(pulse, axis, 300);
  const auto with_target = propagate(spec.s_initial, sched,
                                     rotate(spec.s_initial, axis, pulse.accumulated(1.0)));
  std::string text = io::trajectory_json(spec, with_target, 7, {});
  auto doc = nlohmann::json::parse(text);
  CHECK(doc["meta"]["kind"] == "trajectory");
  CHECK(doc["meta"]["result"]["final_error"].is_number());
  CHECK(doc["meta"]["result"]["final_error"].get<double>() == *with_target.final_error);
  CHECK(doc["meta"]["result"]["norm_drift"].get<double>() == with_target.norm_drift);
  CHECK(doc["samples"].size() == with_target.trajectory.s.size());

  const auto no_target = propagate(spec.s_initial, sched, std::nullopt);
  text = io::trajectory_json(spec, no_target, 7, {});
  doc = nlohmann::json::parse(text);
  CHECK(doc["meta"]["result"]["final_error"].is_null());

  const std::string csv = io::trajectory_csv(no_target.trajectory);
  CHECK(csv.rfind("t,sx,sy,sz\n", 0) == 0);
  // s components are unit-norm rows
  CHECK(csv.find("nan") == std::string::npos);
}

TEST_CASE("verdict json carries settings and certificate") {
  OracleSettings s;
  s.n_trials = 25;
  s.n_modes = 6;
  s.offaxis_trials = 2;
  const auto verdict = verify_fluence_minimum(1.0, 0, s);
  const std::string text = io::verdict_json("fluence", demo_spec(), s, verdict, 42, {});
  const auto doc = nlohmann::json::parse(text);
  CHECK(doc["meta"]["kind"] == "verdict");
  CHECK(doc["meta"]["settings"]["n_trials"] == 25);
  CHECK(doc["verdict"]["passed"] == true);
  CHECK(doc["verdict"]["offaxis"]["n_trials"] == 2);
  CHECK(doc["verdict"]["certificate"].size() == 5);
  CHECK(doc["meta"]["settings"]["criterion"] == "fluence");
}

}  // TEST_SUITE
