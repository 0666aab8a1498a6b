#include <doctest.h>

#include <cmath>

#include "blochctl/costs.hpp"
#include "testutil.hpp"

using namespace bloch;

namespace {

Trajectory pulse_trajectory(const ScalarPulse& p, const UnitAxis& axis, int n) {
  return rotation_trajectory(Vec3::unit_z(), axis,
                             [&](double t) { return p.accumulated(t); }, n);
}

}  // namespace

TEST_SUITE("costs") {

TEST_CASE("fluence closed forms") {
  const double theta = 2.5;
  for (int n : {-1, 0, 1, 2}) {
    const double th = effective_angle(theta, n);
    CHECK(testutil::rel_err(fluence(ConstantPulse(theta, n)), th * th) < 1e-12);
    CHECK(testutil::rel_err(fluence(ParabolicPulse(theta, n)), 1.2 * th * th) < 1e-12);
    CHECK(testutil::rel_err(fluence(SinePulse(theta, n)),
                            std::numbers::pi * std::numbers::pi * th * th / 8.0) < 1e-12);
  }
  // schedule route agrees with the pulse route
  const ParabolicPulse p(theta, 1);
  const auto sched = sample_schedule(p, UnitAxis(Vec3::unit_y()), 2000);
  CHECK(testutil::rel_err(fluence(sched), fluence(p)) < 1e-10);
}

TEST_CASE("rate cost closed forms") {
  const double theta = 1.9;
  for (int n : {0, 1}) {
    const double th = effective_angle(theta, n);
    CHECK(testutil::rel_err(rate_cost(ParabolicPulse(theta, n)), 12.0 * th * th) < 1e-12);
    const double sine_rate = std::pow(std::numbers::pi, 4) * th * th / 8.0;
    CHECK(testutil::rel_err(rate_cost(SinePulse(theta, n)), sine_rate) < 1e-12);
    CHECK(rate_cost(ConstantPulse(theta, n)) == doctest::Approx(0.0));
  }
  // FD schedule route carries an O(h^2) error, not more
  const ParabolicPulse p(theta, 0);
  const auto sched = sample_schedule(p, UnitAxis(Vec3::unit_y()), 2000);
  CHECK(testutil::rel_err(rate_cost(sched), 12.0 * theta * theta) < 1e-6);
}

TEST_CASE("mixed cost composes fluence and rate with the 1/(2a) prefactor") {
  const ParabolicPulse p(1.5, 0);
  const double a = 2.0, omega = 5.0;
  const double want = (fluence(p) + rate_cost(p) / (omega * omega)) / (2.0 * a);
  CHECK(testutil::rel_err(mixed_cost(p, a, omega), want) < 1e-13);
  const auto sched = sample_schedule(p, UnitAxis(Vec3::unit_y()), 2000);
  CHECK(testutil::rel_err(mixed_cost(sched, a, omega), want) < 1e-6);
}

TEST_CASE("path length of a great-circle sweep is the accumulated angle") {
  const double theta = 2.5;
  const UnitAxis y(Vec3::unit_y());
  for (int n : {0, 1}) {
    const ParabolicPulse p(theta, n);
    const double th = effective_angle(theta, n);
    const auto traj = pulse_trajectory(p, y, 2000);
    CHECK(testutil::rel_err(path_length(traj), th) < 1e-5);
  }
}

TEST_CASE("geometric form of the mixed cost matches the time form") {
  // same functional, integrated over the swept angle instead of time; this is
  // only defined for sign-definite pulses and must handle the endpoint
  // singularity of the parabolic and cosh profiles
  const double a = 1.7, omega = 4.0;
  const double theta = 2.2;

  const ConstantPulse b1(theta, 0);
  CHECK(testutil::rel_err(geometric_cost(b1, a, omega), theta * theta / (2.0 * a)) < 1e-10);

  const ParabolicPulse b2(theta, 0);
  CHECK(testutil::rel_err(geometric_cost(b2, a, omega), mixed_cost(b2, a, omega)) < 1e-6);

  const CoshPulse b3(theta, 0, 6.0);
  CHECK(testutil::rel_err(geometric_cost(b3, a, omega), mixed_cost(b3, a, omega)) < 1e-6);

  const SinePulse sine(theta, 1);
  CHECK(testutil::rel_err(geometric_cost(sine, a, omega), mixed_cost(sine, a, omega)) < 1e-6);

  // zero pulse has zero cost by convention
  CHECK(geometric_cost(ConstantPulse(0.0, 0), a, omega) == 0.0);
}

TEST_CASE("geometric cost rejects sign-changing pulses") {
  // a pulse that overshoots and swings back has no monotone swept angle
  struct Wiggle final : ScalarPulse {
    double value(double t) const override { return std::sin(3.0 * std::numbers::pi * t); }
    double derivative(double t) const override {
      return 3.0 * std::numbers::pi * std::cos(3.0 * std::numbers::pi * t);
    }
    double second_derivative(double t) const override {
      return -9.0 * std::numbers::pi * std::numbers::pi *
             std::sin(3.0 * std::numbers::pi * t);
    }
    double accumulated(double t) const override {
      return (1.0 - std::cos(3.0 * std::numbers::pi * t)) / (3.0 * std::numbers::pi);
    }
  } wiggle;
  CHECK_THROWS_AS(geometric_cost(wiggle, 1.0, 5.0), std::domain_error);
}

TEST_CASE("cost report, pulse route") {
  const double theta = 1.5;
  const UnitAxis y(Vec3::unit_y());
  const CoshPulse p(theta, 0, 5.0);
  const auto traj = pulse_trajectory(p, y, 2000);
  const auto rep = cost_report(p, traj, 2.0, 5.0);
  CHECK(testutil::rel_err(rep.fluence, fluence(p)) < 1e-12);
  CHECK(testutil::rel_err(rep.rate_cost, rate_cost(p)) < 1e-12);
  CHECK(testutil::rel_err(rep.mixed_cost, mixed_cost(p, 2.0, 5.0)) < 1e-12);
  CHECK(rep.accumulated_angle == doctest::Approx(theta));
  CHECK(testutil::rel_err(rep.path_length, theta) < 1e-5);
  CHECK(testutil::rel_err(rep.mean_magnitude,
                          testutil::integrate([&](double t) { return p.value(t); }, 0, 1)) <
        1e-9);
  CHECK_FALSE(rep.endpoint_jump);

  const ConstantPulse flat(theta, 0);
  const auto rep1 = cost_report(flat, pulse_trajectory(flat, y, 500), 1.0, 5.0);
  CHECK(rep1.endpoint_jump);  // constant pulse switches on at t = 0
}

TEST_CASE("cost report, schedule route, axis projection") {
  const double theta = 2.0;
  const UnitAxis y(Vec3::unit_y());
  const ParabolicPulse p(theta, 0);
  const auto sched = sample_schedule(p, y, 2000);
  const auto traj = pulse_trajectory(p, y, 2000);
  const auto rep = cost_report(sched, traj, 1.0, 5.0, UnitAxis(Vec3::unit_y()));
  CHECK(testutil::rel_err(rep.fluence, 1.2 * theta * theta) < 1e-9);
  CHECK(testutil::rel_err(rep.accumulated_angle, theta) < 1e-9);
  // without an axis the angle falls back to the unsigned sweep
  const auto rep_nx = cost_report(sched, traj, 1.0, 5.0);
  CHECK(testutil::rel_err(rep_nx.accumulated_angle, theta) < 1e-9);
  CHECK(testutil::rel_err(rep_nx.mean_magnitude, theta) < 1e-9);
}

TEST_CASE("geodesic bound: path length never exceeds the integrated field norm") {
  const double theta = 2.5;
  const UnitAxis y(Vec3::unit_y());
  // perpendicular families: equality
  const ParabolicPulse p(theta, 0);
  const auto traj = pulse_trajectory(p, y, 2000);
  const auto rep = cost_report(p, traj, 1.0, 5.0);
  CHECK(rep.path_length <= rep.mean_magnitude + 1e-12);
  CHECK(rep.mean_magnitude - rep.path_length < 1e-5);
  // tilted control: strict slack
  const ConstantNormField cn(Vec3::unit_z(), Vec3::unit_x(), 1.5);
  Trajectory cn_traj;
  cn_traj.t.resize(2001);
  cn_traj.s.resize(2001);
  for (int k = 0; k <= 2000; ++k) {
    cn_traj.t[k] = k / 2000.0;
    cn_traj.s[k] = cn.state(cn_traj.t[k]);
  }
  const auto sched = sample_schedule([&](double t) { return cn.control(t); }, 2000);
  const auto cn_rep = cost_report(sched, cn_traj, 1.0, 5.0);
  CHECK(cn_rep.path_length < cn_rep.mean_magnitude - 0.05);
}

}  // TEST_SUITE
