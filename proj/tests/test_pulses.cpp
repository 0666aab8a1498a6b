#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "blochctl/pulses.hpp"
#include "testutil.hpp"

using namespace bloch;

namespace {

// Central-difference probe used to cross-check analytic derivatives.
double fd(const std::function<double(double)>& f, double t, double h = 1e-6) {
  return (f(t + h) - f(t - h)) / (2.0 * h);
}

}  // namespace

TEST_SUITE("pulses") {

TEST_CASE("effective_angle adds full turns and validates the base angle") {
  CHECK(effective_angle(1.0, 0) == doctest::Approx(1.0));
  CHECK(effective_angle(1.0, 2) == doctest::Approx(1.0 + 4 * std::numbers::pi));
  CHECK(effective_angle(0.5, -1) == doctest::Approx(0.5 - 2 * std::numbers::pi));
  CHECK_NOTHROW(effective_angle(std::numbers::pi, 0));
  CHECK_THROWS_AS(effective_angle(-0.1, 0), std::domain_error);
  CHECK_THROWS_AS(effective_angle(3.2, 0), std::domain_error);
}

TEST_CASE("family names round-trip") {
  for (auto f : {PulseFamily::B1, PulseFamily::B2, PulseFamily::B3, PulseFamily::CN,
                 PulseFamily::Sine}) {
    CHECK(family_from_name(family_name(f)) == f);
  }
  CHECK(family_from_name("B3") == PulseFamily::B3);
  CHECK_THROWS_AS(family_from_name("b9"), std::invalid_argument);
}

TEST_CASE("constant pulse") {
  const ConstantPulse p(2.0, 1);
  const double th = 2.0 + 2 * std::numbers::pi;
  CHECK(p.value(0.3) == doctest::Approx(th));
  CHECK(p.derivative(0.7) == 0.0);
  CHECK(p.second_derivative(0.2) == 0.0);
  CHECK(p.accumulated(0.25) == doctest::Approx(0.25 * th));
  CHECK(p.accumulated(1.0) == doctest::Approx(th));
}

TEST_CASE("parabolic pulse matches its closed forms") {
  const double theta = 2.5;
  for (int n : {-1, 0, 2}) {
    const ParabolicPulse p(theta, n);
    const double th = effective_angle(theta, n);
    CHECK(p.value(0.0) == 0.0);
    CHECK(p.value(1.0) == 0.0);
    CHECK(p.value(0.5) == doctest::Approx(1.5 * th));
    CHECK(p.accumulated(1.0) == doctest::Approx(th));
    for (double t : {0.1, 0.37, 0.5, 0.82}) {
      CHECK(p.value(t) == doctest::Approx(6.0 * th * t * (1.0 - t)));
      CHECK(p.accumulated(t) == doctest::Approx(th * t * t * (3.0 - 2.0 * t)));
      CHECK(p.second_derivative(t) == doctest::Approx(-12.0 * th));
    }
    for (double t : {0.1, 0.37, 0.82}) {  // derivative vanishes at t = 1/2
      CHECK(testutil::rel_err(p.derivative(t), fd([&](double x) { return p.value(x); }, t)) <
            1e-8);
    }
  }
}

TEST_CASE("sine pulse closed forms") {
  const SinePulse p(1.2, 0);
  CHECK(p.value(0.5) == doctest::Approx(std::numbers::pi * 1.2 / 2));
  CHECK(p.value(0.0) == doctest::Approx(0.0));
  CHECK(p.accumulated(1.0) == doctest::Approx(1.2));
  CHECK(p.accumulated(0.5) == doctest::Approx(0.6));
  CHECK(testutil::rel_err(p.derivative(0.3), fd([&](double t) { return p.value(t); }, 0.3)) <
        1e-8);
}

TEST_CASE("cosh plateau pulse: exact endpoint zeros and exact arrival") {
  const double theta = 2.0;
  for (double omega : {1e-4, 0.03, 0.099, 0.101, 0.7, 5.0, 50.0, 500.0, 5000.0}) {
    for (int n : {0, 2}) {
      const CoshPulse p(theta, n, omega);
      const double th = effective_angle(theta, n);
      CHECK(p.value(0.0) == 0.0);
      CHECK(p.value(1.0) == 0.0);
      CHECK(p.accumulated(0.0) == 0.0);
      CHECK(testutil::rel_err(p.accumulated(1.0), th) < 1e-13);
      // midpoint value against the amplitude prefactor A = theta'/deficit:
      // b(1/2) = A (1 - 1/cosh(omega/2)), which is A itself once the plateau
      // saturates
      if (omega <= 100.0) {
        // 1 - 1/cosh(x) written cancellation-free as 2 sinh^2(x/2)/cosh(x)
        const double sh = std::sinh(0.25 * omega);
        const double want = p.plateau() * 2.0 * sh * sh / std::cosh(0.5 * omega);
        CHECK(testutil::rel_err(p.value(0.5), want) < 1e-11);
      } else {
        CHECK(testutil::rel_err(p.value(0.5), p.plateau()) < 1e-13);
      }
      // symmetric about t = 1/2
      CHECK(testutil::rel_err(p.value(0.2), p.value(0.8)) < 1e-12);
    }
  }
}

TEST_CASE("cosh pulse agrees across the series/exponential seam") {
  // omega gap small enough that the genuine d/d(omega) dependence is far
  // below the bound; any residual difference is branch disagreement
  const double theta = 1.0;
  const CoshPulse below(theta, 0, 0.1 * (1.0 - 1e-9));
  const CoshPulse above(theta, 0, 0.1 * (1.0 + 1e-9));
  for (double t : {0.0, 0.1, 0.33, 0.5, 0.91, 1.0}) {
    CHECK(std::abs(below.value(t) - above.value(t)) < 1e-10);
    CHECK(std::abs(below.accumulated(t) - above.accumulated(t)) < 1e-10);
  }
  // and the exact small-omega limit is the parabola
  const CoshPulse tiny(theta, 0, 1e-5);
  const ParabolicPulse para(theta, 0);
  for (double t : {0.1, 0.5, 0.77}) {
    CHECK(std::abs(tiny.value(t) - para.value(t)) < 1e-9);
  }
}

TEST_CASE("cosh pulse derivatives match finite differences") {
  for (double omega : {0.05, 2.0, 40.0}) {
    const CoshPulse p(2.5, 1, omega);
    for (double t : {0.15, 0.85}) {  // first derivative vanishes at t = 1/2
      CHECK(testutil::rel_err(p.derivative(t), fd([&](double x) { return p.value(x); }, t)) <
            1e-6);
    }
    for (double t : {0.15, 0.5, 0.85}) {
      CHECK(testutil::rel_err(p.second_derivative(t),
                              fd([&](double x) { return p.derivative(x); }, t)) < 1e-6);
      CHECK(testutil::rel_err(p.value(t),
                              fd([&](double x) { return p.accumulated(x); }, t)) < 1e-6);
    }
  }
}

TEST_CASE("accumulated angle equals the independently integrated pulse") {
  // adaptive quadrature from testutil, not the library integrator
  const double theta = 2.5;
  std::vector<std::unique_ptr<ScalarPulse>> pulses;
  pulses.push_back(std::make_unique<ConstantPulse>(theta, -1));
  pulses.push_back(std::make_unique<ParabolicPulse>(theta, 1));
  pulses.push_back(std::make_unique<CoshPulse>(theta, 2, 50.0));
  pulses.push_back(std::make_unique<CoshPulse>(theta, 0, 0.02));
  pulses.push_back(std::make_unique<SinePulse>(theta, 1));
  for (const auto& p : pulses) {
    const double integral =
        testutil::integrate([&](double t) { return p->value(t); }, 0.0, 1.0);
    CHECK(testutil::rel_err(integral, p->accumulated(1.0)) < 1e-11);
    // interior consistency too
    const double half = testutil::integrate([&](double t) { return p->value(t); }, 0.0, 0.4);
    CHECK(std::abs(half - p->accumulated(0.4)) < 1e-11 * std::abs(p->accumulated(1.0)));
  }
}

TEST_CASE("make_scalar_pulse dispatches and rejects non-scalar families") {
  PulseSpec spec;
  spec.theta = 1.0;
  spec.family = PulseFamily::B3;
  spec.omega = 7.0;
  auto p = make_scalar_pulse(spec);
  CHECK(dynamic_cast<CoshPulse*>(p.get()) != nullptr);
  CHECK(dynamic_cast<CoshPulse*>(p.get())->omega() == doctest::Approx(7.0));
  spec.family = PulseFamily::CN;
  CHECK_THROWS_AS(make_scalar_pulse(spec), std::invalid_argument);
  spec.family = PulseFamily::Custom;
  CHECK_THROWS_AS(make_scalar_pulse(spec), std::invalid_argument);
}

TEST_CASE("pulse spec validation") {
  PulseSpec spec;
  spec.theta = 1.0;
  CHECK_NOTHROW(spec.validate());
  // the stiffness only matters for the plateau family
  spec.family = PulseFamily::B3;
  spec.omega = -1.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.omega = 5.0;
  CHECK_NOTHROW(spec.validate());
  spec.a = 0.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("sample_schedule produces a valid uniform grid") {
  const ParabolicPulse p(1.5, 0);
  const UnitAxis y(Vec3::unit_y());
  ControlSchedule sched = sample_schedule(p, y, 200);
  CHECK(sched.size() == 201);
  CHECK(sched.t.front() == 0.0);
  CHECK(sched.t.back() == 1.0);
  CHECK(sched.step() == doctest::Approx(1.0 / 200));
  CHECK_NOTHROW(sched.validate());
  CHECK(sched.b[100].y == doctest::Approx(1.5 * 1.5));
  CHECK(sched.b[100].x == 0.0);

  sched.t[50] += 1e-3;  // break uniformity
  CHECK_THROWS_AS(sched.validate(), std::invalid_argument);

  ControlSchedule tiny;
  tiny.t = {0.0, 1.0};
  tiny.b = {Vec3{}, Vec3{}};
  CHECK_THROWS_AS(tiny.validate(), std::invalid_argument);
}

TEST_CASE("rotation_trajectory sweeps the accumulated angle") {
  const BlochVector si = Vec3::unit_z();
  const UnitAxis y(Vec3::unit_y());
  const ParabolicPulse p(2.0, 0);
  const Trajectory traj =
      rotation_trajectory(si, y, [&](double t) { return p.accumulated(t); }, 100);
  REQUIRE(traj.s.size() == 101);
  CHECK((traj.s.front() - si).norm() < 1e-15);
  for (int k = 0; k <= 100; ++k) {
    const Vec3 want = rotate(si, y, p.accumulated(traj.t[k]));
    CHECK((traj.s[k] - want).norm() < 1e-14);
  }
}

TEST_CASE("closed_form_trajectory validates arrival and degeneracy") {
  const BlochVector si = Vec3::unit_z();
  const BlochVector sf = Vec3::unit_x();
  const ParabolicPulse good(std::numbers::pi / 2, 1);
  CHECK_NOTHROW(closed_form_trajectory(
      si, sf, [&](double t) { return good.accumulated(t); }, 50));
  // accumulated angle that misses the target angle mod 2 pi
  CHECK_THROWS_AS(closed_form_trajectory(si, sf, [](double t) { return 0.3 * t; }, 50),
                  std::invalid_argument);
  // antipodal target has no unique great circle
  CHECK_THROWS_AS(closed_form_trajectory(
                      si, BlochVector{0, 0, -1},
                      [](double t) { return std::numbers::pi * t; }, 50),
                  std::domain_error);
}

TEST_CASE("constant-norm family: endpoints, norm, tilt profile") {
  const BlochVector si = Vec3::unit_z();
  const BlochVector sf{0.0, 0.6, 0.8};
  for (double mu : {0.5, 1.0, 2.0}) {
    const ConstantNormField f(si, sf, mu);
    const double th = f.theta();
    CHECK((f.state(0.0) - si).norm() < 1e-14);
    CHECK((f.state(1.0) - sf).norm() < 1e-13);
    CHECK(f.magnitude() == doctest::Approx(std::abs(th) * std::sqrt(1.0 + mu * mu)));
    CHECK(f.tilt(0.0) == doctest::Approx(0.0));
    CHECK(f.tilt(1.0) == doctest::Approx(0.0));
    for (double t : {0.0, 0.2, 0.5, 0.9, 1.0}) {
      CHECK(testutil::rel_err(f.control(t).norm(), f.magnitude()) < 1e-12);
      CHECK(testutil::rel_err(f.state(t).norm(), 1.0) < 1e-13);
    }
  }
}

TEST_CASE("constant-norm field drives its own state: b x s = ds/dt") {
  const BlochVector si = Vec3::unit_z();
  const BlochVector sf{0.6, 0.0, 0.8};
  const ConstantNormField f(si, sf, 1.3);
  const double h = 1e-6;
  for (double t : {0.1, 0.35, 0.5, 0.72, 0.95}) {
    const Vec3 ds = (f.state(t + h) - f.state(t - h)) / (2.0 * h);
    const Vec3 bxs = cross(f.control(t), f.state(t));
    CHECK((ds - bxs).norm() < 1e-8);
  }
}

TEST_CASE("constant-norm family on a winding branch still arrives") {
  const BlochVector si = Vec3::unit_z();
  const BlochVector sf = Vec3::unit_x();
  const ConstantNormField f(si, sf, 0.8, 1);
  CHECK(f.theta() == doctest::Approx(std::numbers::pi / 2 + 2 * std::numbers::pi));
  CHECK((f.state(1.0) - sf).norm() < 1e-12);
  CHECK(testutil::rel_err(f.control(0.4).norm(), f.magnitude()) < 1e-12);
}

TEST_CASE("constant-norm family with mu = 0 degenerates to the constant pulse") {
  const BlochVector si = Vec3::unit_z();
  const BlochVector sf = Vec3::unit_x();
  const ConstantNormField f(si, sf, 0.0);
  const UnitAxis axis = f.axis();
  for (double t : {0.0, 0.3, 0.8}) {
    CHECK((f.control(t) - axis.vec() * f.theta()).norm() < 1e-13);
  }
}

}  // TEST_SUITE
