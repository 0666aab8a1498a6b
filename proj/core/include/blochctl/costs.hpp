#pragma once

#include <optional>

#include "blochctl/pulses.hpp"

namespace bloch {

// Aggregate cost diagnostics for one control. fluence and rate_cost carry no
// prefactor; mixed_cost carries the full 1/(2a) prefactor.
struct CostReport {
  double fluence = 0.0;            // integral of |b|^2
  double rate_cost = 0.0;          // integral of |db/dt|^2
  double mixed_cost = 0.0;         // (1/2a) integral of |b|^2 + |db/dt|^2 / omega^2
  double path_length = 0.0;        // polyline length of the trajectory
  double accumulated_angle = 0.0;  // signed swept angle
  double mean_magnitude = 0.0;     // integral of |b|
  bool endpoint_jump = false;      // control does not vanish at t = 0 or 1
};

double fluence(const ControlSchedule& schedule);
double fluence(const ScalarPulse& pulse, int grid_n = 2000);

// The derivative of a schedule is a finite difference; the pulse overload
// differentiates analytically. B1's value is 0: the derivative is taken on
// the open interval, endpoint jumps are not differentiated.
double rate_cost(const ControlSchedule& schedule);
double rate_cost(const ScalarPulse& pulse, int grid_n = 2000);

double mixed_cost(const ControlSchedule& schedule, double a, double omega);
double mixed_cost(const ScalarPulse& pulse, double a, double omega, int grid_n = 2000);

double path_length(const Trajectory& trajectory);

// Mixed cost rewritten over the swept angle phi:
//   S = (1/2a) int_0^{Phi(1)} b(phi) [1 + (db/dphi)^2 / omega^2] dphi.
// Requires a sign-definite pulse (monotone Phi). The endpoint singularities
// of db/dphi for pulses vanishing at t = 0, 1 are removed by substituting
// phi = Phi(1) sin^2(pi u / 2), which makes the integrand analytic in u.
double geometric_cost(const ScalarPulse& pulse, double a, double omega, int grid_n = 2000);

CostReport cost_report(const ScalarPulse& pulse, const Trajectory& trajectory, double a,
                       double omega, int grid_n = 2000);

// Schedule variant. When an axis is supplied the accumulated angle is the
// signed sweep about it, otherwise the unsigned integral of |b| is reported.
CostReport cost_report(const ControlSchedule& schedule, const Trajectory& trajectory, double a,
                       double omega, const std::optional<UnitAxis>& axis = std::nullopt);

}  // namespace bloch
