#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "blochctl/geometry.hpp"
#include "blochctl/pulses.hpp"

namespace bloch {

struct PropagationResult {
  Trajectory trajectory;
  BlochVector final_state;
  std::optional<double> final_error;  // |s(1) - target| when a target is given
  double norm_drift = 0.0;            // max over samples of ||s_k| - 1|
};

using ControlFunction = std::function<ControlVector(double)>;

// Fixed-step RK4 for ds/dt = b(t) x s on the uniform grid t_k = k/N. The
// control is evaluated analytically at step midpoints. Per-step
// renormalization is off by default so norm_drift stays a real diagnostic.
PropagationResult propagate(const BlochVector& s0, const ControlFunction& field, int grid_n,
                            const std::optional<BlochVector>& target = std::nullopt,
                            bool renormalize = false);

// Same integrator driven by a sampled schedule; midpoint values come from
// four-point cubic interpolation (one-sided at the ends).
PropagationResult propagate(const BlochVector& s0, const ControlSchedule& schedule,
                            const std::optional<BlochVector>& target = std::nullopt,
                            bool renormalize = false);

// State and costate of the stationarity system b = a s x lambda, under which
// |s|, |lambda| and dot(s, lambda) are conserved.
struct ELState {
  BlochVector s;
  Vec3 lambda;
};

struct ELTrajectory {
  std::vector<double> t;
  std::vector<ELState> states;
  double s_norm_drift = 0.0;
  double lambda_norm_drift = 0.0;
  double overlap_drift = 0.0;  // drift of dot(s, lambda)
};

// Integrates the reduced linear form of the stationarity system,
//   ds/dt = a (-cos(theta) s + lambda),  dlambda/dt = a (-s + cos(theta) lambda),
// with cos(theta) frozen at the initial overlap. Both vectors must be unit.
ELTrajectory propagate_el(const ELState& initial, double a, int grid_n = 2000);

// Coefficient matrix of the closed-form solution of the reduced system,
// row-major {m_ss, m_sl, m_ls, m_ll}; unit determinant for every t.
std::array<double, 4> el_propagator_matrix(double theta, double a, double t);

// Closed-form state of the reduced system at time t. Degenerate when s and
// lambda are (anti)parallel.
ELState closed_form_el(const ELState& initial, double a, double t);

inline Vec3 el_control(const ELState& st, double a) { return cross(st.s, st.lambda) * a; }

// Exact (s, lambda) evolution under a scalar pulse about a fixed axis: both
// vectors rotate rigidly by the accumulated angle.
ELTrajectory el_trajectory_under_pulse(const ELState& initial, const ScalarPulse& pulse,
                                       const UnitAxis& axis, int grid_n);

// Recovers the control from a trajectory, b = s x ds/dt / |s|^2 - tilt(t) s.
// Any along-s component is gauge: it drops out of the dynamics. Derivatives
// are second-order finite differences, so at least 100 intervals are required.
ControlSchedule invert_bloch(const Trajectory& trajectory,
                             const std::function<double(double)>& tilt = nullptr);

// Multiplier Omega^2 for which the parabolic pulse satisfies the second-order
// optimality system: 12 theta' / sin(theta). Negative on descending branches;
// undefined for sin(theta) = 0.
double parabolic_rate_multiplier(double theta, int branch_n);

// Residuals of the rate-optimality conditions along a control:
//   d2b/dt2 = -Omega^2 s x lambda        (dynamical residual)
//   d3b/dt3 = b x d2b/dt2                (third-order residual)
// plus the spread of |d2b/dt2| around its mean, zero at optima.
struct ControlOdeReport {
  double dynamical_residual = 0.0;
  double third_order_residual = 0.0;
  double curvature_norm_spread = 0.0;
};

// Schedule route: every derivative is a finite difference, so the residuals
// carry an O(h^2) + roundoff floor.
ControlOdeReport control_ode_residual(const ControlSchedule& schedule, const ELTrajectory& el,
                                      double rate_omega_sq);

// Pulse route: the dynamical residual still differentiates sampled values,
// but the norm-constancy and third-order checks use the analytic second
// derivative, which is not FD-noise-limited.
ControlOdeReport control_ode_residual(const ScalarPulse& pulse, const UnitAxis& axis,
                                      const ELTrajectory& el, double rate_omega_sq);

}  // namespace bloch
