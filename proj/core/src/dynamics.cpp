#include "blochctl/dynamics.hpp"

#include <cmath>

#include "blochctl/numerics.hpp"

namespace bloch {

namespace {

Vec3 rk4_step(const Vec3& s, double h, const Vec3& b0, const Vec3& bm, const Vec3& b1) {
  const Vec3 k1 = cross(b0, s);
  const Vec3 k2 = cross(bm, s + k1 * (0.5 * h));
  const Vec3 k3 = cross(bm, s + k2 * (0.5 * h));
  const Vec3 k4 = cross(b1, s + k3 * h);
  return s + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
}

PropagationResult finish(Trajectory traj, const std::optional<BlochVector>& target,
                         double drift) {
  PropagationResult out;
  out.final_state = traj.s.back();
  out.norm_drift = drift;
  if (target) out.final_error = (out.final_state - *target).norm();
  out.trajectory = std::move(traj);
  return out;
}

}  // namespace

PropagationResult propagate(const BlochVector& s0, const ControlFunction& field, int grid_n,
                            const std::optional<BlochVector>& target, bool renormalize) {
  require_pure(s0, "propagate");
  if (grid_n < 2) throw std::invalid_argument("propagate: need grid_n >= 2");
  if (!field) throw std::invalid_argument("propagate: empty control function");

  const double h = 1.0 / grid_n;
  Trajectory traj;
  traj.t.resize(grid_n + 1);
  traj.s.resize(grid_n + 1);
  traj.t[0] = 0.0;
  traj.s[0] = s0;
  double drift = 0.0;
  Vec3 b_left = field(0.0);
  for (int k = 0; k < grid_n; ++k) {
    const double t1 = static_cast<double>(k + 1) / grid_n;
    const Vec3 b_mid = field((static_cast<double>(k) + 0.5) * h);
    const Vec3 b_right = field(t1);
    Vec3 s = rk4_step(traj.s[k], h, b_left, b_mid, b_right);
    if (renormalize) s = s / s.norm();
    drift = std::max(drift, std::abs(s.norm() - 1.0));
    traj.t[k + 1] = t1;
    traj.s[k + 1] = s;
    b_left = b_right;
  }
  return finish(std::move(traj), target, drift);
}

PropagationResult propagate(const BlochVector& s0, const ControlSchedule& schedule,
                            const std::optional<BlochVector>& target, bool renormalize) {
  require_pure(s0, "propagate");
  schedule.validate();
  const std::size_t n = schedule.size() - 1;
  if (n < 3) throw std::invalid_argument("propagate: schedule too short for interpolation");
  const double h = 1.0 / static_cast<double>(n);
  const auto& b = schedule.b;

  // Cubic midpoint interpolation keeps the integrator at fourth order.
  auto midpoint = [&](std::size_t k) -> Vec3 {
    if (k == 0) return (b[0] * 5.0 + b[1] * 15.0 - b[2] * 5.0 + b[3]) / 16.0;
    if (k == n - 1) return (b[n] * 5.0 + b[n - 1] * 15.0 - b[n - 2] * 5.0 + b[n - 3]) / 16.0;
    return (b[k - 1] * -1.0 + b[k] * 9.0 + b[k + 1] * 9.0 - b[k + 2]) / 16.0;
  };

  Trajectory traj;
  traj.t = schedule.t;
  traj.s.resize(n + 1);
  traj.s[0] = s0;
  double drift = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    Vec3 s = rk4_step(traj.s[k], h, b[k], midpoint(k), b[k + 1]);
    if (renormalize) s = s / s.norm();
    drift = std::max(drift, std::abs(s.norm() - 1.0));
    traj.s[k + 1] = s;
  }
  return finish(std::move(traj), target, drift);
}

ELTrajectory propagate_el(const ELState& initial, double a, int grid_n) {
  require_pure(initial.s, "propagate_el");
  require_pure(initial.lambda, "propagate_el");
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw std::invalid_argument("propagate_el: weight a must be positive");
  }
  if (grid_n < 2) throw std::invalid_argument("propagate_el: need grid_n >= 2");

  const double c = dot(initial.s, initial.lambda);  // conserved overlap
  const double h = 1.0 / grid_n;
  auto rhs = [a, c](const ELState& st) -> ELState {
    return {(st.s * -c + st.lambda) * a, (st.s * -1.0 + st.lambda * c) * a};
  };

  ELTrajectory out;
  out.t.resize(grid_n + 1);
  out.states.resize(grid_n + 1);
  out.t[0] = 0.0;
  out.states[0] = initial;
  for (int k = 0; k < grid_n; ++k) {
    const ELState& st = out.states[k];
    const ELState k1 = rhs(st);
    const ELState k2 = rhs({st.s + k1.s * (0.5 * h), st.lambda + k1.lambda * (0.5 * h)});
    const ELState k3 = rhs({st.s + k2.s * (0.5 * h), st.lambda + k2.lambda * (0.5 * h)});
    const ELState k4 = rhs({st.s + k3.s * h, st.lambda + k3.lambda * h});
    ELState next;
    next.s = st.s + (k1.s + (k2.s + k3.s) * 2.0 + k4.s) * (h / 6.0);
    next.lambda = st.lambda + (k1.lambda + (k2.lambda + k3.lambda) * 2.0 + k4.lambda) * (h / 6.0);
    out.t[k + 1] = static_cast<double>(k + 1) / grid_n;
    out.states[k + 1] = next;

    out.s_norm_drift = std::max(out.s_norm_drift, std::abs(next.s.norm_squared() - 1.0));
    out.lambda_norm_drift =
        std::max(out.lambda_norm_drift, std::abs(next.lambda.norm_squared() - 1.0));
    out.overlap_drift = std::max(out.overlap_drift, std::abs(dot(next.s, next.lambda) - c));
  }
  return out;
}

std::array<double, 4> el_propagator_matrix(double theta, double a, double t) {
  const double sin_theta = std::sin(theta);
  if (std::abs(sin_theta) < 1e-12) {
    throw std::domain_error("el_propagator_matrix: sin(theta) vanishes, system degenerate");
  }
  const double x = a * t * sin_theta;
  return {std::sin(theta - x) / sin_theta, std::sin(x) / sin_theta,
          -std::sin(x) / sin_theta, std::sin(theta + x) / sin_theta};
}

ELState closed_form_el(const ELState& initial, double a, double t) {
  require_pure(initial.s, "closed_form_el");
  require_pure(initial.lambda, "closed_form_el");
  const double theta = angle_between(initial.s, initial.lambda);
  const auto m = el_propagator_matrix(theta, a, t);
  return {initial.s * m[0] + initial.lambda * m[1], initial.s * m[2] + initial.lambda * m[3]};
}

ELTrajectory el_trajectory_under_pulse(const ELState& initial, const ScalarPulse& pulse,
                                       const UnitAxis& axis, int grid_n) {
  require_pure(initial.s, "el_trajectory_under_pulse");
  require_pure(initial.lambda, "el_trajectory_under_pulse");
  if (grid_n < 2) throw std::invalid_argument("el_trajectory_under_pulse: need grid_n >= 2");
  const double c = dot(initial.s, initial.lambda);
  ELTrajectory out;
  out.t.resize(grid_n + 1);
  out.states.resize(grid_n + 1);
  for (int k = 0; k <= grid_n; ++k) {
    const double t = static_cast<double>(k) / grid_n;
    const double phi = pulse.accumulated(t);
    out.t[k] = t;
    out.states[k] = {rotate(initial.s, axis, phi), rotate(initial.lambda, axis, phi)};
    out.s_norm_drift =
        std::max(out.s_norm_drift, std::abs(out.states[k].s.norm_squared() - 1.0));
    out.lambda_norm_drift = std::max(out.lambda_norm_drift,
                                     std::abs(out.states[k].lambda.norm_squared() - 1.0));
    out.overlap_drift = std::max(out.overlap_drift,
                                 std::abs(dot(out.states[k].s, out.states[k].lambda) - c));
  }
  return out;
}

ControlSchedule invert_bloch(const Trajectory& trajectory,
                             const std::function<double(double)>& tilt) {
  const std::size_t n_samples = trajectory.t.size();
  if (n_samples < 101 || trajectory.s.size() != n_samples) {
    throw std::invalid_argument("invert_bloch: need a matching trajectory with >= 100 intervals");
  }
  const double h = 1.0 / static_cast<double>(n_samples - 1);
  for (std::size_t k = 0; k < n_samples; ++k) {
    if (std::abs(trajectory.t[k] - h * static_cast<double>(k)) > 1e-9) {
      throw std::invalid_argument("invert_bloch: trajectory grid must be uniform on [0, 1]");
    }
  }
  const auto ds = numerics::derivative_samples(trajectory.s, h);
  ControlSchedule out;
  out.t = trajectory.t;
  out.b.resize(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const Vec3& s = trajectory.s[k];
    const double n2 = s.norm_squared();
    if (n2 < 1e-12) throw std::domain_error("invert_bloch: trajectory sample has zero norm");
    out.b[k] = cross(s, ds[k]) / n2;
    if (tilt) out.b[k] -= s * tilt(out.t[k]);
  }
  return out;
}

double parabolic_rate_multiplier(double theta, int branch_n) {
  const double sin_theta = std::sin(theta);
  if (std::abs(sin_theta) < 1e-12) {
    throw std::domain_error("parabolic_rate_multiplier: sin(theta) vanishes");
  }
  return 12.0 * effective_angle(theta, branch_n) / sin_theta;
}

namespace {

ControlOdeReport residual_report(const std::vector<Vec3>& b,
                                 const std::vector<Vec3>& b_dd_for_dyn,
                                 const std::vector<Vec3>& b_dd_smooth,
                                 const ELTrajectory& el, double rate_omega_sq, double h) {
  ControlOdeReport rep;
  const std::size_t n = b.size();
  const auto b_ddd = numerics::derivative_samples(b_dd_smooth, h);
  double norm_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) norm_sum += b_dd_smooth[k].norm();
  const double norm_mean = norm_sum / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3 dyn = b_dd_for_dyn[k] + cross(el.states[k].s, el.states[k].lambda) * rate_omega_sq;
    rep.dynamical_residual = std::max(rep.dynamical_residual, dyn.norm());
    const Vec3 third = b_ddd[k] - cross(b[k], b_dd_smooth[k]);
    rep.third_order_residual = std::max(rep.third_order_residual, third.norm());
    rep.curvature_norm_spread =
        std::max(rep.curvature_norm_spread, std::abs(b_dd_smooth[k].norm() - norm_mean));
  }
  return rep;
}

void require_matching_grid(std::size_t n_control, const ELTrajectory& el) {
  if (el.t.size() != n_control || el.states.size() != n_control) {
    throw std::invalid_argument("control_ode_residual: control and state grids must match");
  }
}

}  // namespace

ControlOdeReport control_ode_residual(const ControlSchedule& schedule, const ELTrajectory& el,
                                      double rate_omega_sq) {
  schedule.validate();
  require_matching_grid(schedule.size(), el);
  const double h = schedule.step();
  const auto b_dd = numerics::second_derivative_samples(schedule.b, h);
  return residual_report(schedule.b, b_dd, b_dd, el, rate_omega_sq, h);
}

ControlOdeReport control_ode_residual(const ScalarPulse& pulse, const UnitAxis& axis,
                                      const ELTrajectory& el, double rate_omega_sq) {
  const std::size_t n_samples = el.t.size();
  if (n_samples < 4) throw std::invalid_argument("control_ode_residual: grid too short");
  require_matching_grid(n_samples, el);
  const double h = 1.0 / static_cast<double>(n_samples - 1);
  std::vector<Vec3> b(n_samples), b_dd_exact(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    b[k] = axis.vec() * pulse.value(el.t[k]);
    b_dd_exact[k] = axis.vec() * pulse.second_derivative(el.t[k]);
  }
  const auto b_dd_fd = numerics::second_derivative_samples(b, h);
  return residual_report(b, b_dd_fd, b_dd_exact, el, rate_omega_sq, h);
}

}  // namespace bloch
