#include "blochctl/costs.hpp"

#include <cmath>
#include <numbers>

#include "blochctl/numerics.hpp"

namespace bloch {

namespace {

constexpr double kPi = std::numbers::pi;

void require_weights(double a, double omega) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw std::invalid_argument("cost: fluence weight a must be positive");
  }
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw std::invalid_argument("cost: stiffness omega must be positive");
  }
}

std::vector<double> squared_norms(const std::vector<Vec3>& v) {
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = v[k].norm_squared();
  return out;
}

int even_grid(int grid_n) {
  if (grid_n < 2) throw std::invalid_argument("cost: need grid_n >= 2");
  return grid_n % 2 == 0 ? grid_n : grid_n + 1;
}

}  // namespace

double fluence(const ControlSchedule& schedule) {
  schedule.validate();
  return numerics::integrate_samples(squared_norms(schedule.b), schedule.step());
}

double fluence(const ScalarPulse& pulse, int grid_n) {
  const int n = even_grid(grid_n);
  return numerics::integrate([&](double t) { const double v = pulse.value(t); return v * v; },
                             0.0, 1.0, n);
}

double rate_cost(const ControlSchedule& schedule) {
  schedule.validate();
  const auto db = numerics::derivative_samples(schedule.b, schedule.step());
  return numerics::integrate_samples(squared_norms(db), schedule.step());
}

double rate_cost(const ScalarPulse& pulse, int grid_n) {
  const int n = even_grid(grid_n);
  return numerics::integrate(
      [&](double t) { const double d = pulse.derivative(t); return d * d; }, 0.0, 1.0, n);
}

double mixed_cost(const ControlSchedule& schedule, double a, double omega) {
  require_weights(a, omega);
  return (fluence(schedule) + rate_cost(schedule) / (omega * omega)) / (2.0 * a);
}

double mixed_cost(const ScalarPulse& pulse, double a, double omega, int grid_n) {
  require_weights(a, omega);
  return (fluence(pulse, grid_n) + rate_cost(pulse, grid_n) / (omega * omega)) / (2.0 * a);
}

double path_length(const Trajectory& trajectory) {
  if (trajectory.s.size() < 2) {
    throw std::invalid_argument("path_length: need at least 2 trajectory samples");
  }
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < trajectory.s.size(); ++k) {
    total += (trajectory.s[k + 1] - trajectory.s[k]).norm();
  }
  return total;
}

double geometric_cost(const ScalarPulse& pulse, double a, double omega, int grid_n) {
  require_weights(a, omega);
  const int n = even_grid(grid_n);

  const double total = pulse.accumulated(1.0);
  if (std::abs(total) < 1e-14) return 0.0;  // zero control, zero cost
  const double sigma = total > 0.0 ? 1.0 : -1.0;  // work with an increasing sweep
  const double span = sigma * total;

  // The geometric form needs a monotone swept angle; reject profiles that
  // change sign in the interior.
  const double peak = std::max(std::abs(pulse.value(0.5)), std::abs(pulse.value(0.25)));
  for (int k = 0; k <= 200; ++k) {
    if (sigma * pulse.value(k / 200.0) < -1e-12 * std::max(1.0, peak)) {
      throw std::domain_error("geometric_cost: pulse changes sign, swept angle not monotone");
    }
  }

  // Maps a target angle to the time where the sweep reaches it. Newton with a
  // maintained bisection bracket; the sweep is monotone so this is safe.
  auto time_at_angle = [&](double phi, double guess) {
    double lo = 0.0, hi = 1.0, t = std::clamp(guess, 0.0, 1.0);
    for (int it = 0; it < 60; ++it) {
      const double err = sigma * pulse.accumulated(t) - phi;
      if (std::abs(err) < 1e-14 * span) break;
      (err > 0.0 ? hi : lo) = t;
      const double slope = sigma * pulse.value(t);
      double next = slope > 1e-30 ? t - err / slope : 0.5 * (lo + hi);
      if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
      t = next;
    }
    return t;
  };

  const double inv_om2 = 1.0 / (omega * omega);
  // Endpoint limits: where the pulse vanishes, b(phi) ~ sqrt(2 c phi) with
  // c = |db/dt| there, and the u-integrand tends to pi c^(3/2) sqrt(span/2)/omega^2.
  auto endpoint_value = [&](double t_end) {
    const double v = sigma * pulse.value(t_end);
    const double dv = std::abs(pulse.derivative(t_end));
    if (v > 1e-9 * std::max(1.0, peak)) {
      // No singularity: dphi/du vanishes at the ends, so the sample is zero
      // unless db/dphi blows up, which needs v -> 0.
      return 0.0;
    }
    return kPi * std::pow(dv, 1.5) * std::sqrt(0.5 * span) * inv_om2;
  };

  std::vector<double> g(n + 1);
  double t_prev = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double u = static_cast<double>(k) / n;
    if (k == 0 || k == n) {
      g[k] = endpoint_value(k == 0 ? 0.0 : 1.0);
      continue;
    }
    const double s_half = std::sin(0.5 * kPi * u);
    const double phi = span * s_half * s_half;
    const double t = time_at_angle(phi, t_prev);
    t_prev = t;
    const double v = sigma * pulse.value(t);
    const double slope = pulse.derivative(t) / v;  // db/dphi, sign-squared below
    const double dphi_du = 0.5 * span * kPi * std::sin(kPi * u);
    g[k] = v * (1.0 + slope * slope * inv_om2) * dphi_du;
  }
  return numerics::integrate_samples(g, 1.0 / n) / (2.0 * a);
}

namespace {

CostReport assemble(double fl, double rate, double a, double omega, double accumulated,
                    double mean_mag, double path, double b_start, double b_end, double peak) {
  CostReport rep;
  rep.fluence = fl;
  rep.rate_cost = rate;
  rep.mixed_cost = (fl + rate / (omega * omega)) / (2.0 * a);
  rep.path_length = path;
  rep.accumulated_angle = accumulated;
  rep.mean_magnitude = mean_mag;
  const double tol = 1e-9 * std::max(1.0, peak);
  rep.endpoint_jump = b_start > tol || b_end > tol;
  return rep;
}

}  // namespace

CostReport cost_report(const ScalarPulse& pulse, const Trajectory& trajectory, double a,
                       double omega, int grid_n) {
  require_weights(a, omega);
  const int n = even_grid(grid_n);
  double peak = 0.0;
  for (int k = 0; k <= 16; ++k) peak = std::max(peak, std::abs(pulse.value(k / 16.0)));
  const double mean_mag =
      numerics::integrate([&](double t) { return std::abs(pulse.value(t)); }, 0.0, 1.0, n);
  return assemble(fluence(pulse, n), rate_cost(pulse, n), a, omega, pulse.accumulated(1.0),
                  mean_mag, path_length(trajectory), std::abs(pulse.value(0.0)),
                  std::abs(pulse.value(1.0)), peak);
}

CostReport cost_report(const ControlSchedule& schedule, const Trajectory& trajectory, double a,
                       double omega, const std::optional<UnitAxis>& axis) {
  require_weights(a, omega);
  schedule.validate();
  const double h = schedule.step();
  std::vector<double> mags(schedule.size());
  for (std::size_t k = 0; k < schedule.size(); ++k) mags[k] = schedule.b[k].norm();
  double peak = 0.0;
  for (const double m : mags) peak = std::max(peak, m);
  double accumulated;
  if (axis) {
    std::vector<double> sweep(schedule.size());
    for (std::size_t k = 0; k < schedule.size(); ++k) sweep[k] = dot(schedule.b[k], axis->vec());
    accumulated = numerics::integrate_samples(sweep, h);
  } else {
    accumulated = numerics::integrate_samples(mags, h);
  }
  return assemble(fluence(schedule), rate_cost(schedule), a, omega, accumulated,
                  numerics::integrate_samples(mags, h), path_length(trajectory),
                  mags.front(), mags.back(), peak);
}

}  // namespace bloch
