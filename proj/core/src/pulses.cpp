#include "blochctl/pulses.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

namespace bloch {

namespace {

constexpr double kPi = std::numbers::pi;

// Below this omega the cosh/tanh expressions are evaluated by series to avoid
// the 1 - (1 - O(omega^2)) cancellation. Both branches agree to ~1e-12 at the
// switch point.
constexpr double kSeriesOmega = 0.1;

// deficit(omega) = 1 - tanh(omega/2)/(omega/2); the arrival integral of the
// unnormalized cosh profile. Behaves like omega^2/12 near zero.
double cosh_deficit(double omega) {
  const double x = 0.5 * omega;
  if (omega < kSeriesOmega) {
    const double w = x * x;
    return w * (1.0 / 3.0 +
                w * (-2.0 / 15.0 +
                     w * (17.0 / 315.0 +
                          w * (-62.0 / 2835.0 + w * (1382.0 / 155925.0)))));
  }
  return 1.0 - std::tanh(x) / x;
}

// cosh(omega u)/cosh(omega/2) for |u| <= 1/2, overflow-safe: all exponents
// are <= 0. u is passed as t so the endpoint values come out exact.
double cosh_ratio(double omega, double t) {
  const double num = std::exp(omega * (t - 1.0)) + std::exp(-omega * t);
  const double den = 1.0 + std::exp(-omega);
  return num / den;
}

// sinh(omega u)/cosh(omega/2), same scheme.
double sinh_ratio(double omega, double t) {
  const double num = std::exp(omega * (t - 1.0)) - std::exp(-omega * t);
  const double den = 1.0 + std::exp(-omega);
  return num / den;
}

}  // namespace

std::string_view family_name(PulseFamily f) {
  switch (f) {
    case PulseFamily::B1: return "b1";
    case PulseFamily::B2: return "b2";
    case PulseFamily::B3: return "b3";
    case PulseFamily::CN: return "cn";
    case PulseFamily::Sine: return "sine";
    case PulseFamily::Custom: return "custom";
  }
  throw std::logic_error("family_name: unknown family");
}

PulseFamily family_from_name(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "b1") return PulseFamily::B1;
  if (lower == "b2") return PulseFamily::B2;
  if (lower == "b3") return PulseFamily::B3;
  if (lower == "cn") return PulseFamily::CN;
  if (lower == "sine") return PulseFamily::Sine;
  if (lower == "custom") return PulseFamily::Custom;
  throw std::invalid_argument("unknown pulse family '" + std::string(name) +
                              "' (expected b1, b2, b3, cn, sine or custom)");
}

double effective_angle(double theta, int branch_n) {
  if (!std::isfinite(theta) || theta < 0.0 || theta > kPi + 1e-12) {
    throw std::domain_error("effective_angle: theta must lie in [0, pi]");
  }
  return theta + 2.0 * kPi * branch_n;
}

void PulseSpec::validate() const {
  effective_angle(theta, branch_n);  // range check on theta
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw std::invalid_argument("PulseSpec: fluence weight a must be positive");
  }
  if (family == PulseFamily::B3 && (!(omega > 0.0) || !std::isfinite(omega))) {
    throw std::invalid_argument("PulseSpec: stiffness omega must be positive for b3");
  }
  if (family == PulseFamily::CN && !std::isfinite(mu)) {
    throw std::invalid_argument("PulseSpec: tilt amplitude mu must be finite");
  }
}

ConstantPulse::ConstantPulse(double theta, int branch_n)
    : amp_(effective_angle(theta, branch_n)) {}

ParabolicPulse::ParabolicPulse(double theta, int branch_n)
    : amp_(effective_angle(theta, branch_n)) {}

CoshPulse::CoshPulse(double theta, int branch_n, double omega) : omega_(omega) {
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw std::invalid_argument("CoshPulse: omega must be positive");
  }
  amp_ = effective_angle(theta, branch_n) / cosh_deficit(omega);
}

double CoshPulse::value(double t) const {
  if (omega_ < kSeriesOmega) {
    const double u = t - 0.5;
    const double w = omega_ * omega_;
    const double h2 = 0.25, u2 = u * u;
    // cosh(omega/2) - cosh(omega u), term by term; exact zero at the ends.
    const double diff = w * ((h2 - u2) / 2.0 +
                             w * ((h2 * h2 - u2 * u2) / 24.0 +
                                  w * ((h2 * h2 * h2 - u2 * u2 * u2) / 720.0 +
                                       w * (h2 * h2 * h2 * h2 - u2 * u2 * u2 * u2) / 40320.0)));
    return amp_ * diff / std::cosh(0.5 * omega_);
  }
  return amp_ * (1.0 - cosh_ratio(omega_, t));
}

double CoshPulse::derivative(double t) const {
  if (omega_ < kSeriesOmega) {
    const double v = omega_ * (t - 0.5);
    const double v2 = v * v;
    const double sh = v * (1.0 + v2 * (1.0 / 6.0 + v2 * (1.0 / 120.0 + v2 / 5040.0)));
    return -amp_ * omega_ * sh / std::cosh(0.5 * omega_);
  }
  return -amp_ * omega_ * sinh_ratio(omega_, t);
}

double CoshPulse::second_derivative(double t) const {
  return -amp_ * omega_ * omega_ * cosh_ratio(omega_, t);
}

// Split as amp (t deficit + B(t)) where the bracket
//   B(t) = (2u sinh(omega/2) - sinh(omega u)) / (omega cosh(omega/2)),
//   u = t - 1/2,
// vanishes identically at t = 0 and t = 1 in both evaluation branches, so the
// arrival value inherits the exact deficit used to set amp_ and lands on
// theta' to a rounding.
double CoshPulse::accumulated(double t) const {
  const double u = t - 0.5;
  const double deficit = cosh_deficit(omega_);
  if (omega_ < kSeriesOmega) {
    const double v = 2.0 * u;
    const double v2 = v * v;
    const double w = 0.25 * omega_ * omega_;
    // sum_{k>=1} w^k (1 - v^{2k}) / (2k+1)!; every factor is exactly zero at
    // the endpoints where v^2 = 1.
    const double sum = w * ((1.0 - v2) / 6.0 +
                            w * ((1.0 - v2 * v2) / 120.0 +
                                 w * ((1.0 - v2 * v2 * v2) / 5040.0 +
                                      w * (1.0 - v2 * v2 * v2 * v2) / 362880.0)));
    const double bracket = u * sum / std::cosh(0.5 * omega_);
    return amp_ * (t * deficit + bracket);
  }
  // sinh_ratio(omega, 0) is the bitwise negation of sinh_ratio(omega, 1), so
  // the bracket cancels exactly at both ends.
  const double tanh_like = sinh_ratio(omega_, 1.0);
  const double bracket = (2.0 * u * tanh_like - sinh_ratio(omega_, t)) / omega_;
  return amp_ * (t * deficit + bracket);
}

SinePulse::SinePulse(double theta, int branch_n)
    : amp_(0.5 * kPi * effective_angle(theta, branch_n)) {}

double SinePulse::value(double t) const { return amp_ * std::sin(kPi * t); }
double SinePulse::derivative(double t) const { return amp_ * kPi * std::cos(kPi * t); }
double SinePulse::second_derivative(double t) const {
  return -amp_ * kPi * kPi * std::sin(kPi * t);
}
double SinePulse::accumulated(double t) const {
  return amp_ * (1.0 - std::cos(kPi * t)) / kPi;
}

std::unique_ptr<ScalarPulse> make_scalar_pulse(const PulseSpec& spec) {
  spec.validate();
  switch (spec.family) {
    case PulseFamily::B1:
      return std::make_unique<ConstantPulse>(spec.theta, spec.branch_n);
    case PulseFamily::B2:
      return std::make_unique<ParabolicPulse>(spec.theta, spec.branch_n);
    case PulseFamily::B3:
      return std::make_unique<CoshPulse>(spec.theta, spec.branch_n, spec.omega);
    case PulseFamily::Sine:
      return std::make_unique<SinePulse>(spec.theta, spec.branch_n);
    case PulseFamily::CN:
    case PulseFamily::Custom:
      break;
  }
  throw std::invalid_argument("make_scalar_pulse: family has no scalar profile");
}

void ControlSchedule::validate() const {
  if (t.size() < 3 || t.size() != b.size()) {
    throw std::invalid_argument("ControlSchedule: need matching t/b arrays, >= 3 samples");
  }
  if (std::abs(t.front()) > 1e-12 || std::abs(t.back() - 1.0) > 1e-12) {
    throw std::invalid_argument("ControlSchedule: grid must span [0, 1]");
  }
  const double h = 1.0 / static_cast<double>(t.size() - 1);
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (std::abs(t[k] - h * static_cast<double>(k)) > 1e-9) {
      throw std::invalid_argument("ControlSchedule: grid must be uniform");
    }
    if (!b[k].finite()) {
      throw std::invalid_argument("ControlSchedule: non-finite control sample");
    }
  }
}

ControlSchedule sample_schedule(const ScalarPulse& pulse, const UnitAxis& axis, int grid_n) {
  if (grid_n < 2) throw std::invalid_argument("sample_schedule: need grid_n >= 2");
  ControlSchedule out;
  out.t.resize(grid_n + 1);
  out.b.resize(grid_n + 1);
  for (int k = 0; k <= grid_n; ++k) {
    const double t = static_cast<double>(k) / grid_n;
    out.t[k] = t;
    out.b[k] = axis.vec() * pulse.value(t);
  }
  return out;
}

ControlSchedule sample_schedule(const std::function<ControlVector(double)>& field, int grid_n) {
  if (grid_n < 2) throw std::invalid_argument("sample_schedule: need grid_n >= 2");
  ControlSchedule out;
  out.t.resize(grid_n + 1);
  out.b.resize(grid_n + 1);
  for (int k = 0; k <= grid_n; ++k) {
    const double t = static_cast<double>(k) / grid_n;
    out.t[k] = t;
    out.b[k] = field(t);
  }
  return out;
}

Trajectory rotation_trajectory(const BlochVector& s_i, const UnitAxis& axis,
                               const std::function<double(double)>& accumulated_angle,
                               int grid_n) {
  require_pure(s_i, "rotation_trajectory");
  if (grid_n < 2) throw std::invalid_argument("rotation_trajectory: need grid_n >= 2");
  Trajectory out;
  out.t.resize(grid_n + 1);
  out.s.resize(grid_n + 1);
  for (int k = 0; k <= grid_n; ++k) {
    const double t = static_cast<double>(k) / grid_n;
    out.t[k] = t;
    out.s[k] = rotate(s_i, axis, accumulated_angle(t));
  }
  return out;
}

Trajectory closed_form_trajectory(const BlochVector& s_i, const BlochVector& s_f,
                                  const std::function<double(double)>& accumulated_angle,
                                  int grid_n) {
  const double theta = angle_between(s_i, s_f);
  const double sin_theta = std::sin(theta);
  if (std::abs(sin_theta) < kAxisDegeneracyTolerance) {
    throw std::domain_error(
        "closed_form_trajectory: endpoints (anti)parallel, interpolation form is singular");
  }
  if (grid_n < 2) throw std::invalid_argument("closed_form_trajectory: need grid_n >= 2");
  const double arrival = std::remainder(accumulated_angle(1.0) - theta, 2.0 * kPi);
  if (std::abs(arrival) > 1e-6) {
    std::ostringstream msg;
    msg << "closed_form_trajectory: accumulated angle misses the endpoint angle by "
        << arrival << " (mod 2 pi)";
    throw std::invalid_argument(msg.str());
  }
  Trajectory out;
  out.t.resize(grid_n + 1);
  out.s.resize(grid_n + 1);
  for (int k = 0; k <= grid_n; ++k) {
    const double t = static_cast<double>(k) / grid_n;
    const double phi = accumulated_angle(t);
    out.t[k] = t;
    out.s[k] = (s_i * std::sin(theta - phi) + s_f * std::sin(phi)) / sin_theta;
  }
  return out;
}

ConstantNormField::ConstantNormField(const BlochVector& s_i, const BlochVector& s_f, double mu,
                                     int branch_n, int prescan_n)
    : s0_(s_i), axis_(perpendicular_axis(s_i, s_f)), mu_(mu) {
  require_pure(s_f, "ConstantNormField");
  if (!std::isfinite(mu)) throw std::invalid_argument("ConstantNormField: mu must be finite");
  theta_ = effective_angle(angle_between(s_i, s_f), branch_n);
  magnitude_ = std::abs(theta_) * std::sqrt(1.0 + mu_ * mu_);

  // The radicand of the along-s component is nonnegative in exact arithmetic;
  // scan a fine grid so a future edit that breaks this is caught loudly.
  if (prescan_n < 2) throw std::invalid_argument("ConstantNormField: prescan_n too small");
  const double scale = magnitude_ * magnitude_;
  for (int k = 0; k <= prescan_n; ++k) {
    const double t = static_cast<double>(k) / prescan_n;
    const double p = phi(t);
    const double rad =
        theta_ * theta_ * (std::sin(p) * std::sin(p) + 4.0 * mu_ * mu_ * t * (1.0 - t));
    if (rad < -1e-12 * std::max(scale, 1.0)) {
      std::ostringstream msg;
      msg << "ConstantNormField: negative tilt radicand " << rad << " at t = " << t;
      throw std::runtime_error(msg.str());
    }
  }
}

ControlVector ConstantNormField::in_plane(double t) const {
  const BlochVector s0 = rotate(s0_, axis_, theta_ * t);
  const Vec3 s_tau = cross(axis_.vec(), s0);
  const double p = phi(t);
  const double c = std::cos(p), s = std::sin(p);
  return axis_.vec() * (theta_ * c * c) - s_tau * phi_dot(t) - s0 * (theta_ * s * c);
}

double ConstantNormField::tilt(double t) const {
  const double p = phi(t);
  const double rad = std::sin(p) * std::sin(p) + 4.0 * mu_ * mu_ * t * (1.0 - t);
  return std::abs(theta_) * std::sqrt(std::max(0.0, rad));
}

BlochVector ConstantNormField::state(double t) const {
  const BlochVector s0 = rotate(s0_, axis_, theta_ * t);
  const double p = phi(t);
  return s0 * std::cos(p) + axis_.vec() * std::sin(p);
}

ControlVector ConstantNormField::control(double t) const {
  return in_plane(t) + state(t) * tilt(t);
}

}  // namespace bloch
