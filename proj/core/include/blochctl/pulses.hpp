#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "blochctl/geometry.hpp"

namespace bloch {

// Control families. B1 minimizes fluence, B2 the rate-of-change cost, B3 the
// mixed cost at stiffness omega; CN is the constant-magnitude family; Sine is
// a smooth near-optimal competitor. Custom marks schedules loaded from files.
enum class PulseFamily { B1, B2, B3, CN, Sine, Custom };

std::string_view family_name(PulseFamily f);
PulseFamily family_from_name(std::string_view name);  // throws std::invalid_argument

// Total rotation angle including full extra turns: theta + 2*pi*n.
// theta must lie in [0, pi].
double effective_angle(double theta, int branch_n);

struct PulseSpec {
  PulseFamily family = PulseFamily::B1;
  double theta = 0.0;   // principal rotation angle, in [0, pi]
  Vec3 axis = Vec3::unit_y();
  int branch_n = 0;     // winding branch; the axis never flips, n carries sign
  double a = 1.0;       // fluence weight in the mixed cost
  double omega = 5.0;   // stiffness of the mixed cost (B3 only)
  double mu = 1.0;      // tilt amplitude of the constant-norm family (CN only)

  void validate() const;  // throws std::invalid_argument on out-of-range fields
};

// Scalar pulse profile along a fixed axis. Derivatives are analytic; the
// accumulated angle is the exact integral of value over [0, t].
class ScalarPulse {
 public:
  virtual ~ScalarPulse() = default;
  virtual double value(double t) const = 0;
  virtual double derivative(double t) const = 0;
  virtual double second_derivative(double t) const = 0;
  virtual double accumulated(double t) const = 0;
};

// b(t) = theta'. Constant; jumps at the interval ends.
class ConstantPulse final : public ScalarPulse {
 public:
  ConstantPulse(double theta, int branch_n);
  double value(double) const override { return amp_; }
  double derivative(double) const override { return 0.0; }
  double second_derivative(double) const override { return 0.0; }
  double accumulated(double t) const override { return amp_ * t; }

 private:
  double amp_;
};

// b(t) = 6 theta' t (1 - t). Vanishes at both ends; minimizes the mean square
// of db/dt among arrival-preserving profiles.
class ParabolicPulse final : public ScalarPulse {
 public:
  ParabolicPulse(double theta, int branch_n);
  double value(double t) const override { return 6.0 * amp_ * t * (1.0 - t); }
  double derivative(double t) const override { return 6.0 * amp_ * (1.0 - 2.0 * t); }
  double second_derivative(double) const override { return -12.0 * amp_; }
  double accumulated(double t) const override { return amp_ * t * t * (3.0 - 2.0 * t); }

 private:
  double amp_;  // theta', so that value = 6 amp t(1-t) integrates to theta'
};

// b(t) = A (1 - cosh(omega (t - 1/2)) / cosh(omega / 2)) with A chosen so the
// integral is theta'. Interpolates between the parabolic (omega -> 0) and
// constant (omega -> infinity) profiles; minimizes the mixed cost.
class CoshPulse final : public ScalarPulse {
 public:
  CoshPulse(double theta, int branch_n, double omega);
  double value(double t) const override;
  double derivative(double t) const override;
  double second_derivative(double t) const override;
  double accumulated(double t) const override;
  double omega() const { return omega_; }
  double plateau() const { return amp_; }  // A = theta' / deficit(omega)

 private:
  double omega_;
  double amp_;
};

// b(t) = (pi theta' / 2) sin(pi t). Not optimal for any of the criteria, but
// close; used as a competitor in comparisons.
class SinePulse final : public ScalarPulse {
 public:
  SinePulse(double theta, int branch_n);
  double value(double t) const override;
  double derivative(double t) const override;
  double second_derivative(double t) const override;
  double accumulated(double t) const override;

 private:
  double amp_;
};

// Factory for the scalar families (B1, B2, B3, Sine). CN is vector-valued and
// Custom has no closed form; both are rejected.
std::unique_ptr<ScalarPulse> make_scalar_pulse(const PulseSpec& spec);

// Control field sampled on the uniform grid t_k = k/N, k = 0..N.
struct ControlSchedule {
  std::vector<double> t;
  std::vector<ControlVector> b;

  std::size_t size() const { return t.size(); }
  double step() const { return t.size() > 1 ? t[1] - t[0] : 0.0; }
  void validate() const;  // uniform grid on [0, 1], at least 3 samples
};

ControlSchedule sample_schedule(const ScalarPulse& pulse, const UnitAxis& axis, int grid_n);
ControlSchedule sample_schedule(const std::function<ControlVector(double)>& field, int grid_n);

struct Trajectory {
  std::vector<double> t;
  std::vector<BlochVector> s;
};

// State under a scalar pulse about a fixed axis: exact rotation of s_i by the
// accumulated angle. Valid for any geometry, including antipodal endpoints.
Trajectory rotation_trajectory(const BlochVector& s_i, const UnitAxis& axis,
                               const std::function<double(double)>& accumulated_angle,
                               int grid_n);

// Same trajectory written as an interpolation between s_i and s_f:
//   s(t) = [sin(theta - Phi(t)) s_i + sin(Phi(t)) s_f] / sin(theta).
// Requires sin(theta) away from zero; Phi(1) must equal theta up to full turns.
Trajectory closed_form_trajectory(const BlochVector& s_i, const BlochVector& s_f,
                                  const std::function<double(double)>& accumulated_angle,
                                  int grid_n);

// Constant-magnitude control family. The in-plane rotation is tilted out of
// the plane by the angle phi(t) = theta' mu t (1 - t) and a component along s
// is added so that |b(t)| is constant in time, equal to |theta'| sqrt(1 + mu^2)
// with theta' the effective angle. mu = 0 reduces to the constant pulse.
class ConstantNormField {
 public:
  ConstantNormField(const BlochVector& s_i, const BlochVector& s_f, double mu,
                    int branch_n = 0, int prescan_n = 20000);

  ControlVector control(double t) const;  // full field, constant magnitude
  ControlVector in_plane(double t) const; // field before the along-s component
  BlochVector state(double t) const;      // exact trajectory
  double tilt(double t) const;            // size of the along-s component
  double magnitude() const { return magnitude_; }
  const UnitAxis& axis() const { return axis_; }
  double theta() const { return theta_; }
  double mu() const { return mu_; }

 private:
  double phi(double t) const { return theta_ * mu_ * t * (1.0 - t); }
  double phi_dot(double t) const { return theta_ * mu_ * (1.0 - 2.0 * t); }

  BlochVector s0_;       // in-plane reference trajectory start
  UnitAxis axis_;        // plane normal
  double theta_ = 0.0;
  double mu_ = 0.0;
  double magnitude_ = 0.0;
};

}  // namespace bloch
