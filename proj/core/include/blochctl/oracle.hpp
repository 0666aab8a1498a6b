#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "blochctl/pulses.hpp"

namespace bloch {

enum class Criterion { Fluence, Rate, Mixed };

// Perturbation directions delta(t) = sum_k c_k mode_k(t), all with zero mean
// so the arrival constraint is preserved. The endpoint-vanishing flavor also
// has every mode zero at t = 0 and 1, matching the admissible class of the
// rate and mixed criteria. Modes are analytic; derivatives are exact.
class PerturbationBasis {
 public:
  // Full-period Fourier modes sqrt(2) cos(2 pi j t), sqrt(2) sin(2 pi j t).
  static PerturbationBasis zero_mean(int n_modes);
  // sin(m pi t) for even m; sin(m pi t) - sin(pi t)/m for odd m >= 3. Both
  // zero-mean with zero endpoints.
  static PerturbationBasis endpoint_vanishing(int n_modes);

  int n_modes() const { return n_modes_; }
  bool vanishing_endpoints() const { return vanishing_; }
  double mode(int k, double t) const;
  double mode_derivative(int k, double t) const;

 private:
  PerturbationBasis(int n_modes, bool vanishing);
  int n_modes_;
  bool vanishing_;
};

struct OracleSettings {
  int n_trials = 1000;
  int n_modes = 12;
  double amplitude_scale = -1.0;  // < 0 means auto: 0.3 |theta'|
  std::uint64_t seed = 42;
  int grid_n = 2000;
  int offaxis_trials = 20;       // 3-component spot check through propagation
  double offaxis_tolerance = 1e-6;
};

// Outcome of a randomized local-minimality check. A positive worst_violation
// means some perturbation beat the candidate. The certificate records the
// trials that came closest to violating, for reproduction.
struct OracleVerdict {
  double base_cost = 0.0;
  double min_perturbed_cost = 0.0;
  int n_trials = 0;
  double worst_violation = 0.0;  // base_cost - min_perturbed_cost
  double tolerance = 0.0;
  bool passed = false;

  struct CertificateEntry {
    std::vector<double> coefficients;
    double cost = 0.0;
  };
  std::vector<CertificateEntry> certificate;

  int offaxis_trials = 0;
  double offaxis_worst_violation = 0.0;
  bool offaxis_passed = true;
};

// Checks that the constant profile minimizes the fluence among perturbations
// that keep the accumulated angle. Tolerance 1e-9.
OracleVerdict verify_fluence_minimum(double theta, int branch_n,
                                     const OracleSettings& settings = {});

// Checks that the parabolic profile minimizes the rate cost among
// endpoint-vanishing perturbations. Tolerance 1e-8.
OracleVerdict verify_rate_minimum(double theta, int branch_n,
                                  const OracleSettings& settings = {});

// Checks that the cosh profile minimizes the mixed cost at (a, omega) among
// endpoint-vanishing perturbations. Tolerance 1e-8.
OracleVerdict verify_mixed_minimum(double theta, int branch_n, double a, double omega,
                                   const OracleSettings& settings = {});

// Cost of the criterion's reference profile perturbed by the given mode
// coefficients, using the verifier's quadrature. Exposed for tests.
double perturbed_cost(Criterion criterion, double theta, int branch_n, double a, double omega,
                      const PerturbationBasis& basis, std::span<const double> coefficients,
                      int grid_n = 2000);

// Small equality-constrained quadratic program solved by a dense KKT system:
// minimizes the discretized criterion over scalar profiles on grid_m samples
// subject to trapezoid arrival (and endpoint zeros for Rate/Mixed). Kept
// deliberately independent of the closed-form pulse families.
struct DiscreteMinimizer {
  std::vector<double> t;
  std::vector<double> b;
};

DiscreteMinimizer direct_discrete_minimizer(Criterion criterion, double theta, int branch_n,
                                            int grid_m, double a = 1.0, double omega = 5.0);

}  // namespace bloch
