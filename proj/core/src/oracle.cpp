#include "blochctl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "blochctl/dynamics.hpp"
#include "blochctl/numerics.hpp"

namespace bloch {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFluenceTolerance = 1e-9;
constexpr double kDerivativeTolerance = 1e-8;
constexpr double kArrivalPenalty = 1e6;

}  // namespace

PerturbationBasis::PerturbationBasis(int n_modes, bool vanishing)
    : n_modes_(n_modes), vanishing_(vanishing) {
  if (n_modes < 1 || n_modes > 64) {
    throw std::invalid_argument("PerturbationBasis: n_modes must be in [1, 64]");
  }
}

PerturbationBasis PerturbationBasis::zero_mean(int n_modes) {
  return PerturbationBasis(n_modes, false);
}

PerturbationBasis PerturbationBasis::endpoint_vanishing(int n_modes) {
  return PerturbationBasis(n_modes, true);
}

double PerturbationBasis::mode(int k, double t) const {
  if (k < 0 || k >= n_modes_) throw std::out_of_range("PerturbationBasis::mode");
  if (!vanishing_) {
    const double w = 2.0 * kPi * (k / 2 + 1);
    return k % 2 == 0 ? std::sqrt(2.0) * std::cos(w * t) : std::sqrt(2.0) * std::sin(w * t);
  }
  const int m = k + 2;
  const double base = std::sin(m * kPi * t);
  if (m % 2 == 0) return base;
  // Odd sines have nonzero mean; mixing in sin(pi t)/m restores zero mean
  // without disturbing the endpoint zeros.
  return base - std::sin(kPi * t) / m;
}

double PerturbationBasis::mode_derivative(int k, double t) const {
  if (k < 0 || k >= n_modes_) throw std::out_of_range("PerturbationBasis::mode_derivative");
  if (!vanishing_) {
    const double w = 2.0 * kPi * (k / 2 + 1);
    return k % 2 == 0 ? -std::sqrt(2.0) * w * std::sin(w * t)
                      : std::sqrt(2.0) * w * std::cos(w * t);
  }
  const int m = k + 2;
  const double base = m * kPi * std::cos(m * kPi * t);
  if (m % 2 == 0) return base;
  return base - kPi * std::cos(kPi * t) / m;
}

namespace {

// Reference profile of each criterion as an analytic pulse.
std::unique_ptr<ScalarPulse> reference_pulse(Criterion criterion, double theta, int branch_n,
                                             double omega) {
  switch (criterion) {
    case Criterion::Fluence: return std::make_unique<ConstantPulse>(theta, branch_n);
    case Criterion::Rate: return std::make_unique<ParabolicPulse>(theta, branch_n);
    case Criterion::Mixed: return std::make_unique<CoshPulse>(theta, branch_n, omega);
  }
  throw std::logic_error("reference_pulse: unknown criterion");
}

PerturbationBasis basis_for(Criterion criterion, int n_modes) {
  return criterion == Criterion::Fluence ? PerturbationBasis::zero_mean(n_modes)
                                         : PerturbationBasis::endpoint_vanishing(n_modes);
}

struct ScalarTables {
  double h = 0.0;
  std::vector<double> base_v, base_dv;
  std::vector<std::vector<double>> modes, dmodes;
  std::vector<double> val, dval, scratch;  // per-trial work buffers
};

ScalarTables build_tables(const ScalarPulse& pulse, const PerturbationBasis& basis, int grid_n) {
  if (grid_n < 8) throw std::invalid_argument("oracle: grid_n too small");
  if (grid_n % 2 != 0) ++grid_n;
  ScalarTables tab;
  const int samples = grid_n + 1;
  tab.h = 1.0 / grid_n;
  tab.base_v.resize(samples);
  tab.base_dv.resize(samples);
  for (int i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) / grid_n;
    tab.base_v[i] = pulse.value(t);
    tab.base_dv[i] = pulse.derivative(t);
  }
  tab.modes.assign(basis.n_modes(), std::vector<double>(samples));
  tab.dmodes.assign(basis.n_modes(), std::vector<double>(samples));
  for (int k = 0; k < basis.n_modes(); ++k) {
    for (int i = 0; i < samples; ++i) {
      const double t = static_cast<double>(i) / grid_n;
      tab.modes[k][i] = basis.mode(k, t);
      tab.dmodes[k][i] = basis.mode_derivative(k, t);
    }
  }
  tab.val.resize(samples);
  tab.dval.resize(samples);
  tab.scratch.resize(samples);
  return tab;
}

double tables_cost(Criterion criterion, ScalarTables& tab, std::span<const double> coeffs,
                   double a, double omega) {
  const std::size_t samples = tab.base_v.size();
  const bool needs_value = criterion != Criterion::Rate;
  const bool needs_derivative = criterion != Criterion::Fluence;
  if (needs_value) {
    tab.val = tab.base_v;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      const double c = coeffs[k];
      if (c == 0.0) continue;
      const auto& m = tab.modes[k];
      for (std::size_t i = 0; i < samples; ++i) tab.val[i] += c * m[i];
    }
  }
  if (needs_derivative) {
    tab.dval = tab.base_dv;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      const double c = coeffs[k];
      if (c == 0.0) continue;
      const auto& m = tab.dmodes[k];
      for (std::size_t i = 0; i < samples; ++i) tab.dval[i] += c * m[i];
    }
  }
  auto quad = [&](const std::vector<double>& v) {
    for (std::size_t i = 0; i < samples; ++i) tab.scratch[i] = v[i] * v[i];
    return numerics::integrate_samples(tab.scratch, tab.h);
  };
  switch (criterion) {
    case Criterion::Fluence: return quad(tab.val);
    case Criterion::Rate: return quad(tab.dval);
    case Criterion::Mixed:
      return (quad(tab.val) + quad(tab.dval) / (omega * omega)) / (2.0 * a);
  }
  throw std::logic_error("tables_cost: unknown criterion");
}

// Three-component spot check: perturb along all axes, keep arrival by a
// quadratic penalty on the propagated endpoint, and compare against the
// penalized base cost. First-order terms vanish at the optimum, so violations
// beyond the integration floor indicate a descent direction.
double offaxis_worst_violation(Criterion criterion, const ScalarPulse& pulse, double a,
                               double omega, const PerturbationBasis& basis, double amplitude,
                               const OracleSettings& settings, std::mt19937_64& rng) {
  const BlochVector s_i = Vec3::unit_z();
  const UnitAxis axis(Vec3::unit_y());
  const double theta_eff = pulse.accumulated(1.0);
  const BlochVector s_f = rotate(s_i, axis, theta_eff);
  const int k_modes = basis.n_modes();

  auto penalized_cost = [&](const std::vector<double>& c) {
    auto coeff = [&](int component, int k) { return c[component * k_modes + k]; };
    ControlFunction field = [&](double t) -> ControlVector {
      Vec3 b = axis.vec() * pulse.value(t);
      for (int comp = 0; comp < 3; ++comp) {
        double amp = 0.0;
        for (int k = 0; k < k_modes; ++k) amp += coeff(comp, k) * basis.mode(k, t);
        if (comp == 0) b.x += amp;
        if (comp == 1) b.y += amp;
        if (comp == 2) b.z += amp;
      }
      return b;
    };
    const int n = settings.grid_n % 2 == 0 ? settings.grid_n : settings.grid_n + 1;
    auto value_at = [&](int i) { return field(static_cast<double>(i) / n); };
    auto derivative_at = [&](int i) -> Vec3 {
      const double t = static_cast<double>(i) / n;
      Vec3 d = axis.vec() * pulse.derivative(t);
      for (int comp = 0; comp < 3; ++comp) {
        double amp = 0.0;
        for (int k = 0; k < k_modes; ++k) amp += coeff(comp, k) * basis.mode_derivative(k, t);
        if (comp == 0) d.x += amp;
        if (comp == 1) d.y += amp;
        if (comp == 2) d.z += amp;
      }
      return d;
    };
    std::vector<double> v2(n + 1), dv2(n + 1);
    for (int i = 0; i <= n; ++i) {
      if (criterion != Criterion::Rate) v2[i] = value_at(i).norm_squared();
      if (criterion != Criterion::Fluence) dv2[i] = derivative_at(i).norm_squared();
    }
    double cost = 0.0;
    const double h = 1.0 / n;
    switch (criterion) {
      case Criterion::Fluence: cost = numerics::integrate_samples(v2, h); break;
      case Criterion::Rate: cost = numerics::integrate_samples(dv2, h); break;
      case Criterion::Mixed:
        cost = (numerics::integrate_samples(v2, h) +
                numerics::integrate_samples(dv2, h) / (omega * omega)) /
               (2.0 * a);
        break;
    }
    const auto prop = propagate(s_i, field, n, s_f);
    return cost + kArrivalPenalty * (*prop.final_error) * (*prop.final_error);
  };

  const double base = penalized_cost(std::vector<double>(3 * k_modes, 0.0));
  double worst = 0.0;
  std::vector<double> c(3 * k_modes);
  for (int trial = 0; trial < settings.offaxis_trials; ++trial) {
    for (double& x : c) x = amplitude * numerics::symmetric_uniform(rng);
    worst = std::max(worst, base - penalized_cost(c));
  }
  return worst;
}

OracleVerdict run_verifier(Criterion criterion, double theta, int branch_n, double a,
                           double omega, const OracleSettings& settings) {
  if (settings.n_trials < 1) throw std::invalid_argument("oracle: n_trials must be >= 1");
  const double theta_eff = effective_angle(theta, branch_n);
  const double auto_scale = std::abs(theta_eff) > 1e-12 ? std::abs(theta_eff) : 1.0;
  const double amplitude =
      settings.amplitude_scale > 0.0 ? settings.amplitude_scale : 0.3 * auto_scale;
  const auto pulse = reference_pulse(criterion, theta, branch_n, omega);
  const auto basis = basis_for(criterion, settings.n_modes);
  auto tables = build_tables(*pulse, basis, settings.grid_n);

  OracleVerdict verdict;
  verdict.n_trials = settings.n_trials;
  verdict.tolerance =
      criterion == Criterion::Fluence ? kFluenceTolerance : kDerivativeTolerance;
  verdict.base_cost =
      tables_cost(criterion, tables, std::vector<double>(basis.n_modes(), 0.0), a, omega);

  std::mt19937_64 rng(settings.seed);
  std::vector<double> coeffs(basis.n_modes());
  std::vector<OracleVerdict::CertificateEntry> entries;
  entries.reserve(settings.n_trials);
  verdict.min_perturbed_cost = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < settings.n_trials; ++trial) {
    for (double& c : coeffs) c = amplitude * numerics::symmetric_uniform(rng);
    const double cost = tables_cost(criterion, tables, coeffs, a, omega);
    verdict.min_perturbed_cost = std::min(verdict.min_perturbed_cost, cost);
    entries.push_back({coeffs, cost});
  }
  verdict.worst_violation = verdict.base_cost - verdict.min_perturbed_cost;

  const std::size_t keep = std::min<std::size_t>(5, entries.size());
  std::partial_sort(entries.begin(), entries.begin() + keep, entries.end(),
                    [](const auto& lhs, const auto& rhs) { return lhs.cost < rhs.cost; });
  entries.resize(keep);
  verdict.certificate = std::move(entries);

  if (settings.offaxis_trials > 0) {
    verdict.offaxis_trials = settings.offaxis_trials;
    verdict.offaxis_worst_violation = offaxis_worst_violation(
        criterion, *pulse, a, omega, basis, 0.1 * amplitude, settings, rng);
    verdict.offaxis_passed = verdict.offaxis_worst_violation <= settings.offaxis_tolerance;
  }
  verdict.passed = verdict.worst_violation <= verdict.tolerance && verdict.offaxis_passed;
  return verdict;
}

}  // namespace

OracleVerdict verify_fluence_minimum(double theta, int branch_n,
                                     const OracleSettings& settings) {
  return run_verifier(Criterion::Fluence, theta, branch_n, 1.0, 1.0, settings);
}

OracleVerdict verify_rate_minimum(double theta, int branch_n, const OracleSettings& settings) {
  return run_verifier(Criterion::Rate, theta, branch_n, 1.0, 1.0, settings);
}

OracleVerdict verify_mixed_minimum(double theta, int branch_n, double a, double omega,
                                   const OracleSettings& settings) {
  if (!(a > 0.0) || !(omega > 0.0)) {
    throw std::invalid_argument("verify_mixed_minimum: a and omega must be positive");
  }
  return run_verifier(Criterion::Mixed, theta, branch_n, a, omega, settings);
}

double perturbed_cost(Criterion criterion, double theta, int branch_n, double a, double omega,
                      const PerturbationBasis& basis, std::span<const double> coefficients,
                      int grid_n) {
  if (static_cast<int>(coefficients.size()) != basis.n_modes()) {
    throw std::invalid_argument("perturbed_cost: coefficient count must match the basis");
  }
  const auto pulse = reference_pulse(criterion, theta, branch_n, omega);
  auto tables = build_tables(*pulse, basis, grid_n);
  return tables_cost(criterion, tables, coefficients, a, omega);
}

DiscreteMinimizer direct_discrete_minimizer(Criterion criterion, double theta, int branch_n,
                                            int grid_m, double a, double omega) {
  if (grid_m < 4 || grid_m > 64) {
    throw std::invalid_argument("direct_discrete_minimizer: grid_m must be in [4, 64]");
  }
  if (!(a > 0.0) || !(omega > 0.0)) {
    throw std::invalid_argument("direct_discrete_minimizer: a and omega must be positive");
  }
  const double theta_eff = effective_angle(theta, branch_n);
  const int m = grid_m;
  const double h = 1.0 / (m - 1);

  std::vector<double> w(m, h);  // trapezoid weights
  w.front() = 0.5 * h;
  w.back() = 0.5 * h;

  const int n_constraints = criterion == Criterion::Fluence ? 1 : 3;
  const int dim = m + n_constraints;
  std::vector<double> kkt(static_cast<std::size_t>(dim) * dim, 0.0);
  std::vector<double> rhs(dim, 0.0);
  auto at = [&](int r, int c) -> double& { return kkt[static_cast<std::size_t>(r) * dim + c]; };

  // Hessian block. Fluence: 2 W. Rate: 2 L (first-difference form). Mixed:
  // 2 W + 2 L / omega^2. The 1/(2a) prefactor cannot move the minimizer.
  auto add_laplacian = [&](double scale) {
    for (int i = 0; i + 1 < m; ++i) {
      at(i, i) += scale / h;
      at(i + 1, i + 1) += scale / h;
      at(i, i + 1) -= scale / h;
      at(i + 1, i) -= scale / h;
    }
  };
  if (criterion != Criterion::Rate) {
    for (int i = 0; i < m; ++i) at(i, i) += 2.0 * w[i];
  }
  if (criterion == Criterion::Rate) add_laplacian(2.0);
  if (criterion == Criterion::Mixed) add_laplacian(2.0 / (omega * omega));

  // Arrival row, then endpoint-zero rows for the derivative criteria.
  for (int i = 0; i < m; ++i) {
    at(m, i) = w[i];
    at(i, m) = w[i];
  }
  rhs[m] = theta_eff;
  if (n_constraints == 3) {
    at(m + 1, 0) = 1.0;
    at(0, m + 1) = 1.0;
    at(m + 2, m - 1) = 1.0;
    at(m - 1, m + 2) = 1.0;
  }

  const auto solution = numerics::solve_dense(std::move(kkt), std::move(rhs), dim);
  DiscreteMinimizer out;
  out.t.resize(m);
  out.b.assign(solution.begin(), solution.begin() + m);
  for (int i = 0; i < m; ++i) out.t[i] = i * h;
  return out;
}

}  // namespace bloch
