// blochctl: synthesize, simulate, verify and compare unit-time control pulses
// that steer a Bloch vector between two pure states.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "blochctl/costs.hpp"
#include "blochctl/dynamics.hpp"
#include "blochctl/geometry.hpp"
#include "blochctl/io.hpp"
#include "blochctl/oracle.hpp"
#include "blochctl/pulses.hpp"

namespace {

using namespace bloch;

constexpr int kExitAccuracy = 1;
constexpr int kExitUsage = 2;
constexpr double kSimulateTolerance = 1e-5;

struct CommonOpts {
  std::string si = "0,0,1";
  std::string sf = "1,0,0";
  std::string family = "b1";
  int branch_n = 0;
  double a = 1.0;
  double omega = 5.0;
  double mu = 1.0;
  int grid_n = 2000;
  std::uint64_t seed = 42;
  std::string format = "json";
  std::string out = "-";
};

// Parses and normalizes a state vector, recording a warning when the input
// was measurably off the unit sphere.
BlochVector read_state(const std::string& text, const char* name,
                       std::vector<std::string>& warnings) {
  const Vec3 v = io::parse_vec3(text);
  const double n = v.norm();
  if (n < 1e-12) {
    throw std::invalid_argument(std::string(name) + " must be a nonzero vector");
  }
  if (std::abs(n - 1.0) > 1e-6) {
    warnings.push_back(std::string(name) + " normalized from |v| = " + io::format_float(n));
  }
  return v / n;
}

int write_output(const std::string& out, const std::string& content) {
  if (out == "-") {
    std::cout << content;
    return 0;
  }
  std::ofstream file(out, std::ios::binary);
  if (!file) {
    std::cerr << "error: cannot open output file '" << out << "'\n";
    return kExitUsage;
  }
  file << content;
  return file.good() ? 0 : kExitUsage;
}

struct SynthesisProduct {
  ControlSchedule schedule;
  Trajectory trajectory;
  CostReport report;
  io::FileSpec spec;
};

SynthesisProduct synthesize(const CommonOpts& opts, std::vector<std::string>& warnings) {
  const BlochVector s_i = read_state(opts.si, "s_initial", warnings);
  const BlochVector s_f = read_state(opts.sf, "s_final", warnings);
  const double theta = angle_between(s_i, s_f);
  if (cross(s_i, s_f).norm() <= kAxisDegeneracyTolerance) {
    warnings.push_back("endpoints are (anti)parallel; using the deterministic fallback axis");
  }
  const UnitAxis axis = perpendicular_axis(s_i, s_f);

  SynthesisProduct product;
  product.spec.family = family_from_name(opts.family);
  product.spec.theta = theta;
  product.spec.branch_n = opts.branch_n;
  product.spec.a = opts.a;
  product.spec.omega = opts.omega;
  product.spec.mu = opts.mu;
  product.spec.axis = axis.vec();
  product.spec.s_initial = s_i;
  product.spec.s_final = s_f;
  product.spec.grid_n = opts.grid_n;

  if (product.spec.family == PulseFamily::CN) {
    const ConstantNormField field(s_i, s_f, opts.mu, opts.branch_n);
    product.schedule =
        sample_schedule([&](double t) { return field.control(t); }, opts.grid_n);
    product.trajectory.t.resize(opts.grid_n + 1);
    product.trajectory.s.resize(opts.grid_n + 1);
    for (int k = 0; k <= opts.grid_n; ++k) {
      const double t = static_cast<double>(k) / opts.grid_n;
      product.trajectory.t[k] = t;
      product.trajectory.s[k] = field.state(t);
    }
    product.report =
        cost_report(product.schedule, product.trajectory, opts.a, opts.omega, axis);
    return product;
  }

  PulseSpec pspec;
  pspec.family = product.spec.family;
  pspec.theta = theta;
  pspec.axis = axis.vec();
  pspec.branch_n = opts.branch_n;
  pspec.a = opts.a;
  pspec.omega = opts.omega;
  pspec.mu = opts.mu;
  const auto pulse = make_scalar_pulse(pspec);
  product.schedule = sample_schedule(*pulse, axis, opts.grid_n);
  product.trajectory = rotation_trajectory(
      s_i, axis, [&](double t) { return pulse->accumulated(t); }, opts.grid_n);
  product.report = cost_report(*pulse, product.trajectory, opts.a, opts.omega, opts.grid_n);
  return product;
}

int run_synth(const CommonOpts& opts) {
  std::vector<std::string> warnings;
  const SynthesisProduct product = synthesize(opts, warnings);
  const std::string content =
      opts.format == "csv"
          ? io::schedule_csv(product.schedule)
          : io::pulse_json(product.spec, product.report, product.schedule, opts.seed, warnings);
  std::cerr << "synth " << family_name(product.spec.family)
            << ": theta = " << io::format_float(product.spec.theta)
            << ", fluence = " << io::format_float(product.report.fluence)
            << ", accumulated angle = " << io::format_float(product.report.accumulated_angle)
            << "\n";
  return write_output(opts.out, content);
}

struct SimulateOpts {
  std::string pulse_path;
  std::string si, sf;  // optional overrides of the file metadata
  std::string format = "json";
  std::string out = "-";
  std::uint64_t seed = 42;
  bool renormalize = false;
};

int run_simulate(const SimulateOpts& opts) {
  const io::LoadedPulse loaded = io::load_pulse(opts.pulse_path);
  std::vector<std::string> warnings;

  std::optional<BlochVector> s_i, target;
  if (!opts.si.empty()) {
    s_i = read_state(opts.si, "s_initial", warnings);
  } else if (loaded.spec) {
    s_i = loaded.spec->s_initial;
  }
  if (!opts.sf.empty()) {
    target = read_state(opts.sf, "s_final", warnings);
  } else if (loaded.spec) {
    target = loaded.spec->s_final;
  }
  if (!s_i || !target) {
    throw std::invalid_argument(
        "pulse file carries no endpoint metadata; pass --si and --sf explicitly");
  }

  const PropagationResult result = propagate(*s_i, loaded.schedule, target, opts.renormalize);

  io::FileSpec spec = loaded.spec.value_or(io::FileSpec{});
  spec.s_initial = *s_i;
  spec.s_final = *target;
  spec.grid_n = static_cast<int>(loaded.schedule.size()) - 1;

  const std::string content = opts.format == "csv"
                                  ? io::trajectory_csv(result.trajectory)
                                  : io::trajectory_json(spec, result, opts.seed, warnings);
  std::cerr << "simulate: final_error = " << io::format_float(*result.final_error)
            << ", norm_drift = " << io::format_float(result.norm_drift) << "\n";
  const int rc = write_output(opts.out, content);
  if (rc != 0) return rc;
  return *result.final_error <= kSimulateTolerance ? 0 : kExitAccuracy;
}

struct VerifyOpts {
  CommonOpts common;
  std::string criterion = "fluence";
  int trials = 1000;
  int modes = 12;
  double amplitude = -1.0;
  int offaxis_trials = 20;
};

int run_verify(const VerifyOpts& opts) {
  std::vector<std::string> warnings;
  const BlochVector s_i = read_state(opts.common.si, "s_initial", warnings);
  const BlochVector s_f = read_state(opts.common.sf, "s_final", warnings);
  const double theta = angle_between(s_i, s_f);

  OracleSettings settings;
  settings.n_trials = opts.trials;
  settings.n_modes = opts.modes;
  settings.amplitude_scale = opts.amplitude;
  settings.seed = opts.common.seed;
  settings.grid_n = opts.common.grid_n;
  settings.offaxis_trials = opts.offaxis_trials;

  OracleVerdict verdict;
  if (opts.criterion == "fluence") {
    verdict = verify_fluence_minimum(theta, opts.common.branch_n, settings);
  } else if (opts.criterion == "rate") {
    verdict = verify_rate_minimum(theta, opts.common.branch_n, settings);
  } else {
    verdict = verify_mixed_minimum(theta, opts.common.branch_n, opts.common.a,
                                   opts.common.omega, settings);
  }

  io::FileSpec spec;
  spec.family = opts.criterion == "fluence"  ? PulseFamily::B1
                : opts.criterion == "rate"   ? PulseFamily::B2
                                             : PulseFamily::B3;
  spec.theta = theta;
  spec.branch_n = opts.common.branch_n;
  spec.a = opts.common.a;
  spec.omega = opts.common.omega;
  spec.axis = perpendicular_axis(s_i, s_f).vec();
  spec.s_initial = s_i;
  spec.s_final = s_f;
  spec.grid_n = opts.common.grid_n;

  const std::string content =
      io::verdict_json(opts.criterion, spec, settings, verdict, opts.common.seed, warnings);
  std::cerr << "verify " << opts.criterion
            << ": base_cost = " << io::format_float(verdict.base_cost)
            << ", worst_violation = " << io::format_float(verdict.worst_violation) << ", "
            << (verdict.passed ? "passed" : "FAILED") << "\n";
  const int rc = write_output(opts.common.out, content);
  if (rc != 0) return rc;
  return verdict.passed ? 0 : kExitAccuracy;
}

struct CompareOpts {
  std::vector<double> thetas{0.1, 0.25 * std::numbers::pi, 0.5 * std::numbers::pi, 2.5};
  std::vector<int> ns{-1, 0, 1, 2};
  std::vector<double> omegas{0.5, 5.0, 50.0};
  std::vector<double> mus{0.5, 1.0};
  double a = 1.0;
  double eval_omega = 5.0;
  int grid_n = 2000;
  bool degrees = false;
  std::string format = "csv";
  std::string out = "-";
};

struct CompareRow {
  std::string family;
  double theta, omega, mu;
  int branch_n;
  bool has_omega = false, has_mu = false;
  CostReport report;
  double arrival_error = 0.0;
  double rate_vs_b2 = 0.0;
};

CompareRow make_row(const ScalarPulse& pulse, const char* family, double theta, int n,
                    const CompareOpts& opts, const BlochVector& s_i, const UnitAxis& axis,
                    const BlochVector& s_f, double rate_b2) {
  CompareRow row;
  row.family = family;
  row.theta = theta;
  row.branch_n = n;
  row.omega = 0.0;
  row.mu = 0.0;
  const auto traj = rotation_trajectory(
      s_i, axis, [&](double t) { return pulse.accumulated(t); }, opts.grid_n);
  row.report = cost_report(pulse, traj, opts.a, opts.eval_omega, opts.grid_n);
  const auto prop = propagate(
      s_i, [&](double t) { return ControlVector(axis.vec() * pulse.value(t)); }, opts.grid_n,
      s_f);
  row.arrival_error = *prop.final_error;
  row.rate_vs_b2 = rate_b2 > 1e-300 ? row.report.rate_cost / rate_b2 : 0.0;
  return row;
}

int run_compare(const CompareOpts& opts) {
  std::vector<CompareRow> rows;
  for (double theta_in : opts.thetas) {
    const double theta = opts.degrees ? theta_in * std::numbers::pi / 180.0 : theta_in;
    const BlochVector s_i = Vec3::unit_z();
    const BlochVector s_f_raw = rotate(s_i, UnitAxis(Vec3::unit_y()), theta);
    const BlochVector s_f = s_f_raw / s_f_raw.norm();
    const UnitAxis axis = perpendicular_axis(s_i, s_f);
    for (int n : opts.ns) {
      const ParabolicPulse b2(theta, n);
      const double rate_b2 = rate_cost(b2, opts.grid_n);

      const ConstantPulse b1(theta, n);
      rows.push_back(make_row(b1, "b1", theta, n, opts, s_i, axis, s_f, rate_b2));
      rows.push_back(make_row(b2, "b2", theta, n, opts, s_i, axis, s_f, rate_b2));
      for (double omega : opts.omegas) {
        const CoshPulse b3(theta, n, omega);
        CompareRow row = make_row(b3, "b3", theta, n, opts, s_i, axis, s_f, rate_b2);
        row.omega = omega;
        row.has_omega = true;
        rows.push_back(row);
      }
      const SinePulse sine(theta, n);
      rows.push_back(make_row(sine, "sine", theta, n, opts, s_i, axis, s_f, rate_b2));

      if (n == 0) {
        for (double mu : opts.mus) {
          const ConstantNormField field(s_i, s_f, mu, n);
          const auto schedule =
              sample_schedule([&](double t) { return field.control(t); }, opts.grid_n);
          Trajectory traj;
          traj.t.resize(opts.grid_n + 1);
          traj.s.resize(opts.grid_n + 1);
          for (int k = 0; k <= opts.grid_n; ++k) {
            const double t = static_cast<double>(k) / opts.grid_n;
            traj.t[k] = t;
            traj.s[k] = field.state(t);
          }
          CompareRow row;
          row.family = "cn";
          row.theta = theta;
          row.branch_n = n;
          row.mu = mu;
          row.has_mu = true;
          row.report = cost_report(schedule, traj, opts.a, opts.eval_omega, axis);
          const auto prop = propagate(
              s_i, [&](double t) { return field.control(t); }, opts.grid_n, s_f);
          row.arrival_error = *prop.final_error;
          row.rate_vs_b2 = rate_b2 > 1e-300 ? row.report.rate_cost / rate_b2 : 0.0;
          rows.push_back(row);
        }
      }
    }
  }

  std::string content;
  if (opts.format == "md") {
    content +=
        "| family | theta | n | omega | mu | fluence | rate_cost | mixed_cost | path_length "
        "| arrival_error | rate_vs_b2 |\n";
    content += "|---|---|---|---|---|---|---|---|---|---|---|\n";
    char buf[512];
    char omega_cell[32], mu_cell[32];
    for (const auto& r : rows) {
      if (r.has_omega) std::snprintf(omega_cell, sizeof omega_cell, "%.6g", r.omega);
      if (r.has_mu) std::snprintf(mu_cell, sizeof mu_cell, "%.6g", r.mu);
      std::snprintf(buf, sizeof buf,
                    "| %s | %.6g | %d | %s | %s | %.6g | %.6g | %.6g | %.6g | %.3g | %.6g |\n",
                    r.family.c_str(), r.theta, r.branch_n, r.has_omega ? omega_cell : "-",
                    r.has_mu ? mu_cell : "-", r.report.fluence, r.report.rate_cost,
                    r.report.mixed_cost, r.report.path_length, r.arrival_error, r.rate_vs_b2);
      content += buf;
    }
  } else {
    content =
        "family,theta,branch_n,omega,mu,fluence,rate_cost,mixed_cost,path_length,"
        "arrival_error,rate_vs_b2\n";
    for (const auto& r : rows) {
      content += r.family + "," + io::format_float(r.theta) + "," +
                 std::to_string(r.branch_n) + "," +
                 (r.has_omega ? io::format_float(r.omega) : "") + "," +
                 (r.has_mu ? io::format_float(r.mu) : "") + "," +
                 io::format_float(r.report.fluence) + "," +
                 io::format_float(r.report.rate_cost) + "," +
                 io::format_float(r.report.mixed_cost) + "," +
                 io::format_float(r.report.path_length) + "," +
                 io::format_float(r.arrival_error) + "," + io::format_float(r.rate_vs_b2) +
                 "\n";
    }
  }
  std::cerr << "compare: " << rows.size() << " rows\n";
  return write_output(opts.out, content);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"control pulses for unit-time Bloch-vector transfers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "blochctl 0.1.0");

  CommonOpts synth_opts;
  auto* synth = app.add_subcommand("synth", "synthesize a control pulse");
  synth->add_option("--si", synth_opts.si, "initial state, comma separated")->required();
  synth->add_option("--sf", synth_opts.sf, "final state, comma separated")->required();
  synth->add_option("--family", synth_opts.family, "pulse family")
      ->required()
      ->check(CLI::IsMember({"b1", "b2", "b3", "cn", "sine"}));
  synth->add_option("--n", synth_opts.branch_n, "winding branch (extra full turns)");
  synth->add_option("--a", synth_opts.a, "fluence weight of the mixed cost")
      ->check(CLI::PositiveNumber);
  synth->add_option("--omega", synth_opts.omega, "stiffness of the mixed cost (b3)")
      ->check(CLI::PositiveNumber);
  synth->add_option("--mu", synth_opts.mu, "tilt amplitude (cn)");
  synth->add_option("--grid-n", synth_opts.grid_n, "number of grid intervals")
      ->check(CLI::Range(100, 10000000));
  synth->add_option("--seed", synth_opts.seed, "seed echoed into file metadata")
      ->envname("BLOCH_PULSE_SEED");
  synth->add_option("--format", synth_opts.format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
  synth->add_option("--out", synth_opts.out, "output path, '-' for stdout");

  SimulateOpts sim_opts;
  auto* simulate = app.add_subcommand("simulate", "integrate a pulse file");
  simulate->add_option("--pulse", sim_opts.pulse_path, "pulse file (json or csv)")->required();
  simulate->add_option("--si", sim_opts.si, "initial state override");
  simulate->add_option("--sf", sim_opts.sf, "target state override");
  simulate->add_option("--seed", sim_opts.seed, "seed echoed into file metadata")
      ->envname("BLOCH_PULSE_SEED");
  simulate->add_option("--format", sim_opts.format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
  simulate->add_option("--out", sim_opts.out, "output path, '-' for stdout");
  simulate->add_flag("--renormalize", sim_opts.renormalize,
                     "project back to the unit sphere after each step");

  VerifyOpts verify_opts;
  auto* verify = app.add_subcommand("verify", "randomized local-minimality check");
  verify->add_option("--criterion", verify_opts.criterion, "criterion to verify")
      ->required()
      ->check(CLI::IsMember({"fluence", "rate", "mixed"}));
  verify->add_option("--si", verify_opts.common.si, "initial state");
  verify->add_option("--sf", verify_opts.common.sf, "final state");
  verify->add_option("--n", verify_opts.common.branch_n, "winding branch");
  verify->add_option("--a", verify_opts.common.a, "fluence weight")->check(CLI::PositiveNumber);
  verify->add_option("--omega", verify_opts.common.omega, "stiffness (mixed)")
      ->check(CLI::PositiveNumber);
  verify->add_option("--trials", verify_opts.trials, "number of random perturbations")
      ->check(CLI::Range(1, 100000000));
  verify->add_option("--modes", verify_opts.modes, "perturbation modes")
      ->check(CLI::Range(1, 64));
  verify->add_option("--amplitude", verify_opts.amplitude,
                     "coefficient amplitude (default 0.3 |theta'|)");
  verify->add_option("--offaxis-trials", verify_opts.offaxis_trials,
                     "three-component spot-check trials");
  verify->add_option("--grid-n", verify_opts.common.grid_n, "quadrature grid intervals")
      ->check(CLI::Range(100, 10000000));
  verify->add_option("--seed", verify_opts.common.seed, "random seed")
      ->envname("BLOCH_PULSE_SEED");
  verify->add_option("--format", verify_opts.common.format, "output format")
      ->check(CLI::IsMember({"json"}));
  verify->add_option("--out", verify_opts.common.out, "output path, '-' for stdout");

  CompareOpts cmp_opts;
  auto* compare = app.add_subcommand("compare", "tabulate costs across families");
  compare->add_option("--thetas", cmp_opts.thetas, "rotation angles")->delimiter(',');
  compare->add_option("--ns", cmp_opts.ns, "winding branches")->delimiter(',');
  compare->add_option("--omegas", cmp_opts.omegas, "b3 stiffness values")->delimiter(',');
  compare->add_option("--mus", cmp_opts.mus, "cn tilt amplitudes")->delimiter(',');
  compare->add_option("--a", cmp_opts.a, "fluence weight")->check(CLI::PositiveNumber);
  compare->add_option("--eval-omega", cmp_opts.eval_omega,
                      "stiffness at which mixed_cost is reported")
      ->check(CLI::PositiveNumber);
  compare->add_option("--grid-n", cmp_opts.grid_n, "grid intervals")
      ->check(CLI::Range(100, 10000000));
  compare->add_flag("--degrees", cmp_opts.degrees, "interpret --thetas in degrees");
  compare->add_option("--format", cmp_opts.format, "output format")
      ->check(CLI::IsMember({"csv", "md"}));
  compare->add_option("--out", cmp_opts.out, "output path, '-' for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(synth)) return run_synth(synth_opts);
    if (app.got_subcommand(simulate)) return run_simulate(sim_opts);
    if (app.got_subcommand(verify)) return run_verify(verify_opts);
    return run_compare(cmp_opts);
  } catch (const bloch::io::SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAccuracy;
  }
}
