#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "blochctl/costs.hpp"
#include "blochctl/dynamics.hpp"
#include "blochctl/oracle.hpp"
#include "blochctl/pulses.hpp"

namespace bloch::io {

inline constexpr const char* kFileFormatVersion = "0.1.0";

// Malformed or mistyped input files. The CLI maps this to its usage-error
// exit code, distinct from accuracy failures.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// 17 significant digits; enough to round-trip any double, stable across runs.
std::string format_float(double x);

// Parses "x,y,z". Rejects non-finite components and malformed input.
Vec3 parse_vec3(const std::string& text);

// Synthesis parameters echoed into output files.
struct FileSpec {
  PulseFamily family = PulseFamily::Custom;
  double theta = 0.0;
  int branch_n = 0;
  double a = 1.0;
  double omega = 5.0;
  double mu = 1.0;
  Vec3 axis = Vec3::unit_y();
  Vec3 s_initial = Vec3::unit_z();
  Vec3 s_final = Vec3::unit_x();
  int grid_n = 2000;
};

std::string pulse_json(const FileSpec& spec, const CostReport& costs,
                       const ControlSchedule& schedule, std::uint64_t seed,
                       const std::vector<std::string>& warnings);
std::string schedule_csv(const ControlSchedule& schedule);

std::string trajectory_json(const FileSpec& spec, const PropagationResult& result,
                            std::uint64_t seed, const std::vector<std::string>& warnings);
std::string trajectory_csv(const Trajectory& trajectory);

std::string verdict_json(const std::string& criterion, const FileSpec& spec,
                         const OracleSettings& settings, const OracleVerdict& verdict,
                         std::uint64_t seed, const std::vector<std::string>& warnings);

struct LoadedPulse {
  std::optional<FileSpec> spec;  // absent for bare CSV schedules
  ControlSchedule schedule;
};

// Reads a pulse file, JSON or CSV (sniffed by the leading character). Throws
// SchemaError on anything malformed.
LoadedPulse load_pulse(const std::string& path);

}  // namespace bloch::io
