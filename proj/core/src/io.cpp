#include "blochctl/io.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace bloch::io {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

std::string vec_json(const Vec3& v) {
  return "[" + format_float(v.x) + ", " + format_float(v.y) + ", " + format_float(v.z) + "]";
}

std::string warnings_json(const std::vector<std::string>& warnings) {
  std::string out = "[";
  for (std::size_t i = 0; i < warnings.size(); ++i) {
    if (i) out += ", ";
    out += "\"" + escape(warnings[i]) + "\"";
  }
  return out + "]";
}

// Emission order is hard-coded so reruns are byte-identical.
void append_spec(std::string& out, const FileSpec& spec, const char* indent) {
  out += indent;
  out += "\"spec\": {\n";
  const std::string inner = std::string(indent) + "  ";
  out += inner + "\"family\": \"" + std::string(family_name(spec.family)) + "\",\n";
  out += inner + "\"theta\": " + format_float(spec.theta) + ",\n";
  out += inner + "\"branch_n\": " + std::to_string(spec.branch_n) + ",\n";
  out += inner + "\"a\": " + format_float(spec.a) + ",\n";
  out += inner + "\"omega\": " + format_float(spec.omega) + ",\n";
  out += inner + "\"mu\": " + format_float(spec.mu) + ",\n";
  out += inner + "\"axis\": " + vec_json(spec.axis) + ",\n";
  out += inner + "\"s_initial\": " + vec_json(spec.s_initial) + ",\n";
  out += inner + "\"s_final\": " + vec_json(spec.s_final) + ",\n";
  out += inner + "\"grid_n\": " + std::to_string(spec.grid_n) + "\n";
  out += indent;
  out += "},\n";
}

void append_meta_head(std::string& out, const char* kind, std::uint64_t seed) {
  out += "{\n  \"meta\": {\n";
  out += "    \"kind\": \"" + std::string(kind) + "\",\n";
  out += "    \"version\": \"" + std::string(kFileFormatVersion) + "\",\n";
  out += "    \"seed\": " + std::to_string(seed) + ",\n";
}

std::string row4(double a, double b, double c, double d) {
  return "[" + format_float(a) + ", " + format_float(b) + ", " + format_float(c) + ", " +
         format_float(d) + "]";
}

}  // namespace

std::string format_float(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Vec3 parse_vec3(const std::string& text) {
  std::array<double, 3> vals{};
  std::size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t comma = text.find(',', start);
    const bool last = i == 2;
    if (last != (comma == std::string::npos)) {
      throw std::invalid_argument("expected three comma-separated components: '" + text + "'");
    }
    const std::string token = text.substr(start, last ? std::string::npos : comma - start);
    char* end = nullptr;
    vals[i] = std::strtod(token.c_str(), &end);
    while (end && *end != '\0' && std::isspace(static_cast<unsigned char>(*end))) ++end;
    if (token.empty() || end == token.c_str() || *end != '\0') {
      throw std::invalid_argument("malformed vector component '" + token + "'");
    }
    if (!std::isfinite(vals[i])) {
      throw std::invalid_argument("non-finite vector component in '" + text + "'");
    }
    start = comma + 1;
  }
  return {vals[0], vals[1], vals[2]};
}

std::string pulse_json(const FileSpec& spec, const CostReport& costs,
                       const ControlSchedule& schedule, std::uint64_t seed,
                       const std::vector<std::string>& warnings) {
  std::string out;
  out.reserve(64 * schedule.size() + 2048);
  append_meta_head(out, "pulse", seed);
  append_spec(out, spec, "    ");
  out += "    \"warnings\": " + warnings_json(warnings) + ",\n";
  out += "    \"costs\": {\n";
  out += "      \"fluence\": " + format_float(costs.fluence) + ",\n";
  out += "      \"rate_cost\": " + format_float(costs.rate_cost) + ",\n";
  out += "      \"mixed_cost\": " + format_float(costs.mixed_cost) + ",\n";
  out += "      \"path_length\": " + format_float(costs.path_length) + ",\n";
  out += "      \"accumulated_angle\": " + format_float(costs.accumulated_angle) + ",\n";
  out += "      \"mean_magnitude\": " + format_float(costs.mean_magnitude) + ",\n";
  out += std::string("      \"endpoint_jump\": ") + (costs.endpoint_jump ? "true" : "false") +
         "\n";
  out += "    }\n  },\n  \"samples\": [\n";
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    out += "    " +
           row4(schedule.t[k], schedule.b[k].x, schedule.b[k].y, schedule.b[k].z) +
           (k + 1 < schedule.size() ? ",\n" : "\n");
  }
  out += "  ]\n}\n";
  return out;
}

std::string schedule_csv(const ControlSchedule& schedule) {
  std::string out = "t,bx,by,bz\n";
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    out += format_float(schedule.t[k]) + "," + format_float(schedule.b[k].x) + "," +
           format_float(schedule.b[k].y) + "," + format_float(schedule.b[k].z) + "\n";
  }
  return out;
}

std::string trajectory_json(const FileSpec& spec, const PropagationResult& result,
                            std::uint64_t seed, const std::vector<std::string>& warnings) {
  std::string out;
  out.reserve(64 * result.trajectory.t.size() + 2048);
  append_meta_head(out, "trajectory", seed);
  append_spec(out, spec, "    ");
  out += "    \"warnings\": " + warnings_json(warnings) + ",\n";
  out += "    \"result\": {\n";
  out += "      \"final_state\": " + vec_json(result.final_state) + ",\n";
  out += "      \"final_error\": " +
         (result.final_error ? format_float(*result.final_error) : std::string("null")) + ",\n";
  out += "      \"norm_drift\": " + format_float(result.norm_drift) + "\n";
  out += "    }\n  },\n  \"samples\": [\n";
  const Trajectory& traj = result.trajectory;
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    out += "    " + row4(traj.t[k], traj.s[k].x, traj.s[k].y, traj.s[k].z) +
           (k + 1 < traj.t.size() ? ",\n" : "\n");
  }
  out += "  ]\n}\n";
  return out;
}

std::string trajectory_csv(const Trajectory& trajectory) {
  std::string out = "t,sx,sy,sz\n";
  for (std::size_t k = 0; k < trajectory.t.size(); ++k) {
    out += format_float(trajectory.t[k]) + "," + format_float(trajectory.s[k].x) + "," +
           format_float(trajectory.s[k].y) + "," + format_float(trajectory.s[k].z) + "\n";
  }
  return out;
}

std::string verdict_json(const std::string& criterion, const FileSpec& spec,
                         const OracleSettings& settings, const OracleVerdict& verdict,
                         std::uint64_t seed, const std::vector<std::string>& warnings) {
  std::string out;
  append_meta_head(out, "verdict", seed);
  append_spec(out, spec, "    ");
  out += "    \"warnings\": " + warnings_json(warnings) + ",\n";
  out += "    \"settings\": {\n";
  out += "      \"criterion\": \"" + escape(criterion) + "\",\n";
  out += "      \"n_trials\": " + std::to_string(settings.n_trials) + ",\n";
  out += "      \"n_modes\": " + std::to_string(settings.n_modes) + ",\n";
  out += "      \"amplitude_scale\": " + format_float(settings.amplitude_scale) + ",\n";
  out += "      \"grid_n\": " + std::to_string(settings.grid_n) + ",\n";
  out += "      \"offaxis_trials\": " + std::to_string(settings.offaxis_trials) + "\n";
  out += "    }\n  },\n";
  out += "  \"verdict\": {\n";
  out += "    \"base_cost\": " + format_float(verdict.base_cost) + ",\n";
  out += "    \"min_perturbed_cost\": " + format_float(verdict.min_perturbed_cost) + ",\n";
  out += "    \"n_trials\": " + std::to_string(verdict.n_trials) + ",\n";
  out += "    \"worst_violation\": " + format_float(verdict.worst_violation) + ",\n";
  out += "    \"tolerance\": " + format_float(verdict.tolerance) + ",\n";
  out += std::string("    \"passed\": ") + (verdict.passed ? "true" : "false") + ",\n";
  out += "    \"offaxis\": {\n";
  out += "      \"n_trials\": " + std::to_string(verdict.offaxis_trials) + ",\n";
  out += "      \"worst_violation\": " + format_float(verdict.offaxis_worst_violation) + ",\n";
  out += "      \"tolerance\": " + format_float(settings.offaxis_tolerance) + ",\n";
  out += std::string("      \"passed\": ") + (verdict.offaxis_passed ? "true" : "false") +
         "\n    },\n";
  out += "    \"certificate\": [\n";
  for (std::size_t i = 0; i < verdict.certificate.size(); ++i) {
    const auto& entry = verdict.certificate[i];
    out += "      {\"cost\": " + format_float(entry.cost) + ", \"coefficients\": [";
    for (std::size_t k = 0; k < entry.coefficients.size(); ++k) {
      if (k) out += ", ";
      out += format_float(entry.coefficients[k]);
    }
    out += "]}";
    out += (i + 1 < verdict.certificate.size() ? ",\n" : "\n");
  }
  out += "    ]\n  }\n}\n";
  return out;
}

namespace {

FileSpec spec_from_json(const nlohmann::json& meta) {
  FileSpec spec;
  if (!meta.contains("spec")) return spec;
  const auto& js = meta.at("spec");
  try {
    if (js.contains("family")) spec.family = family_from_name(js.at("family").get<std::string>());
    if (js.contains("theta")) spec.theta = js.at("theta").get<double>();
    if (js.contains("branch_n")) spec.branch_n = js.at("branch_n").get<int>();
    if (js.contains("a")) spec.a = js.at("a").get<double>();
    if (js.contains("omega")) spec.omega = js.at("omega").get<double>();
    if (js.contains("mu")) spec.mu = js.at("mu").get<double>();
    auto vec = [](const nlohmann::json& arr) -> Vec3 {
      if (!arr.is_array() || arr.size() != 3) throw std::invalid_argument("expected 3-vector");
      return {arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>()};
    };
    if (js.contains("axis")) spec.axis = vec(js.at("axis"));
    if (js.contains("s_initial")) spec.s_initial = vec(js.at("s_initial"));
    if (js.contains("s_final")) spec.s_final = vec(js.at("s_final"));
    if (js.contains("grid_n")) spec.grid_n = js.at("grid_n").get<int>();
  } catch (const std::exception& e) {
    throw SchemaError(std::string("bad spec block: ") + e.what());
  }
  return spec;
}

LoadedPulse pulse_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("samples") || !doc.at("samples").is_array()) {
    throw SchemaError("pulse file must be an object with a 'samples' array");
  }
  LoadedPulse out;
  if (doc.contains("meta") && doc.at("meta").is_object()) {
    const auto& meta = doc.at("meta");
    if (meta.contains("kind") && meta.at("kind").get<std::string>() != "pulse") {
      throw SchemaError("file kind is '" + meta.at("kind").get<std::string>() +
                        "', expected 'pulse'");
    }
    out.spec = spec_from_json(meta);
  }
  const auto& samples = doc.at("samples");
  out.schedule.t.reserve(samples.size());
  out.schedule.b.reserve(samples.size());
  for (const auto& row : samples) {
    if (!row.is_array() || row.size() != 4) {
      throw SchemaError("each sample must be [t, bx, by, bz]");
    }
    double vals[4];
    for (int i = 0; i < 4; ++i) {
      if (!row[i].is_number()) throw SchemaError("non-numeric sample entry");
      vals[i] = row[i].get<double>();
      if (!std::isfinite(vals[i])) throw SchemaError("non-finite sample entry");
    }
    out.schedule.t.push_back(vals[0]);
    out.schedule.b.push_back({vals[1], vals[2], vals[3]});
  }
  return out;
}

LoadedPulse pulse_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty CSV file");
  auto strip = [](std::string s) {
    s.erase(0, s.find_first_not_of(" \t\r"));
    s.erase(s.find_last_not_of(" \t\r") + 1);
    return s;
  };
  if (strip(line) != "t,bx,by,bz") {
    throw SchemaError("CSV pulse file must start with header 't,bx,by,bz'");
  }
  LoadedPulse out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = strip(line);
    if (stripped.empty()) continue;
    Vec3 b;
    double t = 0.0;
    try {
      const std::size_t comma = stripped.find(',');
      if (comma == std::string::npos) throw std::invalid_argument("too few columns");
      char* end = nullptr;
      t = std::strtod(stripped.substr(0, comma).c_str(), &end);
      b = parse_vec3(stripped.substr(comma + 1));
    } catch (const std::invalid_argument& e) {
      throw SchemaError("CSV line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!std::isfinite(t)) throw SchemaError("CSV line " + std::to_string(line_no) + ": bad t");
    out.schedule.t.push_back(t);
    out.schedule.b.push_back(b);
  }
  return out;
}

}  // namespace

LoadedPulse load_pulse(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open pulse file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw SchemaError("pulse file '" + path + "' is empty");

  LoadedPulse out =
      text[first] == '{' ? pulse_from_json(text) : pulse_from_csv(text);
  try {
    out.schedule.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("bad sample grid: ") + e.what());
  }
  return out;
}

}  // namespace bloch::io
