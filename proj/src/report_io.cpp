#include "neuromod/report_io.hpp"

#include <charconv>
#include <fstream>
#include <nlohmann/json.hpp>

#include "neuromod/errors.hpp"

namespace neuromod {

std::string format_fixed(double x, int decimals) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  char buf[512];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, decimals);
  if (ec != std::errc()) throw ContractViolation("format_fixed: value too large");
  std::string s(buf, ptr);
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  std::string line = "time";
  for (const auto& n : traj.names()) line += "," + n;
  out << line << "\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    line = format_fixed(traj.time()[k]);
    for (std::size_t c = 0; c < traj.names().size(); ++c) line += "," + format_fixed(traj.column(c)[k]);
    out << line << "\n";
  }
  if (!out) throw IoError(path.string() + ": write failed");
}

namespace {

nlohmann::ordered_json number(double x) {
  return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(nullptr);
}

}  // namespace

std::string metrics_json(const ExperimentReport& report, const std::string& config_text,
                         const ConvergenceReport* dt_check) {
  nlohmann::ordered_json j;
  j["experiment"] = report.experiment;
  j["config"] = config_text;
  j["assumptions"] = report.assumptions;
  auto phases = nlohmann::ordered_json::array();
  for (const auto& p : report.phases) phases.push_back({{"name", p.name}, {"t0", p.t0}, {"t1", p.t1}});
  j["phases"] = phases;
  auto metrics = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.metrics) metrics[k] = number(v);
  j["metrics"] = metrics;
  auto vectors = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.vectors) {
    auto arr = nlohmann::ordered_json::array();
    for (double x : v) arr.push_back(number(x));
    vectors[k] = arr;
  }
  j["vectors"] = vectors;
  j["parameter_names"] = report.parameter_names;
  if (dt_check) {
    j["dt_check"] = {{"dt", dt_check->dt},
                     {"max_deviation", number(dt_check->max_deviation)},
                     {"max_deviation_away_from_upstrokes", number(dt_check->max_deviation_away_from_upstrokes)},
                     {"samples_compared", dt_check->samples_compared},
                     {"samples_excluded", dt_check->samples_excluded}};
  }
  return j.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw IoError(path.string() + ": write failed");
}

}  // namespace neuromod
