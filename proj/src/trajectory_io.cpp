#include "spatialforge/trajectory_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace spatialforge {

namespace {

constexpr const char* kHeader = "t_s,azimuth_deg,elevation_deg,distance_m,mask";

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(std::string_view text, const std::string& where) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw std::runtime_error(where + ": '" + std::string(text) + "' is not a finite number");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << kHeader << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double t = static_cast<double>(k) / traj.rate_hz;
    os << format_double(t) << ',' << format_double(traj.azimuth_deg[k]) << ','
       << format_double(traj.elevation_deg[k]) << ',' << format_double(traj.distance_m[k]) << ','
       << (traj.mask[k] ? '1' : '0') << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_trajectory_csv(os, traj);
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

Trajectory read_trajectory_csv(std::istream& is, const std::string& source_name) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(is, line)) throw std::runtime_error(source_name + ": empty trajectory file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) {
    throw std::runtime_error(source_name + ":1: expected header '" + std::string(kHeader) + "'");
  }

  Trajectory traj;
  std::vector<double> times;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::string where = source_name + ":" + std::to_string(line_no);
    const auto fields = split_fields(line);
    if (fields.size() != 5) throw std::runtime_error(where + ": expected 5 fields");
    times.push_back(parse_number(fields[0], where));
    traj.azimuth_deg.push_back(parse_number(fields[1], where));
    traj.elevation_deg.push_back(parse_number(fields[2], where));
    const double d = parse_number(fields[3], where);
    if (!(d > 0.0)) throw std::runtime_error(where + ": distance must be positive");
    traj.distance_m.push_back(d);
    const double m = parse_number(fields[4], where);
    if (m != 0.0 && m != 1.0) throw std::runtime_error(where + ": mask must be 0 or 1");
    traj.mask.push_back(m == 1.0 ? 1 : 0);

    const double expected_t = static_cast<double>(times.size() - 1) / kTrajectoryRateHz;
    if (std::abs(times.back() - expected_t) > 1e-6) {
      throw std::runtime_error(where + ": timestamp does not match the 20 Hz frame grid");
    }
  }
  if (times.empty()) throw std::runtime_error(source_name + ": trajectory has no rows");

  traj.clip_duration_s = static_cast<double>(times.size() - 1) / kTrajectoryRateHz;
  if (std::find(traj.mask.begin(), traj.mask.end(), 1) == traj.mask.end()) {
    throw std::runtime_error(source_name + ": mask has no valid row");
  }
  const auto [s, e] = traj.valid_range();
  traj.window = {static_cast<double>(s) / kTrajectoryRateHz, static_cast<double>(e) / kTrajectoryRateHz};
  if (s == e) {
    // A single valid frame has an empty window; widen it within that frame.
    traj.window.t1_s = traj.window.t0_s + 0.5 / kTrajectoryRateHz;
    traj.window.t1_s = std::min(traj.window.t1_s, traj.clip_duration_s);
    if (traj.window.t1_s <= traj.window.t0_s) traj.window.t0_s -= 0.5 / kTrajectoryRateHz;
  }
  for (std::size_t k = s; k <= e; ++k) {
    if (!traj.mask[k]) throw std::runtime_error(source_name + ": mask is not contiguous");
  }
  return traj;
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open trajectory file " + path.string());
  return read_trajectory_csv(is, path.string());
}

}  // namespace spatialforge
