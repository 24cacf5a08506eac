#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "spatialforge/spatial.hpp"

namespace spatialforge {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// CSV with header `t_s,azimuth_deg,elevation_deg,distance_m,mask`, one row
/// per 20 Hz frame.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

/// Parses the CSV format above. The clip duration is taken from the last
/// row's timestamp and the event window from the first and last masked rows.
/// Throws std::runtime_error with the offending line number on bad input.
Trajectory read_trajectory_csv(std::istream& is, const std::string& source_name = "<stream>");
Trajectory read_trajectory_csv(const std::filesystem::path& path);

}  // namespace spatialforge
