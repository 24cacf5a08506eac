#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace spatialforge {

struct Hrir {
  std::vector<float> left;
  std::vector<float> right;
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;

  std::size_t length() const { return left.size(); }
};

/// Immutable, validated collection of measured impulse-response pairs.
class HrirSet {
 public:
  /// Validates and wraps the IRs: non-empty, one shared length, finite
  /// samples, in-range and unique directions. Throws std::invalid_argument.
  static HrirSet create(std::uint32_t sample_rate_hz, std::vector<Hrir> irs);

  std::uint32_t sample_rate_hz() const { return sample_rate_hz_; }
  std::size_t size() const { return irs_.size(); }
  std::size_t ir_length() const { return irs_.front().length(); }
  const std::vector<Hrir>& irs() const { return irs_; }
  const Hrir& operator[](std::size_t i) const { return irs_[i]; }

  /// Index of the IR closest in great-circle angle to (azimuth, elevation).
  /// Exact ties go to the smaller elevation, then the smaller wrapped azimuth.
  std::size_t nearest_index(double azimuth_deg, double elevation_deg) const;
  const Hrir& nearest(double azimuth_deg, double elevation_deg) const {
    return irs_[nearest_index(azimuth_deg, elevation_deg)];
  }

 private:
  HrirSet(std::uint32_t rate, std::vector<Hrir> irs);

  std::uint32_t sample_rate_hz_;
  std::vector<Hrir> irs_;
  // Unit direction vectors, cached per IR.
  std::vector<std::array<double, 3>> directions_;
};

inline const Hrir& nearest_hrir(const HrirSet& set, double azimuth_deg, double elevation_deg) {
  return set.nearest(azimuth_deg, elevation_deg);
}

/// Great-circle angle in degrees between two directions.
double great_circle_deg(double az1_deg, double el1_deg, double az2_deg, double el2_deg);

/// Loads a JSON manifest:
///   {"sample_rate_hz": 48000,
///    "irs": [{"azimuth_deg": 0, "elevation_deg": 0, "file": "ir_000.wav"}, ...]}
/// Each file is a 2-channel WAV holding the (left, right) IRs; relative paths
/// resolve against the manifest's directory. Errors name the offending entry.
HrirSet load_hrir_set(const std::filesystem::path& manifest_path);

}  // namespace spatialforge
