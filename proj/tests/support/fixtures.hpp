#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "spatialforge/audio.hpp"
#include "spatialforge/hrir.hpp"
#include "spatialforge/spatial.hpp"

namespace fixtures {

namespace sf = spatialforge;

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "spatialforge-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

inline sf::AudioClip mono(std::uint32_t rate, std::vector<float> samples) {
  sf::AudioClip c;
  c.sample_rate_hz = rate;
  c.channels.push_back(std::move(samples));
  return c;
}

inline sf::AudioClip sine(std::uint32_t rate, double seconds, double freq = 440.0, double amp = 0.5) {
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  std::vector<float> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = static_cast<float>(amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate));
  }
  return mono(rate, std::move(s));
}

inline sf::AudioClip noise(std::uint32_t rate, double seconds, std::uint64_t seed, double amp = 0.5) {
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  std::vector<float> s(n);
  for (auto& v : s) v = static_cast<float>(u(rng));
  return mono(rate, std::move(s));
}

inline sf::Hrir impulse_pair(double az, double el, std::size_t taps, std::size_t left_delay, std::size_t right_delay,
                             float left_gain = 1.0f, float right_gain = 1.0f) {
  sf::Hrir h;
  h.azimuth_deg = az;
  h.elevation_deg = el;
  h.left.assign(taps, 0.0f);
  h.right.assign(taps, 0.0f);
  h.left[left_delay] = left_gain;
  h.right[right_delay] = right_gain;
  return h;
}

// Four directions on the horizontal plane: front, right, back, left.
inline sf::HrirSet identity_set(std::uint32_t rate, std::size_t taps = 1) {
  std::vector<sf::Hrir> irs;
  for (double az : {0.0, 90.0, -180.0, -90.0}) irs.push_back(impulse_pair(az, 0.0, taps, 0, 0));
  return sf::HrirSet::create(rate, std::move(irs));
}

inline sf::HrirSet delay_set(std::uint32_t rate, std::size_t delay) {
  std::vector<sf::Hrir> irs;
  for (double az : {0.0, 90.0, -180.0, -90.0}) irs.push_back(impulse_pair(az, 0.0, delay + 1, 0, delay));
  return sf::HrirSet::create(rate, std::move(irs));
}

// Crude head model: interaural delay and level difference that grow with
// the lateral component of the direction, plus a short decaying tail.
inline sf::Hrir itd_ild_pair(double az, double el, std::uint32_t rate, std::size_t taps) {
  const double lateral = std::sin(az * std::numbers::pi / 180.0) * std::cos(el * std::numbers::pi / 180.0);
  const double max_itd = 0.00066 * rate;
  const auto far_delay = static_cast<std::size_t>(std::lround(std::fabs(lateral) * max_itd));
  const float near_gain = static_cast<float>(1.0 + 0.3 * std::fabs(lateral));
  const float far_gain = static_cast<float>(1.0 - 0.5 * std::fabs(lateral));
  sf::Hrir h;
  h.azimuth_deg = az;
  h.elevation_deg = el;
  h.left.assign(taps, 0.0f);
  h.right.assign(taps, 0.0f);
  auto put = [&](std::vector<float>& ir, std::size_t delay, float gain) {
    for (std::size_t i = delay, j = 0; i < taps; ++i, ++j) ir[i] = gain * static_cast<float>(std::pow(0.6, j) * (j % 2 ? -0.3 : 1.0));
  };
  // Positive lateral = source on the right: the left ear is the far ear.
  put(h.left, lateral >= 0 ? far_delay : 0, lateral >= 0 ? far_gain : near_gain);
  put(h.right, lateral >= 0 ? 0 : far_delay, lateral >= 0 ? near_gain : far_gain);
  return h;
}

inline std::vector<sf::Hrir> synthetic_grid(std::uint32_t rate, std::size_t taps) {
  std::vector<sf::Hrir> irs;
  for (double el : {-60.0, -30.0, 0.0, 30.0, 60.0}) {
    for (double az = -180.0; az < 180.0; az += 30.0) irs.push_back(itd_ild_pair(az, el, rate, taps));
  }
  irs.push_back(itd_ild_pair(0.0, 90.0, rate, taps));
  irs.push_back(itd_ild_pair(0.0, -90.0, rate, taps));
  return irs;
}

inline sf::HrirSet synthetic_set(std::uint32_t rate, std::size_t taps) {
  return sf::HrirSet::create(rate, synthetic_grid(rate, taps));
}

// Writes the IRs as stereo WAVs plus a manifest; returns the manifest path.
inline std::filesystem::path write_hrir_dir(const std::filesystem::path& dir, std::uint32_t rate,
                                            const std::vector<sf::Hrir>& irs) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest = {{"sample_rate_hz", rate}, {"irs", nlohmann::json::array()}};
  for (std::size_t i = 0; i < irs.size(); ++i) {
    const std::string name = "ir_" + std::to_string(i) + ".wav";
    sf::AudioClip clip;
    clip.sample_rate_hz = rate;
    clip.channels = {irs[i].left, irs[i].right};
    sf::write_wav(dir / name, clip);
    manifest["irs"].push_back({{"azimuth_deg", irs[i].azimuth_deg}, {"elevation_deg", irs[i].elevation_deg}, {"file", name}});
  }
  std::ofstream(dir / "manifest.json") << manifest.dump(2);
  return dir / "manifest.json";
}

// Left/right mirror-symmetric set: IR(-az).left == IR(az).right.
inline sf::HrirSet symmetric_set(std::uint32_t rate, std::size_t taps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  auto random_ir = [&] {
    std::vector<float> v(taps);
    for (auto& x : v) x = u(rng);
    return v;
  };
  std::vector<sf::Hrir> irs;
  for (double el : {-45.0, 0.0, 45.0}) {
    for (double az : {0.0, -180.0}) {
      auto ir = random_ir();
      irs.push_back({ir, ir, az, el});
    }
    for (double az : {30.0, 90.0, 150.0}) {
      auto a = random_ir();
      auto b = random_ir();
      irs.push_back({a, b, az, el});
      irs.push_back({b, a, -az, el});
    }
  }
  return sf::HrirSet::create(rate, std::move(irs));
}

inline sf::Trajectory constant_trajectory(const sf::SphericalPos& p, double duration) {
  return sf::linear_trajectory({p, p}, {0.0, duration}, duration);
}

inline sf::SphericalPos random_position(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> az(-180.0, 180.0), el(-90.0, 90.0), d(0.3, 10.0);
  return {sf::wrap_angle(az(rng)), el(rng), d(rng)};
}

}  // namespace fixtures
