#include "spatialforge/hrir.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "spatialforge/audio.hpp"
#include "spatialforge/spatial.hpp"

namespace spatialforge {

namespace {

std::array<double, 3> unit_direction(double az, double el) {
  const Vec3 v = sph_to_cart({az, el, 1.0});
  return {v.x, v.y, v.z};
}

// Angle between unit vectors via atan2(|a x b|, a . b), accurate near 0.
double angle_between(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  const double cx = a[1] * b[2] - a[2] * b[1];
  const double cy = a[2] * b[0] - a[0] * b[2];
  const double cz = a[0] * b[1] - a[1] * b[0];
  const double dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
  return std::atan2(std::hypot(cx, cy, cz), dot);
}

std::string describe(const Hrir& ir) {
  std::ostringstream os;
  os << "(az " << ir.azimuth_deg << ", el " << ir.elevation_deg << ")";
  return os.str();
}

}  // namespace

double great_circle_deg(double az1_deg, double el1_deg, double az2_deg, double el2_deg) {
  return angle_between(unit_direction(az1_deg, el1_deg), unit_direction(az2_deg, el2_deg)) * 180.0 /
         3.14159265358979323846;
}

HrirSet::HrirSet(std::uint32_t rate, std::vector<Hrir> irs) : sample_rate_hz_(rate), irs_(std::move(irs)) {
  directions_.reserve(irs_.size());
  for (const auto& ir : irs_) directions_.push_back(unit_direction(ir.azimuth_deg, ir.elevation_deg));
}

HrirSet HrirSet::create(std::uint32_t sample_rate_hz, std::vector<Hrir> irs) {
  if (sample_rate_hz == 0) throw std::invalid_argument("HRIR set has a zero sample rate");
  if (irs.empty()) throw std::invalid_argument("HRIR set is empty");
  const std::size_t n = irs.front().left.size();
  std::map<std::pair<double, double>, std::size_t> seen;
  for (std::size_t i = 0; i < irs.size(); ++i) {
    auto& ir = irs[i];
    if (!std::isfinite(ir.azimuth_deg) || !std::isfinite(ir.elevation_deg) || ir.elevation_deg < -90.0 ||
        ir.elevation_deg > 90.0) {
      throw std::invalid_argument("HRIR " + std::to_string(i) + " has an invalid direction " + describe(ir));
    }
    ir.azimuth_deg = wrap_angle(ir.azimuth_deg);
    if (ir.left.empty() || ir.left.size() != ir.right.size()) {
      throw std::invalid_argument("HRIR " + describe(ir) + " has unequal or empty ear responses");
    }
    if (ir.left.size() != n) {
      throw std::invalid_argument("HRIR " + describe(ir) + " has length " + std::to_string(ir.left.size()) +
                                  ", expected " + std::to_string(n));
    }
    for (const auto* ear : {&ir.left, &ir.right}) {
      for (float s : *ear) {
        if (!std::isfinite(s)) throw std::invalid_argument("HRIR " + describe(ir) + " has non-finite samples");
      }
    }
    const auto [it, inserted] = seen.emplace(std::make_pair(ir.azimuth_deg, ir.elevation_deg), i);
    if (!inserted) throw std::invalid_argument("duplicate HRIR direction " + describe(ir));
  }
  return HrirSet(sample_rate_hz, std::move(irs));
}

std::size_t HrirSet::nearest_index(double azimuth_deg, double elevation_deg) const {
  const auto query = unit_direction(wrap_angle(azimuth_deg), elevation_deg);
  std::size_t best = 0;
  double best_angle = angle_between(query, directions_[0]);
  for (std::size_t i = 1; i < irs_.size(); ++i) {
    const double a = angle_between(query, directions_[i]);
    if (a < best_angle) {
      best = i;
      best_angle = a;
    } else if (a == best_angle) {
      const auto& cand = irs_[i];
      const auto& cur = irs_[best];
      if (cand.elevation_deg < cur.elevation_deg ||
          (cand.elevation_deg == cur.elevation_deg && cand.azimuth_deg < cur.azimuth_deg)) {
        best = i;
      }
    }
  }
  return best;
}

HrirSet load_hrir_set(const std::filesystem::path& manifest_path) {
  using nlohmann::json;
  std::ifstream is(manifest_path);
  if (!is) throw std::runtime_error("cannot open HRIR manifest " + manifest_path.string());
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::exception& e) {
    throw std::runtime_error(manifest_path.string() + ": malformed JSON: " + e.what());
  }
  const auto fail = [&](const std::string& what) { return std::runtime_error(manifest_path.string() + ": " + what); };
  if (!doc.is_object() || !doc.contains("sample_rate_hz") || !doc.contains("irs") || !doc["irs"].is_array()) {
    throw fail("manifest needs 'sample_rate_hz' and an 'irs' array");
  }
  const auto rate = doc["sample_rate_hz"].get<std::uint32_t>();
  if (doc["irs"].empty()) throw fail("manifest lists no impulse responses");

  const auto base = manifest_path.parent_path();
  std::vector<Hrir> irs;
  std::map<std::uint32_t, std::string> rates;  // rate -> first file using it
  for (std::size_t i = 0; i < doc["irs"].size(); ++i) {
    const auto& entry = doc["irs"][i];
    const std::string where = "entry " + std::to_string(i);
    if (!entry.contains("azimuth_deg") || !entry.contains("elevation_deg") || !entry.contains("file")) {
      throw fail(where + ": needs azimuth_deg, elevation_deg and file");
    }
    const auto file = entry["file"].get<std::string>();
    const auto path = base / file;
    AudioClip clip;
    try {
      clip = read_wav(path);
    } catch (const std::exception& e) {
      throw fail(where + " (" + file + "): " + e.what());
    }
    if (clip.channel_count() != 2) {
      throw fail(where + " (" + file + "): expected 2 channels, found " + std::to_string(clip.channel_count()));
    }
    rates.emplace(clip.sample_rate_hz, file);
    Hrir ir;
    ir.azimuth_deg = entry["azimuth_deg"].get<double>();
    ir.elevation_deg = entry["elevation_deg"].get<double>();
    ir.left = std::move(clip.channels[0]);
    ir.right = std::move(clip.channels[1]);
    irs.push_back(std::move(ir));
  }

  rates.emplace(rate, "manifest");
  if (rates.size() > 1) {
    std::string msg = "inconsistent sample rates:";
    for (const auto& [r, who] : rates) msg += " " + std::to_string(r) + " Hz (" + who + ")";
    throw fail(msg);
  }
  try {
    return HrirSet::create(rate, std::move(irs));
  } catch (const std::invalid_argument& e) {
    throw fail(e.what());
  }
}

}  // namespace spatialforge
