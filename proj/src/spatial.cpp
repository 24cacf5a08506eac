#include "spatialforge/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spatialforge {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Below this norm an interpolated position is treated as passing through
// the listener's head.
constexpr double kMinDistance = 1e-9;

std::vector<Category> build_table() {
  using K = AttributeKind;
  using C = CategoryId;
  // Ranges are stored low < high; some are printed reversed in the source
  // table (front left, left back, down).
  return {
      {C::Left, K::Azimuth, "left", "left", {{-100, -80}}, false},
      {C::FrontLeft, K::Azimuth, "front_left", "front left", {{-55, -35}}, false},
      {C::Front, K::Azimuth, "front", "front", {{-10, 10}}, true},
      {C::FrontRight, K::Azimuth, "front_right", "front right", {{35, 55}}, false},
      {C::Right, K::Azimuth, "right", "right", {{80, 100}}, false},
      {C::RightBack, K::Azimuth, "right_back", "right back", {{125, 145}}, false},
      {C::Back, K::Azimuth, "back", "back", {{-180, -170}, {170, 180}}, false},
      {C::LeftBack, K::Azimuth, "left_back", "left back", {{-145, -125}}, false},
      {C::Up, K::Elevation, "up", "up", {{70, 90}}, false},
      {C::Middle, K::Elevation, "middle", "middle", {{-10, 10}}, true},
      {C::Down, K::Elevation, "down", "down", {{-90, -70}}, false},
      {C::VeryClose, K::Distance, "very_close", "very close", {{0.3, 0.6}}, false},
      {C::Close, K::Distance, "close", "close", {{0.5, 1.0}}, false},
      {C::Moderate, K::Distance, "moderate", "moderate", {{1.0, 3.0}}, true},
      {C::Far, K::Distance, "far", "far", {{3.0, 10.0}}, false},
  };
}

// sin/cos in degrees, exact at multiples of 90.
void sincos_deg(double deg, double& s, double& c) {
  const double q = deg / 90.0;
  if (q == std::floor(q) && std::abs(q) <= 4.0) {
    static constexpr double kSin[4] = {0.0, 1.0, 0.0, -1.0};
    static constexpr double kCos[4] = {1.0, 0.0, -1.0, 0.0};
    const int idx = ((static_cast<int>(q) % 4) + 4) % 4;
    s = kSin[idx];
    c = kCos[idx];
    return;
  }
  s = std::sin(deg * kDegToRad);
  c = std::cos(deg * kDegToRad);
}

double angular_distance(AttributeKind kind, double a, double b) {
  return kind == AttributeKind::Azimuth ? circular_delta(a, b) : std::abs(a - b);
}

}  // namespace

std::string_view to_string(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::Azimuth:
      return "azimuth";
    case AttributeKind::Elevation:
      return "elevation";
    case AttributeKind::Distance:
      return "distance";
  }
  return "unknown";
}

std::optional<AttributeKind> parse_kind(std::string_view text) {
  for (auto kind : kAllKinds) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

const std::vector<Category>& category_table() {
  static const std::vector<Category> table = build_table();
  return table;
}

const Category& category(CategoryId id) {
  return category_table().at(static_cast<std::size_t>(id));
}

std::vector<CategoryId> categories_of(AttributeKind kind) {
  std::vector<CategoryId> out;
  for (const auto& c : category_table()) {
    if (c.kind == kind) out.push_back(c.id);
  }
  return out;
}

std::optional<CategoryId> find_category(AttributeKind kind, std::string_view name) {
  for (const auto& c : category_table()) {
    if (c.kind == kind && (c.name == name || c.caption == name)) return c.id;
  }
  return std::nullopt;
}

CategoryId default_category(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::Azimuth:
      return CategoryId::Front;
    case AttributeKind::Elevation:
      return CategoryId::Middle;
    case AttributeKind::Distance:
      return CategoryId::Moderate;
  }
  throw std::invalid_argument("unknown attribute kind");
}

double category_midpoint(CategoryId id) {
  const auto& c = category(id);
  if (c.ranges.size() == 1) return 0.5 * (c.ranges[0].low + c.ranges[0].high);

  // Multi-interval azimuth ranges meet at the +-180 seam; merge them into a
  // single arc before taking the midpoint.
  double low = 0.0;
  double high = 0.0;
  double total = 0.0;
  double weighted = 0.0;
  bool seam = false;
  for (const auto& r : c.ranges) {
    if (r.high == 180.0) low = r.low, seam = true;
    total += r.length();
    weighted += r.length() * 0.5 * (r.low + r.high);
  }
  if (c.kind == AttributeKind::Azimuth && seam) {
    high = low;
    for (const auto& r : c.ranges) {
      if (r.low == -180.0) high = r.high + 360.0;
    }
    return wrap_angle(0.5 * (low + high));
  }
  return weighted / total;
}

double wrap_angle(double deg) {
  if (!std::isfinite(deg)) throw std::invalid_argument("wrap_angle: non-finite angle");
  if (deg >= -180.0 && deg < 180.0) return deg;
  double r = std::fmod(deg + 180.0, 360.0);
  if (r < 0.0) r += 360.0;
  if (r >= 360.0) r -= 360.0;
  return r - 180.0;
}

double circular_delta(double x_deg, double y_deg) {
  const double d = std::abs(wrap_angle(x_deg) - wrap_angle(y_deg));
  return std::min(d, 360.0 - d);
}

double norm(const Vec3& v) { return std::hypot(v.x, v.y, v.z); }

Vec3 sph_to_cart(const SphericalPos& p) {
  double s_az, c_az, s_el, c_el;
  sincos_deg(p.azimuth_deg, s_az, c_az);
  sincos_deg(p.elevation_deg, s_el, c_el);
  const double horiz = p.distance_m * c_el;
  return {horiz * c_az, -horiz * s_az, p.distance_m * s_el};
}

SphericalPos cart_to_sph(const Vec3& v) {
  const double d = norm(v);
  if (d == 0.0) throw std::invalid_argument("cart_to_sph: zero vector has no direction");
  const double rho = std::hypot(v.x, v.y);
  const double el = std::atan2(v.z, rho) * kRadToDeg;
  const double az = rho == 0.0 ? 0.0 : wrap_angle(std::atan2(-v.y, v.x) * kRadToDeg);
  return {az, el, d};
}

bool is_valid(const SphericalPos& p) {
  return std::isfinite(p.azimuth_deg) && std::isfinite(p.elevation_deg) &&
         std::isfinite(p.distance_m) && p.azimuth_deg >= -180.0 && p.azimuth_deg < 180.0 &&
         p.elevation_deg >= -90.0 && p.elevation_deg <= 90.0 && p.distance_m > 0.0;
}

CategoryId CategoryTriple::get(AttributeKind kind) const {
  switch (kind) {
    case AttributeKind::Azimuth:
      return azimuth;
    case AttributeKind::Elevation:
      return elevation;
    case AttributeKind::Distance:
      return distance;
  }
  throw std::invalid_argument("unknown attribute kind");
}

void CategoryTriple::set(AttributeKind kind, CategoryId id) {
  switch (kind) {
    case AttributeKind::Azimuth:
      azimuth = id;
      return;
    case AttributeKind::Elevation:
      elevation = id;
      return;
    case AttributeKind::Distance:
      distance = id;
      return;
  }
}

void validate(const CategoryTriple& triple) {
  for (auto kind : kAllKinds) {
    const auto& c = category(triple.get(kind));
    if (c.kind != kind) {
      throw std::invalid_argument("category '" + std::string(c.name) + "' placed in the " +
                                  std::string(to_string(kind)) + " slot");
    }
  }
}

void validate(const EventWindow& w) {
  if (!std::isfinite(w.t0_s) || !std::isfinite(w.t1_s)) {
    throw std::invalid_argument("event window: non-finite timestamp");
  }
  if (w.t0_s < 0.0) throw std::invalid_argument("event window: t0 is negative");
  if (!(w.t0_s < w.t1_s)) throw std::invalid_argument("event window: t0 must be before t1");
}

std::size_t frame_count(double clip_duration_s) {
  if (!std::isfinite(clip_duration_s) || clip_duration_s < 0.0) {
    throw std::invalid_argument("clip duration must be finite and non-negative");
  }
  // The small slack absorbs representation error in durations like 0.35 s.
  return static_cast<std::size_t>(std::floor(clip_duration_s * kTrajectoryRateHz + 1e-9)) + 1;
}

std::span<const double> Trajectory::values(AttributeKind kind) const {
  switch (kind) {
    case AttributeKind::Azimuth:
      return azimuth_deg;
    case AttributeKind::Elevation:
      return elevation_deg;
    case AttributeKind::Distance:
      return distance_m;
  }
  throw std::invalid_argument("unknown attribute kind");
}

std::pair<std::size_t, std::size_t> Trajectory::valid_range() const {
  const auto first = std::find(mask.begin(), mask.end(), std::uint8_t{1});
  if (first == mask.end()) throw std::invalid_argument("trajectory mask has no valid step");
  const auto last = std::find(mask.rbegin(), mask.rend(), std::uint8_t{1});
  return {static_cast<std::size_t>(first - mask.begin()),
          mask.size() - 1 - static_cast<std::size_t>(last - mask.rbegin())};
}

void validate(const Trajectory& traj) {
  if (traj.rate_hz != kTrajectoryRateHz) throw std::invalid_argument("trajectory rate must be 20 Hz");
  validate(traj.window);
  const std::size_t n = frame_count(traj.clip_duration_s);
  if (traj.azimuth_deg.size() != n || traj.elevation_deg.size() != n ||
      traj.distance_m.size() != n || traj.mask.size() != n) {
    throw std::invalid_argument("trajectory sequences must all have " + std::to_string(n) + " frames");
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / traj.rate_hz;
    const std::uint8_t expect = (traj.window.t0_s <= t && t <= traj.window.t1_s) ? 1 : 0;
    if (traj.mask[k] != expect) {
      throw std::invalid_argument("trajectory mask disagrees with window at frame " + std::to_string(k));
    }
    if (!is_valid(traj.at(k))) {
      throw std::invalid_argument("trajectory frame " + std::to_string(k) + " is out of range");
    }
  }
  (void)traj.valid_range();
}

double sample_endpoint(CategoryId id, Rng& rng) {
  const auto& c = category(id);
  double total = 0.0;
  for (const auto& r : c.ranges) total += r.length();
  double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  for (const auto& r : c.ranges) {
    if (u < r.length() || &r == &c.ranges.back()) {
      const double v = std::min(r.low + u, r.high);
      return c.kind == AttributeKind::Azimuth ? wrap_angle(v) : v;
    }
    u -= r.length();
  }
  return category_midpoint(id);  // unreachable
}

SpatialEndpoints sample_endpoints(const CategoryTriple& start, const CategoryTriple& end, Rng& rng) {
  validate(start);
  validate(end);
  SpatialEndpoints e;
  e.start.azimuth_deg = sample_endpoint(start.azimuth, rng);
  e.start.elevation_deg = sample_endpoint(start.elevation, rng);
  e.start.distance_m = sample_endpoint(start.distance, rng);
  e.end.azimuth_deg = sample_endpoint(end.azimuth, rng);
  e.end.elevation_deg = sample_endpoint(end.elevation, rng);
  e.end.distance_m = sample_endpoint(end.distance, rng);
  return e;
}

Trajectory linear_trajectory(const SpatialEndpoints& e, const EventWindow& w, double clip_duration_s) {
  validate(w);
  if (!is_valid(e.start) || !is_valid(e.end)) {
    throw std::invalid_argument("linear_trajectory: endpoint outside the spherical domain");
  }
  if (w.t1_s > clip_duration_s + 1e-9) {
    throw std::invalid_argument("linear_trajectory: event window ends after the clip");
  }

  const std::size_t n = frame_count(clip_duration_s);
  Trajectory traj;
  traj.window = w;
  traj.clip_duration_s = clip_duration_s;
  traj.mask.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / kTrajectoryRateHz;
    traj.mask[k] = (w.t0_s <= t && t <= w.t1_s) ? 1 : 0;
  }
  if (std::find(traj.mask.begin(), traj.mask.end(), 1) == traj.mask.end()) {
    throw std::invalid_argument("linear_trajectory: event window contains no 20 Hz frame");
  }
  const auto [s, last] = traj.valid_range();

  const Vec3 p0 = sph_to_cart(e.start);
  const Vec3 p1 = sph_to_cart(e.end);
  const Vec3 step{p1.x - p0.x, p1.y - p0.y, p1.z - p0.z};

  traj.azimuth_deg.resize(n);
  traj.elevation_deg.resize(n);
  traj.distance_m.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    SphericalPos pos;
    if (k <= s) {
      pos = e.start;
    } else if (k >= last) {
      pos = e.end;
    } else {
      const double alpha = static_cast<double>(k - s) / static_cast<double>(last - s);
      const Vec3 p{p0.x + alpha * step.x, p0.y + alpha * step.y, p0.z + alpha * step.z};
      if (norm(p) < kMinDistance) {
        // The straight path crosses the head centre; keep a defined direction.
        pos = {e.end.azimuth_deg, e.end.elevation_deg, kMinDistance};
      } else {
        pos = cart_to_sph(p);
      }
    }
    traj.azimuth_deg[k] = pos.azimuth_deg;
    traj.elevation_deg[k] = pos.elevation_deg;
    traj.distance_m[k] = pos.distance_m;
  }
  return traj;
}

CategoryId classify_value(AttributeKind kind, double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("classify_value: non-finite value");
  if (kind == AttributeKind::Azimuth) v = wrap_angle(v);

  const auto ids = categories_of(kind);
  std::optional<CategoryId> hit;
  int hits = 0;
  for (auto id : ids) {
    for (const auto& r : category(id).ranges) {
      if (r.contains(v)) {
        hit = id;
        ++hits;
        break;
      }
    }
  }
  if (hits == 1) return *hit;

  CategoryId best = ids.front();
  double best_dist = angular_distance(kind, v, category_midpoint(best));
  for (auto id : ids) {
    const double d = angular_distance(kind, v, category_midpoint(id));
    if (d < best_dist) best = id, best_dist = d;
  }
  return best;
}

std::vector<double> fourier_frequencies(std::size_t count, FourierBand band) {
  if (count == 0) throw std::invalid_argument("fourier features need at least one frequency");
  if (!(band.f_min_hz > 0.0) || !(band.f_max_hz >= band.f_min_hz)) {
    throw std::invalid_argument("fourier band must satisfy 0 < f_min <= f_max");
  }
  std::vector<double> f(count);
  const double ratio = band.f_max_hz / band.f_min_hz;
  for (std::size_t k = 0; k < count; ++k) {
    const double e = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
    f[k] = band.f_min_hz * std::pow(ratio, e);
  }
  return f;
}

std::vector<double> fourier_time_features(double t_s, std::size_t count, FourierBand band) {
  if (!std::isfinite(t_s)) throw std::invalid_argument("fourier features: non-finite time");
  std::vector<double> out;
  out.reserve(2 * count);
  for (double f : fourier_frequencies(count, band)) {
    const double phase = 2.0 * std::numbers::pi * f * t_s;
    out.push_back(std::sin(phase));
    out.push_back(std::cos(phase));
  }
  return out;
}

}  // namespace spatialforge
