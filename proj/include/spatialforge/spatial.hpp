#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spatialforge {

/// Random source used across the library. All randomness is passed in
/// explicitly; nothing in the library owns global RNG state.
using Rng = std::mt19937_64;

enum class AttributeKind : std::uint8_t { Azimuth, Elevation, Distance };

inline constexpr std::array<AttributeKind, 3> kAllKinds = {
    AttributeKind::Azimuth, AttributeKind::Elevation, AttributeKind::Distance};

std::string_view to_string(AttributeKind kind);
std::optional<AttributeKind> parse_kind(std::string_view text);

/// The fifteen perceptual categories. Enumerator order is the table order
/// and is used for tie-breaking.
enum class CategoryId : std::uint8_t {
  Left,
  FrontLeft,
  Front,
  FrontRight,
  Right,
  RightBack,
  Back,
  LeftBack,
  Up,
  Middle,
  Down,
  VeryClose,
  Close,
  Moderate,
  Far,
};

inline constexpr std::size_t kCategoryCount = 15;

/// Closed interval [low, high], degrees for angles and meters for distance.
struct Interval {
  double low;
  double high;

  bool contains(double v) const { return low <= v && v <= high; }
  double length() const { return high - low; }
};

struct Category {
  CategoryId id;
  AttributeKind kind;
  std::string_view name;     // identifier, e.g. "front_right"
  std::string_view caption;  // human-readable label, e.g. "front right"
  std::vector<Interval> ranges;
  bool omittable;
};

/// All categories in table order.
const std::vector<Category>& category_table();
const Category& category(CategoryId id);
std::vector<CategoryId> categories_of(AttributeKind kind);
std::optional<CategoryId> find_category(AttributeKind kind, std::string_view name);
/// The omittable default category for a kind (front / middle / moderate).
CategoryId default_category(AttributeKind kind);

/// Representative value of a category: the interval midpoint, or for the
/// two-interval `back` category the circular midpoint (-180).
double category_midpoint(CategoryId id);

/// Reduces an angle in degrees to [-180, 180). Throws on non-finite input.
double wrap_angle(double deg);

/// Circular absolute difference in degrees, in [0, 180].
double circular_delta(double x_deg, double y_deg);

struct SphericalPos {
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
  double distance_m = 1.0;

  friend bool operator==(const SphericalPos&, const SphericalPos&) = default;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

double norm(const Vec3& v);

// Axis convention: +x points to the listener's front, +y to the listener's
// left, +z up. Azimuth 0 is front and grows toward the right ear, so
// azimuth +90 lies on -y. Elevation is positive above the horizontal plane.
Vec3 sph_to_cart(const SphericalPos& p);

/// Inverse of sph_to_cart. At the poles (x = y = 0) azimuth is 0.
/// Throws std::invalid_argument for the zero vector.
SphericalPos cart_to_sph(const Vec3& v);

/// True when the position satisfies the azimuth/elevation/distance domains.
bool is_valid(const SphericalPos& p);

struct SpatialEndpoints {
  SphericalPos start;
  SphericalPos end;
};

struct CategoryTriple {
  CategoryId azimuth = CategoryId::Front;
  CategoryId elevation = CategoryId::Middle;
  CategoryId distance = CategoryId::Moderate;

  CategoryId get(AttributeKind kind) const;
  void set(AttributeKind kind, CategoryId id);

  friend bool operator==(const CategoryTriple&, const CategoryTriple&) = default;
};

/// Throws std::invalid_argument unless each slot holds a category of the
/// matching kind.
void validate(const CategoryTriple& triple);

struct EventWindow {
  double t0_s = 0.0;
  double t1_s = 0.0;

  friend bool operator==(const EventWindow&, const EventWindow&) = default;
};

void validate(const EventWindow& w);

inline constexpr double kTrajectoryRateHz = 20.0;

/// Number of frames for a clip: floor(duration * 20) + 1.
std::size_t frame_count(double clip_duration_s);

struct Trajectory {
  double rate_hz = kTrajectoryRateHz;
  std::vector<double> azimuth_deg;
  std::vector<double> elevation_deg;
  std::vector<double> distance_m;
  std::vector<std::uint8_t> mask;
  EventWindow window;
  double clip_duration_s = 0.0;

  std::size_t size() const { return mask.size(); }
  SphericalPos at(std::size_t k) const {
    return {azimuth_deg[k], elevation_deg[k], distance_m[k]};
  }
  std::span<const double> values(AttributeKind kind) const;
  /// First and last frame with mask = 1. Throws if the mask is empty.
  std::pair<std::size_t, std::size_t> valid_range() const;
};

/// Checks every Trajectory invariant; throws std::invalid_argument naming
/// the first violation.
void validate(const Trajectory& traj);

/// Uniform draw from the union of the category's ranges. For multi-interval
/// categories the interval is picked with probability proportional to its
/// length. Azimuth values are wrap-normalized.
double sample_endpoint(CategoryId id, Rng& rng);

SpatialEndpoints sample_endpoints(const CategoryTriple& start, const CategoryTriple& end, Rng& rng);

/// Straight-line, constant-speed motion in Cartesian space. The first and
/// last frames inside the window carry the start and end positions exactly;
/// frames before the window hold the start and frames after it hold the end.
/// Throws if the window does not fit the clip or contains no frame.
Trajectory linear_trajectory(const SpatialEndpoints& e, const EventWindow& w, double clip_duration_s);

/// Maps a value back to a category. Values inside exactly one range map to
/// it; overlaps and gaps resolve to the category with the nearest midpoint
/// (circular for azimuth), earlier table entries winning exact ties.
CategoryId classify_value(AttributeKind kind, double v);

struct FourierBand {
  double f_min_hz = 0.05;
  double f_max_hz = 10.0;
};

/// Log-spaced frequencies f_k = f_min * (f_max / f_min)^(k / (F - 1)).
std::vector<double> fourier_frequencies(std::size_t count, FourierBand band = {});

/// Interleaved [sin(2 pi f_k t), cos(2 pi f_k t)] for k = 0..count-1.
std::vector<double> fourier_time_features(double t_s, std::size_t count = 8, FourierBand band = {});

}  // namespace spatialforge
