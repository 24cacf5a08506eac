#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spatialforge/spatial.hpp"

namespace spatialforge {

struct LossWeights {
  double w_az = 1.0;
  double w_el = 1.0;
  double w_ds = 1.0;
  double lambda_time = 1.0;
};

void validate(const LossWeights& w);

/// Masked mean over the ground-truth mask of
///   w_az * circ(az) + w_el * circ(el) + w_ds * |d|.
/// Both angular dimensions use the circular error. Throws on length or rate
/// mismatch and when the ground-truth mask is all zero.
double traj_loss(const Trajectory& pred, const Trajectory& gt, const LossWeights& w);

/// The same weighted error summed over the first and last valid
/// ground-truth steps only.
double endpoint_loss(const Trajectory& pred, const Trajectory& gt, const LossWeights& w);

/// traj_loss + lambda_time * endpoint_loss.
double total_loss(const Trajectory& pred, const Trajectory& gt, const LossWeights& w);

struct ActivityMask {
  double rate_hz = kTrajectoryRateHz;
  std::vector<std::uint8_t> bits;
};

/// bits[k] = 1 iff t0 <= k / rate <= t1.
ActivityMask activity_mask(const EventWindow& w, std::size_t length, double rate_hz);

/// Mean squared difference over the steps outside the window.
double masked_outside_mse(std::span<const double> adjusted, std::span<const double> reference, const EventWindow& w,
                          double rate_hz);

/// Intersection over union of two activity masks.
double olr(const ActivityMask& pred, const ActivityMask& gt);

struct StartEndMae {
  double start_mae_s = 0.0;
  double end_mae_s = 0.0;
};

StartEndMae start_end_mae(std::span<const EventWindow> preds, std::span<const EventWindow> gts);

/// Absolute error, circular for the angular kinds.
double attribute_error(AttributeKind kind, double pred, double gt);

double mae(std::span<const double> preds, std::span<const double> gts, AttributeKind kind);

enum class RaMaeMode {
  ClampPred,  // distance from the prediction to the nearest valid range
  ClampGt,    // min over ranges of |pred - clamp(gt, range)|
};

std::string_view to_string(RaMaeMode mode);
std::optional<RaMaeMode> parse_ra_mae_mode(std::string_view text);

/// Per-item range-aware error (see RaMaeMode).
double ra_error(AttributeKind kind, double pred, double gt, RaMaeMode mode);

double ra_mae(std::span<const double> preds, std::span<const double> gts, AttributeKind kind,
              RaMaeMode mode = RaMaeMode::ClampPred);

struct ClassificationReport {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<CategoryId> labels;                 // categories of the kind, table order
  std::vector<std::vector<std::size_t>> confusion;  // [gt][pred]
};

/// Maps both sequences through classify_value and scores them. Macro-F1
/// averages only categories present in the ground truth.
ClassificationReport classification_report(std::span<const double> preds, std::span<const double> gts,
                                           AttributeKind kind);

/// As above, with the ground truth given as known categories.
ClassificationReport classification_report(std::span<const double> preds, std::span<const CategoryId> gt_labels,
                                           AttributeKind kind);

ClassificationReport classification_report_labels(std::span<const CategoryId> preds,
                                                  std::span<const CategoryId> gts, AttributeKind kind);

struct AttributeScores {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double mae = 0.0;
  double ra_mae = 0.0;
};

struct LossSummary {
  double traj = 0.0;
  double time = 0.0;
  double total = 0.0;
};

struct EvalReport {
  std::array<AttributeScores, 3> attributes;  // indexed by AttributeKind
  double start_mae_s = 0.0;
  double end_mae_s = 0.0;
  double olr = 0.0;
  std::optional<LossSummary> losses;
  std::size_t pairs = 0;
  std::size_t steps = 0;

  const AttributeScores& operator[](AttributeKind k) const { return attributes[static_cast<std::size_t>(k)]; }
};

struct EvalOptions {
  LossWeights weights;
  RaMaeMode mode = RaMaeMode::ClampPred;
  bool endpoints_only = false;  // score only the first/last valid steps
  bool parallel = true;
};

/// Scores paired trajectories. Attribute metrics pool every ground-truth
/// valid step (or only endpoints); losses and temporal metrics are averaged
/// over pairs, with windows taken from each trajectory's mask. Per-pair work
/// may run in parallel; reductions run in pair order.
EvalReport evaluate_trajectories(std::span<const Trajectory> preds, std::span<const Trajectory> gts,
                                 const EvalOptions& options = {});

/// JSON text with keys accuracy, macro_f1, mae, ra_mae per attribute and
/// start_mae, end_mae, olr at the top level.
std::string to_json(const EvalReport& report, int indent = 2);

}  // namespace spatialforge
