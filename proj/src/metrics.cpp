#include "spatialforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace spatialforge {

namespace {

void check_pair(const Trajectory& pred, const Trajectory& gt) {
  const std::size_t n = gt.size();
  if (pred.size() != n || pred.azimuth_deg.size() != n || pred.elevation_deg.size() != n ||
      pred.distance_m.size() != n || gt.azimuth_deg.size() != n || gt.elevation_deg.size() != n ||
      gt.distance_m.size() != n) {
    throw std::invalid_argument("trajectory length mismatch: " + std::to_string(pred.size()) + " vs " +
                                std::to_string(n) + " steps");
  }
  if (pred.rate_hz != gt.rate_hz) throw std::invalid_argument("trajectory rate mismatch");
}

double step_error(const Trajectory& pred, const Trajectory& gt, std::size_t t, const LossWeights& w) {
  return w.w_az * circular_delta(pred.azimuth_deg[t], gt.azimuth_deg[t]) +
         w.w_el * circular_delta(pred.elevation_deg[t], gt.elevation_deg[t]) +
         w.w_ds * std::abs(pred.distance_m[t] - gt.distance_m[t]);
}

template <typename A, typename B>
void check_counts(std::span<A> a, std::span<B> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("prediction and ground-truth counts differ (" + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw std::invalid_argument("metrics need at least one item");
}

// Nearest point of the closed range to v; circular for azimuth.
double project(AttributeKind kind, const Interval& r, double v) {
  if (kind != AttributeKind::Azimuth) return std::clamp(v, r.low, r.high);
  v = wrap_angle(v);
  if (r.contains(v)) return v;
  return circular_delta(v, r.low) <= circular_delta(v, r.high) ? r.low : r.high;
}

std::size_t label_index(const std::vector<CategoryId>& labels, CategoryId id) {
  const auto it = std::find(labels.begin(), labels.end(), id);
  if (it == labels.end()) throw std::invalid_argument("category '" + std::string(category(id).name) + "' has the wrong kind");
  return static_cast<std::size_t>(it - labels.begin());
}

}  // namespace

void validate(const LossWeights& w) {
  if (!(w.w_az > 0.0) || !(w.w_el > 0.0) || !(w.w_ds > 0.0)) {
    throw std::invalid_argument("loss weights w_az, w_el, w_ds must be positive");
  }
  if (!(w.lambda_time >= 0.0)) throw std::invalid_argument("lambda_time must be non-negative");
}

double traj_loss(const Trajectory& pred, const Trajectory& gt, const LossWeights& w) {
  validate(w);
  check_pair(pred, gt);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t t = 0; t < gt.size(); ++t) {
    if (!gt.mask[t]) continue;
    num += step_error(pred, gt, t, w);
    den += 1.0;
  }
  if (den == 0.0) throw std::invalid_argument("ground-truth mask has no valid step");
  return num / den;
}

double endpoint_loss(const Trajectory& pred, const Trajectory& gt, const LossWeights& w) {
  validate(w);
  check_pair(pred, gt);
  const auto [s, e] = gt.valid_range();
  return step_error(pred, gt, s, w) + step_error(pred, gt, e, w);
}

double total_loss(const Trajectory& pred, const Trajectory& gt, const LossWeights& w) {
  return traj_loss(pred, gt, w) + w.lambda_time * endpoint_loss(pred, gt, w);
}

ActivityMask activity_mask(const EventWindow& w, std::size_t length, double rate_hz) {
  if (length == 0) throw std::invalid_argument("activity mask needs at least one step");
  if (!(rate_hz > 0.0)) throw std::invalid_argument("activity mask rate must be positive");
  ActivityMask m{rate_hz, std::vector<std::uint8_t>(length)};
  for (std::size_t k = 0; k < length; ++k) {
    const double t = static_cast<double>(k) / rate_hz;
    m.bits[k] = (w.t0_s <= t && t <= w.t1_s) ? 1 : 0;
  }
  return m;
}

double masked_outside_mse(std::span<const double> adjusted, std::span<const double> reference, const EventWindow& w,
                          double rate_hz) {
  if (adjusted.size() != reference.size()) throw std::invalid_argument("masked MSE: sequences differ in length");
  const auto inside = activity_mask(w, adjusted.size(), rate_hz);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t t = 0; t < adjusted.size(); ++t) {
    if (inside.bits[t]) continue;
    const double d = adjusted[t] - reference[t];
    num += d * d;
    den += 1.0;
  }
  if (den == 0.0) throw std::invalid_argument("masked MSE: the window covers every step");
  return num / den;
}

double olr(const ActivityMask& pred, const ActivityMask& gt) {
  if (pred.bits.size() != gt.bits.size()) throw std::invalid_argument("OLR: masks differ in length");
  if (pred.rate_hz != gt.rate_hz) throw std::invalid_argument("OLR: masks differ in rate");
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t t = 0; t < gt.bits.size(); ++t) {
    inter += static_cast<std::size_t>(pred.bits[t] && gt.bits[t]);
    uni += static_cast<std::size_t>(pred.bits[t] || gt.bits[t]);
  }
  if (uni == 0) throw std::invalid_argument("OLR: both masks are empty");
  return static_cast<double>(inter) / static_cast<double>(uni);
}

StartEndMae start_end_mae(std::span<const EventWindow> preds, std::span<const EventWindow> gts) {
  check_counts(preds, gts);
  StartEndMae r;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    r.start_mae_s += std::abs(preds[i].t0_s - gts[i].t0_s);
    r.end_mae_s += std::abs(preds[i].t1_s - gts[i].t1_s);
  }
  r.start_mae_s /= static_cast<double>(preds.size());
  r.end_mae_s /= static_cast<double>(preds.size());
  return r;
}

double attribute_error(AttributeKind kind, double pred, double gt) {
  return kind == AttributeKind::Distance ? std::abs(pred - gt) : circular_delta(pred, gt);
}

double mae(std::span<const double> preds, std::span<const double> gts, AttributeKind kind) {
  check_counts(preds, gts);
  double sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) sum += attribute_error(kind, preds[i], gts[i]);
  return sum / static_cast<double>(preds.size());
}

std::string_view to_string(RaMaeMode mode) { return mode == RaMaeMode::ClampPred ? "clamp_pred" : "clamp_gt"; }

std::optional<RaMaeMode> parse_ra_mae_mode(std::string_view text) {
  if (text == "clamp_pred") return RaMaeMode::ClampPred;
  if (text == "clamp_gt") return RaMaeMode::ClampGt;
  return std::nullopt;
}

double ra_error(AttributeKind kind, double pred, double gt, RaMaeMode mode) {
  double best = std::numeric_limits<double>::infinity();
  for (auto id : categories_of(kind)) {
    for (const auto& r : category(id).ranges) {
      const double anchor = project(kind, r, mode == RaMaeMode::ClampPred ? pred : gt);
      best = std::min(best, attribute_error(kind, pred, anchor));
    }
  }
  return best;
}

double ra_mae(std::span<const double> preds, std::span<const double> gts, AttributeKind kind, RaMaeMode mode) {
  check_counts(preds, gts);
  double sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) sum += ra_error(kind, preds[i], gts[i], mode);
  return sum / static_cast<double>(preds.size());
}

ClassificationReport classification_report_labels(std::span<const CategoryId> preds, std::span<const CategoryId> gts,
                                                  AttributeKind kind) {
  check_counts(preds, gts);
  ClassificationReport r;
  r.labels = categories_of(kind);
  const std::size_t n = r.labels.size();
  r.confusion.assign(n, std::vector<std::size_t>(n, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto g = label_index(r.labels, gts[i]);
    const auto p = label_index(r.labels, preds[i]);
    ++r.confusion[g][p];
    correct += static_cast<std::size_t>(g == p);
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(preds.size());

  double f1_sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t support = 0, predicted = 0;
    for (std::size_t j = 0; j < n; ++j) {
      support += r.confusion[c][j];
      predicted += r.confusion[j][c];
    }
    if (support == 0) continue;
    ++present;
    const double tp = static_cast<double>(r.confusion[c][c]);
    const double fp = static_cast<double>(predicted) - tp;
    const double fn = static_cast<double>(support) - tp;
    f1_sum += tp == 0.0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);
  }
  r.macro_f1 = f1_sum / static_cast<double>(present);
  return r;
}

ClassificationReport classification_report(std::span<const double> preds, std::span<const CategoryId> gt_labels,
                                           AttributeKind kind) {
  check_counts(preds, gt_labels);
  std::vector<CategoryId> p(preds.size());
  std::transform(preds.begin(), preds.end(), p.begin(), [kind](double v) { return classify_value(kind, v); });
  return classification_report_labels(p, gt_labels, kind);
}

ClassificationReport classification_report(std::span<const double> preds, std::span<const double> gts,
                                           AttributeKind kind) {
  check_counts(preds, gts);
  std::vector<CategoryId> g(gts.size());
  std::transform(gts.begin(), gts.end(), g.begin(), [kind](double v) { return classify_value(kind, v); });
  return classification_report(preds, std::span<const CategoryId>(g), kind);
}

EvalReport evaluate_trajectories(std::span<const Trajectory> preds, std::span<const Trajectory> gts,
                                 const EvalOptions& options) {
  check_counts(preds, gts);
  validate(options.weights);

  struct PairResult {
    LossSummary loss;
    EventWindow pred_window;
    EventWindow gt_window;
    double olr = 0.0;
    std::array<std::vector<double>, 3> pred_values;
    std::array<std::vector<double>, 3> gt_values;
  };
  std::vector<PairResult> results(preds.size());
  std::vector<std::string> errors(preds.size());

  const auto run = [&](std::size_t i) {
    try {
      const auto& p = preds[i];
      const auto& g = gts[i];
      auto& r = results[i];
      r.loss.traj = traj_loss(p, g, options.weights);
      r.loss.time = endpoint_loss(p, g, options.weights);
      r.loss.total = r.loss.traj + options.weights.lambda_time * r.loss.time;
      const auto [gs, ge] = g.valid_range();
      const auto [ps, pe] = p.valid_range();
      r.gt_window = {static_cast<double>(gs) / g.rate_hz, static_cast<double>(ge) / g.rate_hz};
      r.pred_window = {static_cast<double>(ps) / p.rate_hz, static_cast<double>(pe) / p.rate_hz};
      r.olr = olr({p.rate_hz, p.mask}, {g.rate_hz, g.mask});
      for (std::size_t t = 0; t < g.size(); ++t) {
        const bool take = options.endpoints_only ? (t == gs || t == ge) : g.mask[t] != 0;
        if (!take) continue;
        for (auto kind : kAllKinds) {
          const auto k = static_cast<std::size_t>(kind);
          r.pred_values[k].push_back(p.values(kind)[t]);
          r.gt_values[k].push_back(g.values(kind)[t]);
        }
      }
    } catch (const std::exception& e) {
      errors[i] = "pair " + std::to_string(i) + ": " + e.what();
    }
  };

  const auto n = static_cast<std::ptrdiff_t>(preds.size());
  if (options.parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) run(static_cast<std::size_t>(i));
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) run(static_cast<std::size_t>(i));
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw std::invalid_argument(e);
  }

  EvalReport report;
  report.pairs = preds.size();
  LossSummary loss;
  std::vector<EventWindow> pw, gw;
  double olr_sum = 0.0;
  std::array<std::vector<double>, 3> pv, gv;
  for (const auto& r : results) {
    loss.traj += r.loss.traj;
    loss.time += r.loss.time;
    loss.total += r.loss.total;
    pw.push_back(r.pred_window);
    gw.push_back(r.gt_window);
    olr_sum += r.olr;
    for (std::size_t k = 0; k < 3; ++k) {
      pv[k].insert(pv[k].end(), r.pred_values[k].begin(), r.pred_values[k].end());
      gv[k].insert(gv[k].end(), r.gt_values[k].begin(), r.gt_values[k].end());
    }
  }
  const double count = static_cast<double>(preds.size());
  report.losses = LossSummary{loss.traj / count, loss.time / count, loss.total / count};
  const auto se = start_end_mae(pw, gw);
  report.start_mae_s = se.start_mae_s;
  report.end_mae_s = se.end_mae_s;
  report.olr = olr_sum / count;
  report.steps = pv[0].size();
  for (auto kind : kAllKinds) {
    const auto k = static_cast<std::size_t>(kind);
    const auto cls = classification_report(std::span<const double>(pv[k]), std::span<const double>(gv[k]), kind);
    report.attributes[k] = {cls.accuracy, cls.macro_f1, mae(pv[k], gv[k], kind), ra_mae(pv[k], gv[k], kind, options.mode)};
  }
  return report;
}

std::string to_json(const EvalReport& report, int indent) {
  nlohmann::ordered_json doc;
  for (auto kind : kAllKinds) {
    const auto& s = report[kind];
    doc[std::string(to_string(kind))] = {
        {"accuracy", s.accuracy}, {"macro_f1", s.macro_f1}, {"mae", s.mae}, {"ra_mae", s.ra_mae}};
  }
  doc["start_mae"] = report.start_mae_s;
  doc["end_mae"] = report.end_mae_s;
  doc["olr"] = report.olr;
  if (report.losses) {
    doc["losses"] = {{"traj", report.losses->traj}, {"time", report.losses->time}, {"total", report.losses->total}};
  }
  doc["pairs"] = report.pairs;
  doc["steps"] = report.steps;
  return doc.dump(indent);
}

}  // namespace spatialforge
