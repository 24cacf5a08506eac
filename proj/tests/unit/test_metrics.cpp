#include "doctest.h"

#include <algorithm>
#include <numeric>

#include "json.hpp"
#include "spatialforge/metrics.hpp"
#include "support/oracle.hpp"

using namespace spatialforge;

namespace {

Trajectory make(std::vector<double> az, std::vector<double> el, std::vector<double> ds, std::vector<std::uint8_t> mask) {
  Trajectory t;
  t.azimuth_deg = std::move(az);
  t.elevation_deg = std::move(el);
  t.distance_m = std::move(ds);
  t.mask = std::move(mask);
  t.clip_duration_s = static_cast<double>(t.mask.size() - 1) / 20.0;
  return t;
}

std::vector<std::uint8_t> random_mask(Rng& rng, std::size_t n) {
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::size_t a = pick(rng), b = pick(rng);
  if (a > b) std::swap(a, b);
  std::vector<std::uint8_t> m(n, 0);
  for (std::size_t k = a; k <= b; ++k) m[k] = 1;
  return m;
}

Trajectory random_traj(Rng& rng, std::size_t n) {
  std::uniform_real_distribution<double> az(-180, 180), el(-90, 90), d(0.3, 10);
  Trajectory t = make({}, {}, {}, random_mask(rng, n));
  for (std::size_t k = 0; k < n; ++k) {
    t.azimuth_deg.push_back(az(rng));
    t.elevation_deg.push_back(el(rng));
    t.distance_m.push_back(d(rng));
  }
  return t;
}

oracle::Steps steps(const Trajectory& t) { return {t.azimuth_deg, t.elevation_deg, t.distance_m, t.mask}; }

}  // namespace

TEST_CASE("worked examples") {
  const LossWeights unit;
  SUBCASE("traj_loss 15.5") {
    const auto p = make({10}, {5}, {1.5}, {1});
    const auto g = make({0}, {0}, {1.0}, {1});
    CHECK(traj_loss(p, g, unit) == 15.5);
    CHECK(traj_loss(p, g, {2, 2, 2, 1}) == 31.0);
  }
  SUBCASE("endpoint_loss 30.5") {
    const auto g = make({0, 50, 0}, {0, 0, 0}, {1, 1, 1}, {1, 1, 1});
    const auto p = make({10, -77, 0}, {0, 33, 20}, {1, 9, 1.5}, {1, 1, 1});
    CHECK(endpoint_loss(p, g, unit) == 30.5);
    auto q = p;
    q.azimuth_deg[1] = 12.0;
    CHECK(endpoint_loss(q, g, unit) == 30.5);
    LossWeights w2;
    w2.lambda_time = 2.0;
    CHECK(total_loss(p, g, w2) == traj_loss(p, g, w2) + 2.0 * 30.5);
    w2.lambda_time = 0.0;
    CHECK(total_loss(p, g, w2) == traj_loss(p, g, w2));
  }
  SUBCASE("OLR 1/3") {
    CHECK(olr({20, {1, 1, 0, 0}}, {20, {0, 1, 1, 0}}) == 1.0 / 3.0);
    CHECK(olr({20, {1, 0}}, {20, {0, 1}}) == 0.0);
    CHECK(olr({20, {0, 1, 1}}, {20, {0, 1, 1}}) == 1.0);
  }
  SUBCASE("masked MSE 12.5") {
    const std::vector<double> ref = {0, 0, 0, 0};
    const std::vector<double> adj = {3, 9, 9, 4};
    CHECK(masked_outside_mse(adj, ref, {1.0, 2.0}, 1.0) == 12.5);
  }
  SUBCASE("circular delta 20") { CHECK(circular_delta(170, -170) == 20.0); }
  SUBCASE("RA-MAE") {
    const std::vector<double> p95 = {95}, p105 = {105}, g90 = {90};
    CHECK(ra_mae(p95, g90, AttributeKind::Azimuth) == 0.0);
    CHECK(ra_mae(p105, g90, AttributeKind::Azimuth) == 5.0);
    CHECK(ra_mae(p95, g90, AttributeKind::Azimuth, RaMaeMode::ClampGt) == 5.0);
    const std::vector<double> p179 = {-179.5}, g175 = {175};
    CHECK(ra_mae(p179, g175, AttributeKind::Azimuth) == 0.0);
    const std::vector<double> p165 = {-165}, g0 = {0};
    CHECK(ra_mae(p165, g0, AttributeKind::Azimuth) == 5.0);
  }
  SUBCASE("activity mask indices") {
    const auto m = activity_mask({1.0, 2.0}, 61, 20.0);
    for (std::size_t k = 0; k < 61; ++k) CHECK(m.bits[k] == (k >= 20 && k <= 40));
    const auto all = activity_mask({0.0, 3.0}, 61, 20.0);
    CHECK(std::all_of(all.bits.begin(), all.bits.end(), [](auto b) { return b == 1; }));
    CHECK(olr(all, all) == 1.0);
  }
  SUBCASE("start/end MAE") {
    const std::vector<EventWindow> p = {{1.05, 2.0}}, g = {{1.0, 2.1}};
    const auto r = start_end_mae(p, g);
    CHECK(r.start_mae_s == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(r.end_mae_s == doctest::Approx(0.10).epsilon(1e-12));
  }
  SUBCASE("macro-F1 over present classes") {
    const std::vector<CategoryId> gt = {CategoryId::Left, CategoryId::Right, CategoryId::Left};
    const std::vector<CategoryId> pr = {CategoryId::Left, CategoryId::Left, CategoryId::Left};
    const auto r = classification_report_labels(pr, gt, AttributeKind::Azimuth);
    CHECK(r.accuracy == doctest::Approx(2.0 / 3.0));
    CHECK(r.macro_f1 == doctest::Approx(0.4));
    CHECK(r.confusion[0][0] == 2);
    CHECK(r.confusion[4][0] == 1);
    const auto perfect = classification_report_labels(gt, gt, AttributeKind::Azimuth);
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.macro_f1 == 1.0);
    const std::vector<CategoryId> two = {CategoryId::Left, CategoryId::Right};
    const std::vector<CategoryId> wrong = {CategoryId::Back, CategoryId::Back};
    CHECK(classification_report_labels(wrong, two, AttributeKind::Azimuth).accuracy == 0.0);
  }
}

TEST_CASE("metric errors") {
  const LossWeights unit;
  const auto a = make({0, 0}, {0, 0}, {1, 1}, {1, 1});
  const auto b = make({0}, {0}, {1}, {1});
  CHECK_THROWS_AS(traj_loss(a, b, unit), std::invalid_argument);
  CHECK_THROWS_AS(traj_loss(a, make({0, 0}, {0, 0}, {1, 1}, {0, 0}), unit), std::invalid_argument);
  CHECK_THROWS_AS(traj_loss(a, a, {0, 1, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(traj_loss(a, a, {1, 1, 1, -1}), std::invalid_argument);
  CHECK_THROWS_AS(olr({20, {0, 0}}, {20, {0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(olr({20, {0, 0}}, {20, {0}}), std::invalid_argument);
  const std::vector<double> x = {1, 2};
  CHECK_THROWS_AS(masked_outside_mse(x, x, {0.0, 5.0}, 1.0), std::invalid_argument);
  const std::vector<double> none;
  CHECK_THROWS_AS(ra_mae(none, none, AttributeKind::Distance), std::invalid_argument);
  CHECK_THROWS_AS(start_end_mae(std::vector<EventWindow>{}, std::vector<EventWindow>{}), std::invalid_argument);
  CHECK(parse_ra_mae_mode("clamp_gt") == RaMaeMode::ClampGt);
  CHECK_FALSE(parse_ra_mae_mode("other").has_value());
}

TEST_CASE("metrics agree with the brute-force oracle") {
  Rng rng(11);
  std::uniform_real_distribution<double> w(0.1, 3.0);
  for (int i = 0; i < 300; ++i) {
    const std::size_t n = 1 + rng() % 64;
    const auto p = random_traj(rng, n);
    const auto g = random_traj(rng, n);
    const LossWeights lw{w(rng), w(rng), w(rng), w(rng)};
    const oracle::Weights ow{lw.w_az, lw.w_el, lw.w_ds, lw.lambda_time};
    CHECK(oracle::close(traj_loss(p, g, lw), oracle::traj_loss(steps(p), steps(g), ow)));
    CHECK(oracle::close(endpoint_loss(p, g, lw), oracle::endpoint_loss(steps(p), steps(g), ow)));
    CHECK(oracle::close(total_loss(p, g, lw), oracle::total_loss(steps(p), steps(g), ow)));
    CHECK(oracle::close(olr({20, p.mask}, {20, g.mask}), oracle::olr(p.mask, g.mask)));
    const std::pair<AttributeKind, oracle::Kind> kinds[] = {{AttributeKind::Azimuth, oracle::Kind::Az},
                                                            {AttributeKind::Elevation, oracle::Kind::El},
                                                            {AttributeKind::Distance, oracle::Kind::Ds}};
    for (auto [kind, ok] : kinds) {
      const std::vector<double> pv(p.values(kind).begin(), p.values(kind).end());
      const std::vector<double> gv(g.values(kind).begin(), g.values(kind).end());
      CHECK(oracle::close(ra_mae(pv, gv, kind, RaMaeMode::ClampPred), oracle::ra_mae(pv, gv, ok, false)));
      CHECK(oracle::close(ra_mae(pv, gv, kind, RaMaeMode::ClampGt), oracle::ra_mae(pv, gv, ok, true)));
    }
    if (n >= 3) {
      const double t0 = static_cast<double>(rng() % n) / 20.0;
      const double t1 = t0 + static_cast<double>(rng() % n) / 20.0;
      if (activity_mask({t0, t1}, n, 20.0).bits != std::vector<std::uint8_t>(n, 1)) {
        CHECK(oracle::close(masked_outside_mse(p.distance_m, g.distance_m, {t0, t1}, 20.0),
                            oracle::masked_outside_mse(p.distance_m, g.distance_m, t0, t1, 20.0)));
      }
    }
  }
}

TEST_CASE("circular_delta properties") {
  Rng rng(12);
  std::uniform_real_distribution<double> u(-720, 720);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng), y = u(rng), z = u(rng);
    const double d = circular_delta(x, y);
    CHECK(d >= 0.0);
    CHECK(d <= 180.0);
    CHECK(d == circular_delta(y, x));
    CHECK(circular_delta(x + 360.0, y) == doctest::Approx(d).epsilon(1e-9));
    CHECK(circular_delta(x, y - 360.0) == doctest::Approx(d).epsilon(1e-9));
    CHECK(circular_delta(x, z) <= circular_delta(x, y) + circular_delta(y, z) + 1e-9);
  }
}

TEST_CASE("traj_loss properties") {
  Rng rng(13);
  const LossWeights unit;
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 1 + rng() % 64;
    const auto g = random_traj(rng, n);
    auto p = g;
    CHECK(traj_loss(p, g, unit) == 0.0);
    CHECK(endpoint_loss(p, g, unit) == 0.0);
    // Angles equal modulo 360 still count as equal.
    for (auto& a : p.azimuth_deg) a += 360.0;
    CHECK(traj_loss(p, g, unit) == doctest::Approx(0.0).epsilon(1e-9));

    const auto q = random_traj(rng, n);
    const double base = traj_loss(q, g, unit);
    CHECK(base >= 0.0);
    auto masked_out = q;
    auto g_changed = g;
    for (std::size_t k = 0; k < n; ++k) {
      if (!g.mask[k]) {
        masked_out.azimuth_deg[k] += 33.0;
        masked_out.distance_m[k] += 2.0;
        g_changed.elevation_deg[k] = -g_changed.elevation_deg[k];
      }
    }
    CHECK(traj_loss(masked_out, g_changed, unit) == base);

    const auto [s, e] = g.valid_range();
    if (e > s + 1) {
      auto interior = q;
      interior.distance_m[s + 1] += 5.0;
      CHECK(endpoint_loss(interior, g, unit) == endpoint_loss(q, g, unit));
    }
    // A single differing valid step makes the loss positive.
    auto one = g;
    one.distance_m[s] += 0.25;
    CHECK(traj_loss(one, g, unit) > 0.0);
  }
}

TEST_CASE("olr properties") {
  Rng rng(14);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 2 + rng() % 40;
    const ActivityMask a{20, random_mask(rng, n)};
    const ActivityMask b{20, random_mask(rng, n)};
    CHECK(olr(a, b) == olr(b, a));
    CHECK(olr(a, a) == 1.0);
    CHECK(olr(a, b) >= 0.0);
    CHECK(olr(a, b) <= 1.0);
    // Turn off the overlap one step at a time: OLR never increases.
    ActivityMask shrinking = a;
    double prev = olr(shrinking, b);
    for (std::size_t k = 0; k < n; ++k) {
      if (shrinking.bits[k] && b.bits[k]) {
        shrinking.bits[k] = 0;
        bool any = false;
        for (std::size_t j = 0; j < n; ++j) any = any || shrinking.bits[j] || b.bits[j];
        if (!any) break;
        const double now = olr(shrinking, b);
        CHECK(now <= prev);
        prev = now;
      }
    }
  }
}

TEST_CASE("masked MSE ignores in-window changes") {
  Rng rng(15);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 4 + rng() % 60;
    std::vector<double> a(n), b(n);
    for (std::size_t k = 0; k < n; ++k) {
      a[k] = u(rng);
      b[k] = u(rng);
    }
    const EventWindow w{static_cast<double>(1 + rng() % (n / 2)) / 20.0, 0.0};
    const EventWindow win{w.t0_s, w.t0_s + static_cast<double>(rng() % (n / 2)) / 20.0};
    const double base = masked_outside_mse(a, b, win, 20.0);
    const auto m = activity_mask(win, n, 20.0);
    for (std::size_t k = 0; k < n; ++k) {
      if (m.bits[k]) a[k] += u(rng);
    }
    CHECK(masked_outside_mse(a, b, win, 20.0) == base);
  }
}

TEST_CASE("range-aware MAE properties") {
  Rng rng(16);
  for (auto kind : kAllKinds) {
    std::vector<double> pred, gt;
    for (int i = 0; i < 200; ++i) {
      const auto c = categories_of(kind)[rng() % categories_of(kind).size()];
      pred.push_back(sample_endpoint(c, rng));
      gt.push_back(sample_endpoint(c, rng));
    }
    CHECK(ra_mae(pred, gt, kind) == 0.0);
    CHECK(ra_mae(pred, gt, kind) <= mae(pred, gt, kind));
  }
  // Off-range predictions whose nearest range is the gt's range.
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double gt = 80.0 + 20.0 * u(rng);
    const double pred = 100.0 + 10.0 * u(rng);
    const std::vector<double> p = {pred}, g = {gt};
    CHECK(ra_mae(p, g, AttributeKind::Azimuth) <= mae(p, g, AttributeKind::Azimuth));
  }
}

TEST_CASE("metrics are permutation-equivariant") {
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 2 + rng() % 30;
    std::vector<Trajectory> preds, gts;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t len = 2 + rng() % 20;
      preds.push_back(random_traj(rng, len));
      gts.push_back(random_traj(rng, len));
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Trajectory> pp, gp;
    for (auto j : perm) {
      pp.push_back(preds[j]);
      gp.push_back(gts[j]);
    }
    const auto a = evaluate_trajectories(preds, gts);
    const auto b = evaluate_trajectories(pp, gp);
    for (auto kind : kAllKinds) {
      CHECK(a[kind].accuracy == doctest::Approx(b[kind].accuracy).epsilon(1e-12));
      CHECK(a[kind].macro_f1 == doctest::Approx(b[kind].macro_f1).epsilon(1e-12));
      CHECK(a[kind].mae == doctest::Approx(b[kind].mae).epsilon(1e-12));
      CHECK(a[kind].ra_mae == doctest::Approx(b[kind].ra_mae).epsilon(1e-12));
    }
    CHECK(a.olr == doctest::Approx(b.olr).epsilon(1e-12));
    CHECK(a.start_mae_s == doctest::Approx(b.start_mae_s).epsilon(1e-12));
    CHECK(a.losses->total == doctest::Approx(b.losses->total).epsilon(1e-12));

    std::vector<double> pv, gv;
    for (std::size_t j = 0; j < n; ++j) {
      pv.push_back(preds[j].distance_m[0]);
      gv.push_back(gts[j].distance_m[0]);
    }
    std::vector<double> pvp, gvp;
    for (auto j : perm) {
      pvp.push_back(pv[j]);
      gvp.push_back(gv[j]);
    }
    const auto c1 = classification_report(std::span<const double>(pv), std::span<const double>(gv), AttributeKind::Distance);
    const auto c2 = classification_report(std::span<const double>(pvp), std::span<const double>(gvp), AttributeKind::Distance);
    CHECK(c1.accuracy == doctest::Approx(c2.accuracy).epsilon(1e-12));
    CHECK(c1.macro_f1 == doctest::Approx(c2.macro_f1).epsilon(1e-12));
  }
}

TEST_CASE("evaluate_trajectories") {
  Rng rng(18);
  std::vector<Trajectory> gts;
  for (int i = 0; i < 20; ++i) gts.push_back(random_traj(rng, 30));
  const auto perfect = evaluate_trajectories(gts, gts);
  for (auto kind : kAllKinds) {
    CHECK(perfect[kind].accuracy == 1.0);
    CHECK(perfect[kind].macro_f1 == 1.0);
    CHECK(perfect[kind].mae == 0.0);
  }
  CHECK(perfect.olr == 1.0);
  CHECK(perfect.start_mae_s == 0.0);
  CHECK(perfect.losses->total == 0.0);

  std::vector<Trajectory> preds;
  for (int i = 0; i < 20; ++i) preds.push_back(random_traj(rng, 30));
  EvalOptions serial;
  serial.parallel = false;
  const auto a = evaluate_trajectories(preds, gts);
  const auto b = evaluate_trajectories(preds, gts, serial);
  CHECK(to_json(a) == to_json(b));
  const auto json = nlohmann::json::parse(to_json(a));
  for (const char* key : {"start_mae", "end_mae", "olr"}) CHECK(json.contains(key));
  for (const char* key : {"accuracy", "macro_f1", "mae", "ra_mae"}) CHECK(json["azimuth"].contains(key));

  EvalOptions ends;
  ends.endpoints_only = true;
  CHECK(evaluate_trajectories(preds, gts, ends).steps == 40);
  CHECK_THROWS_AS(evaluate_trajectories(std::vector<Trajectory>{}, std::vector<Trajectory>{}), std::invalid_argument);
  std::vector<Trajectory> short_preds(preds.begin(), preds.end() - 1);
  CHECK_THROWS_AS(evaluate_trajectories(short_preds, gts), std::invalid_argument);
}
