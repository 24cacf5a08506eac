// Parallel vs reference renderer on a moving source.
//
//   bench_render --benchmark_counters_tabular=true
//
// Arguments are clip seconds and HRIR taps. Thread count follows
// OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <random>

#include "spatialforge/render.hpp"

namespace sf = spatialforge;

namespace {

constexpr std::uint32_t kRate = 48000;

sf::HrirSet random_set(std::size_t taps) {
  std::mt19937_64 rng(1);
  std::normal_distribution<float> g(0.0f, 0.1f);
  std::vector<sf::Hrir> irs;
  for (double el = -60.0; el <= 60.0; el += 30.0) {
    for (double az = -180.0; az < 180.0; az += 15.0) {
      sf::Hrir h{std::vector<float>(taps), std::vector<float>(taps), az, el};
      for (auto& v : h.left) v = g(rng);
      for (auto& v : h.right) v = g(rng);
      irs.push_back(std::move(h));
    }
  }
  return sf::HrirSet::create(kRate, std::move(irs));
}

struct Case {
  sf::AudioClip clip;
  sf::Trajectory traj;
  sf::HrirSet set;
};

Case make_case(double seconds, std::size_t taps) {
  Case c{{}, {}, random_set(taps)};
  c.clip.sample_rate_hz = kRate;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<float> u(-0.5f, 0.5f);
  std::vector<float> x(static_cast<std::size_t>(seconds * kRate));
  for (auto& v : x) v = u(rng);
  c.clip.channels.push_back(std::move(x));
  c.traj = sf::linear_trajectory({{-120.0, -30.0, 0.5}, {150.0, 40.0, 4.0}}, {0.2, seconds - 0.2}, seconds);
  return c;
}

template <sf::AudioClip (*Render)(const sf::AudioClip&, const sf::Trajectory&, const sf::HrirSet&)>
void BM_render(benchmark::State& state) {
  const auto c = make_case(static_cast<double>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) {
    auto y = Render(c.clip, c.traj, c.set);
    benchmark::DoNotOptimize(y.channels[0].data());
  }
  state.counters["audio_s/s"] =
      benchmark::Counter(static_cast<double>(state.range(0)), benchmark::Counter::kIsIterationInvariantRate);
}

void args(benchmark::internal::Benchmark* b) {
  b->ArgNames({"seconds", "taps"})->Unit(benchmark::kMillisecond)->UseRealTime();
  for (int taps : {64, 256, 512}) b->Args({5, taps});
}

}  // namespace

BENCHMARK(BM_render<sf::render_binaural_reference>)->Name("reference")->Apply(args);
BENCHMARK(BM_render<sf::render_binaural>)->Name("openmp")->Apply(args);

BENCHMARK_MAIN();
