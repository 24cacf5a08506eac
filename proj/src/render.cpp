#include "spatialforge/render.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "spatialforge/kernels.hpp"

namespace spatialforge {

namespace {

// Frames rendered per parallel batch; bounds the scratch memory held at once.
constexpr std::size_t kBatchFrames = 64;

struct FrameOutput {
  std::size_t begin = 0;
  std::vector<double> left;
  std::vector<double> right;
};

struct RenderJob {
  const std::vector<float>& input;
  const Trajectory& traj;
  const HrirSet& set;
  kernels::FrameGrid grid;
};

void check_inputs(const AudioClip& mono, const Trajectory& traj, const HrirSet& set) {
  validate(mono);
  if (mono.channel_count() != 1) {
    throw std::invalid_argument("render: expected a mono clip, got " + std::to_string(mono.channel_count()) +
                                " channels");
  }
  if (mono.sample_rate_hz != set.sample_rate_hz()) {
    throw std::invalid_argument("render: clip rate " + std::to_string(mono.sample_rate_hz) +
                                " Hz does not match HRIR rate " + std::to_string(set.sample_rate_hz()) + " Hz");
  }
  if (mono.sample_rate_hz < static_cast<std::uint32_t>(kTrajectoryRateHz)) {
    throw std::invalid_argument("render: sample rate below the trajectory frame rate");
  }
  const std::size_t n = traj.azimuth_deg.size();
  if (n == 0 || traj.elevation_deg.size() != n || traj.distance_m.size() != n) {
    throw std::invalid_argument("render: trajectory sequences are empty or ragged");
  }
  const double frame = 1.0 / kTrajectoryRateHz;
  if (std::abs(traj.clip_duration_s - mono.duration_s()) > frame + 1e-9) {
    throw std::invalid_argument("render: trajectory covers " + std::to_string(traj.clip_duration_s) +
                                " s but the clip lasts " + std::to_string(mono.duration_s()) + " s");
  }
}

void render_frame(const RenderJob& job, std::size_t k, FrameOutput& out) {
  const std::size_t begin = job.grid.segment_begin(k);
  const std::size_t end = job.grid.segment_end(k);
  out.begin = begin;
  if (begin >= end) {
    out.left.clear();
    out.right.clear();
    return;
  }
  const Hrir& ir = job.set.nearest(job.traj.azimuth_deg[k], job.traj.elevation_deg[k]);
  const double gain = distance_gain(job.traj.distance_m[k]);

  std::vector<double> segment(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    segment[i - begin] = gain * job.grid.weight(k, i) * static_cast<double>(job.input[i]);
  }
  const std::size_t len = segment.size() + ir.length() - 1;
  out.left.resize(len);
  out.right.resize(len);
  kernels::convolve(segment, ir.left, out.left);
  kernels::convolve(segment, ir.right, out.right);
}

void accumulate(const FrameOutput& f, std::vector<double>& left, std::vector<double>& right) {
  const std::size_t n = left.size();
  const std::size_t stop = std::min(n, f.begin + f.left.size());
  for (std::size_t i = f.begin; i < stop; ++i) {
    left[i] += f.left[i - f.begin];
    right[i] += f.right[i - f.begin];
  }
}

AudioClip finish(std::uint32_t rate, const std::vector<double>& left, const std::vector<double>& right) {
  AudioClip out;
  out.sample_rate_hz = rate;
  out.channels.assign(2, std::vector<float>(left.size()));
  std::transform(left.begin(), left.end(), out.channels[0].begin(), [](double v) { return static_cast<float>(v); });
  std::transform(right.begin(), right.end(), out.channels[1].begin(), [](double v) { return static_cast<float>(v); });
  return out;
}

}  // namespace

double distance_gain(double distance_m) {
  if (!std::isfinite(distance_m) || distance_m <= 0.0) {
    throw std::invalid_argument("distance_gain: distance must be positive");
  }
  return std::min(1.0 / distance_m, kMaxDistanceGain);
}

AudioClip render_binaural_reference(const AudioClip& mono, const Trajectory& traj, const HrirSet& set) {
  check_inputs(mono, traj, set);
  const auto& input = mono.channels[0];
  const RenderJob job{input, traj, set, kernels::FrameGrid(mono.sample_rate_hz, traj.azimuth_deg.size(), input.size())};

  std::vector<double> left(input.size(), 0.0), right(input.size(), 0.0);
  FrameOutput frame;
  for (std::size_t k = 0; k < job.grid.frames(); ++k) {
    render_frame(job, k, frame);
    accumulate(frame, left, right);
  }
  return finish(mono.sample_rate_hz, left, right);
}

AudioClip render_binaural(const AudioClip& mono, const Trajectory& traj, const HrirSet& set) {
  check_inputs(mono, traj, set);
  const auto& input = mono.channels[0];
  const RenderJob job{input, traj, set, kernels::FrameGrid(mono.sample_rate_hz, traj.azimuth_deg.size(), input.size())};
  const auto frames = static_cast<std::ptrdiff_t>(job.grid.frames());

  // distance_gain may throw; surface it before entering the parallel region.
  for (double d : traj.distance_m) (void)distance_gain(d);

  std::vector<double> left(input.size(), 0.0), right(input.size(), 0.0);
  std::vector<FrameOutput> batch(kBatchFrames);
  for (std::ptrdiff_t first = 0; first < frames; first += static_cast<std::ptrdiff_t>(kBatchFrames)) {
    const std::ptrdiff_t count = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(kBatchFrames), frames - first);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < count; ++j) {
      render_frame(job, static_cast<std::size_t>(first + j), batch[static_cast<std::size_t>(j)]);
    }
    for (std::ptrdiff_t j = 0; j < count; ++j) accumulate(batch[static_cast<std::size_t>(j)], left, right);
  }
  return finish(mono.sample_rate_hz, left, right);
}

}  // namespace spatialforge
