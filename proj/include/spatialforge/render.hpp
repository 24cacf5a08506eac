#pragma once

#include "spatialforge/audio.hpp"
#include "spatialforge/hrir.hpp"
#include "spatialforge/spatial.hpp"

namespace spatialforge {

/// Inverse-distance amplitude relative to 1 m, capped at +12 dB.
double distance_gain(double distance_m);

inline constexpr double kMaxDistanceGain = 3.9810717055349722;  // 10^(12/20)

/// Frame-wise binaural rendering of a mono clip along a trajectory.
///
/// The clip is split into 20 Hz frames aligned with the trajectory. Each
/// frame's audio, shaped by a triangular crossfade window that overlaps its
/// neighbours by one hop, is scaled by distance_gain and convolved with the
/// nearest HRIR pair. Convolution tails are overlap-added in frame order and
/// the result is truncated to the input length, so output sample t lines up
/// with input sample t.
///
/// Frames are convolved in parallel with OpenMP; accumulation always runs in
/// frame order, so the output is bit-identical to render_binaural_reference.
AudioClip render_binaural(const AudioClip& mono, const Trajectory& traj, const HrirSet& set);

/// Single-threaded reference implementation of render_binaural.
AudioClip render_binaural_reference(const AudioClip& mono, const Trajectory& traj, const HrirSet& set);

}  // namespace spatialforge
