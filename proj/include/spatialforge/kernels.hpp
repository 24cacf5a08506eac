#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace spatialforge::kernels {

/// Sample positions of 20 Hz trajectory frames within a clip, and the
/// triangular crossfade weights that blend neighbouring frames.
///
/// Frame k sits at sample p_k = floor(k * rate / 20). Between p_k and
/// p_{k+1} the weight ramps from frame k to frame k+1; the last frame holds
/// weight 1 through the end of the clip.
class FrameGrid {
 public:
  FrameGrid(std::uint32_t sample_rate_hz, std::size_t frames, std::size_t samples);

  std::size_t frames() const { return frames_; }
  std::size_t samples() const { return samples_; }
  std::size_t position(std::size_t k) const;

  /// Half-open sample range [begin, end) touched by frame k, clipped to the clip.
  std::size_t segment_begin(std::size_t k) const;
  std::size_t segment_end(std::size_t k) const;

  /// Weight of frame k at sample i; zero outside the frame's segment.
  double weight(std::size_t k, std::size_t i) const;

 private:
  std::uint32_t rate_;
  std::size_t frames_;
  std::size_t samples_;
};

/// Rising ramp fraction r of sample i between two frame positions; the
/// falling side uses exactly 1 - r so that neighbouring weights sum to 1.
double ramp(std::size_t i, std::size_t from, std::size_t to);

/// Full linear convolution y = x * h, with y.size() == x.size() + h.size() - 1.
void convolve(std::span<const double> x, std::span<const float> h, std::span<double> y);

}  // namespace spatialforge::kernels
