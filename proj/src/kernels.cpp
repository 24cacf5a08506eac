#include "spatialforge/kernels.hpp"

#include <algorithm>
#include <stdexcept>

namespace spatialforge::kernels {

FrameGrid::FrameGrid(std::uint32_t sample_rate_hz, std::size_t frames, std::size_t samples)
    : rate_(sample_rate_hz), frames_(frames), samples_(samples) {
  if (rate_ == 0 || frames_ == 0) throw std::invalid_argument("frame grid needs a rate and at least one frame");
}

std::size_t FrameGrid::position(std::size_t k) const {
  return static_cast<std::size_t>(static_cast<std::uint64_t>(k) * rate_ / 20u);
}

std::size_t FrameGrid::segment_begin(std::size_t k) const {
  return std::min(k == 0 ? std::size_t{0} : position(k - 1), samples_);
}

std::size_t FrameGrid::segment_end(std::size_t k) const {
  return k + 1 >= frames_ ? samples_ : std::min(position(k + 1), samples_);
}

double ramp(std::size_t i, std::size_t from, std::size_t to) {
  return static_cast<double>(i - from) / static_cast<double>(to - from);
}

double FrameGrid::weight(std::size_t k, std::size_t i) const {
  if (i < segment_begin(k) || i >= segment_end(k)) return 0.0;
  const std::size_t pk = position(k);
  if (i < pk) return ramp(i, position(k - 1), pk);  // rising side, k >= 1
  if (k + 1 >= frames_) return 1.0;
  return 1.0 - ramp(i, pk, position(k + 1));
}

void convolve(std::span<const double> x, std::span<const float> h, std::span<double> y) {
  if (x.empty() || h.empty() || y.size() != x.size() + h.size() - 1) {
    throw std::invalid_argument("convolve: output must hold x.size() + h.size() - 1 samples");
  }
  std::fill(y.begin(), y.end(), 0.0);
  const std::size_t n = h.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    double* out = y.data() + i;
    const float* taps = h.data();
    for (std::size_t j = 0; j < n; ++j) out[j] += xi * static_cast<double>(taps[j]);
  }
}

}  // namespace spatialforge::kernels
