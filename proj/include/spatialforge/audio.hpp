#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace spatialforge {

/// Planar audio buffer: one sample vector per channel.
struct AudioClip {
  std::uint32_t sample_rate_hz = 0;
  std::vector<std::vector<float>> channels;

  std::size_t channel_count() const { return channels.size(); }
  std::size_t frames() const { return channels.empty() ? 0 : channels.front().size(); }
  double duration_s() const {
    return sample_rate_hz == 0 ? 0.0 : static_cast<double>(frames()) / sample_rate_hz;
  }
};

/// Throws std::invalid_argument if the clip has no channels, ragged
/// channels, zero length, a zero rate or non-finite samples.
void validate(const AudioClip& clip);

enum class SampleFormat { Int16, Int24, Int32, Float32 };

/// Reads RIFF/WAVE files holding 8/16/24/32-bit integer PCM or 32/64-bit
/// IEEE float, including WAVE_FORMAT_EXTENSIBLE headers.
AudioClip read_wav(const std::filesystem::path& path);
AudioClip read_wav(std::istream& is, const std::string& source_name = "<stream>");

/// Float32 output stores the samples bit-exactly. Integer formats use the
/// reader's 2^(bits-1) scale, round to nearest and saturate.
void write_wav(const std::filesystem::path& path, const AudioClip& clip, SampleFormat format = SampleFormat::Float32);
void write_wav(std::ostream& os, const AudioClip& clip, SampleFormat format = SampleFormat::Float32);

/// Averages all channels into one.
AudioClip downmix_to_mono(const AudioClip& clip);

}  // namespace spatialforge
