#include "spatialforge/audio.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace spatialforge {

namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t le64(const unsigned char* p) {
  return static_cast<std::uint64_t>(le32(p)) | (static_cast<std::uint64_t>(le32(p + 4)) << 32);
}

class ByteWriter {
 public:
  explicit ByteWriter(std::ostream& os) : os_(os) {}

  void tag(const char (&id)[5]) { os_.write(id, 4); }
  void u16(std::uint16_t v) { bytes(v, 2); }
  void u32(std::uint32_t v) { bytes(v, 4); }
  void bytes(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) os_.put(static_cast<char>((v >> (8 * i)) & 0xFF));
  }

 private:
  std::ostream& os_;
};

float decode_sample(const unsigned char* p, std::uint16_t format, std::uint16_t bits) {
  if (format == kFormatFloat) {
    if (bits == 32) return std::bit_cast<float>(le32(p));
    return static_cast<float>(std::bit_cast<double>(le64(p)));
  }
  switch (bits) {
    case 8:
      return (static_cast<float>(p[0]) - 128.0f) / 128.0f;
    case 16:
      return static_cast<float>(static_cast<std::int16_t>(le16(p))) / 32768.0f;
    case 24: {
      std::int32_t v = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
      if (v & 0x800000) v -= 0x1000000;
      return static_cast<float>(static_cast<double>(v) / 8388608.0);
    }
    case 32:
      return static_cast<float>(static_cast<double>(static_cast<std::int32_t>(le32(p))) / 2147483648.0);
    default:
      return 0.0f;
  }
}

std::int64_t quantize(float v, double scale, std::int64_t lo, std::int64_t hi) {
  const double x = std::clamp(static_cast<double>(v), -1.0, 1.0) * scale;
  return std::clamp(static_cast<std::int64_t>(std::llround(x)), lo, hi);
}

}  // namespace

void validate(const AudioClip& clip) {
  if (clip.sample_rate_hz == 0) throw std::invalid_argument("audio clip has a zero sample rate");
  if (clip.channels.empty()) throw std::invalid_argument("audio clip has no channels");
  const std::size_t n = clip.channels.front().size();
  if (n == 0) throw std::invalid_argument("audio clip is empty");
  for (const auto& ch : clip.channels) {
    if (ch.size() != n) throw std::invalid_argument("audio clip channels differ in length");
    if (!std::all_of(ch.begin(), ch.end(), [](float s) { return std::isfinite(s); })) {
      throw std::invalid_argument("audio clip holds non-finite samples");
    }
  }
}

AudioClip read_wav(std::istream& is, const std::string& source_name) {
  const auto fail = [&](const std::string& what) { return std::runtime_error(source_name + ": " + what); };

  unsigned char riff[12];
  if (!is.read(reinterpret_cast<char*>(riff), 12)) throw fail("file too short for a RIFF header");
  if (std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(riff + 8, "WAVE", 4) != 0) {
    throw fail("not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t rate = 0;
  std::vector<unsigned char> data;
  bool have_data = false;

  unsigned char header[8];
  while (is.read(reinterpret_cast<char*>(header), 8)) {
    const std::uint32_t size = le32(header + 4);
    if (std::memcmp(header, "fmt ", 4) == 0) {
      if (size < 16) throw fail("fmt chunk too small");
      std::vector<unsigned char> fmt(size);
      if (!is.read(reinterpret_cast<char*>(fmt.data()), size)) throw fail("truncated fmt chunk");
      format = le16(fmt.data());
      channels = le16(fmt.data() + 2);
      rate = le32(fmt.data() + 4);
      block_align = le16(fmt.data() + 12);
      bits = le16(fmt.data() + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw fail("extensible fmt chunk too small");
        format = le16(fmt.data() + 24);  // first two bytes of the sub-format GUID
      }
      have_fmt = true;
    } else if (std::memcmp(header, "data", 4) == 0) {
      data.resize(size);
      is.read(reinterpret_cast<char*>(data.data()), size);
      // Tolerate files whose data size field overstates the payload.
      data.resize(static_cast<std::size_t>(is.gcount()));
      have_data = true;
      is.clear();
      break;
    } else {
      is.ignore(size);
    }
    if (size & 1) is.ignore(1);
  }

  if (!have_fmt) throw fail("missing fmt chunk");
  if (!have_data) throw fail("missing data chunk");
  if (format != kFormatPcm && format != kFormatFloat) {
    throw fail("unsupported sample format 0x" + std::to_string(format));
  }
  const bool supported = format == kFormatPcm ? (bits == 8 || bits == 16 || bits == 24 || bits == 32)
                                              : (bits == 32 || bits == 64);
  if (!supported) throw fail("unsupported bit depth " + std::to_string(bits));
  if (channels == 0) throw fail("zero channels");
  if (rate == 0) throw fail("zero sample rate");
  const std::size_t bytes_per_sample = bits / 8;
  if (block_align != channels * bytes_per_sample) throw fail("inconsistent block alignment");

  AudioClip clip;
  clip.sample_rate_hz = rate;
  const std::size_t frames = data.size() / block_align;
  clip.channels.assign(channels, std::vector<float>(frames));
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      clip.channels[c][i] = decode_sample(data.data() + i * block_align + c * bytes_per_sample, format, bits);
    }
  }
  return clip;
}

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_wav(is, path.string());
}

void write_wav(std::ostream& os, const AudioClip& clip, SampleFormat format) {
  validate(clip);
  const std::uint16_t bits = format == SampleFormat::Int16 ? 16 : format == SampleFormat::Int24 ? 24 : 32;
  const bool is_float = format == SampleFormat::Float32;
  const auto channels = static_cast<std::uint16_t>(clip.channel_count());
  const std::size_t frames = clip.frames();
  const std::uint16_t block_align = static_cast<std::uint16_t>(channels * (bits / 8));
  const std::uint64_t data_bytes = static_cast<std::uint64_t>(frames) * block_align;
  // Non-PCM data carries a fact chunk with the frame count.
  const std::uint64_t riff_size = 4 + (8 + 16) + (is_float ? 12 : 0) + 8 + data_bytes + (data_bytes & 1);
  if (riff_size > 0xFFFFFFFFull) throw std::runtime_error("audio too long for a RIFF/WAVE file");

  ByteWriter w(os);
  w.tag("RIFF");
  w.u32(static_cast<std::uint32_t>(riff_size));
  w.tag("WAVE");
  w.tag("fmt ");
  w.u32(16);
  w.u16(is_float ? kFormatFloat : kFormatPcm);
  w.u16(channels);
  w.u32(clip.sample_rate_hz);
  w.u32(clip.sample_rate_hz * block_align);
  w.u16(block_align);
  w.u16(bits);
  if (is_float) {
    w.tag("fact");
    w.u32(4);
    w.u32(static_cast<std::uint32_t>(frames));
  }
  w.tag("data");
  w.u32(static_cast<std::uint32_t>(data_bytes));

  std::vector<char> buf(static_cast<std::size_t>(data_bytes));
  char* out = buf.data();
  const auto put = [&out](std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) *out++ = static_cast<char>((v >> (8 * i)) & 0xFF);
  };
  for (std::size_t i = 0; i < frames; ++i) {
    for (const auto& ch : clip.channels) {
      const float s = ch[i];
      switch (format) {
        case SampleFormat::Float32:
          put(std::bit_cast<std::uint32_t>(s), 4);
          break;
        case SampleFormat::Int16:
          put(static_cast<std::uint64_t>(quantize(s, 32768.0, -32768, 32767)), 2);
          break;
        case SampleFormat::Int24:
          put(static_cast<std::uint64_t>(quantize(s, 8388608.0, -8388608, 8388607)), 3);
          break;
        case SampleFormat::Int32:
          put(static_cast<std::uint64_t>(quantize(s, 2147483648.0, -2147483648LL, 2147483647LL)), 4);
          break;
      }
    }
  }
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (data_bytes & 1) os.put('\0');
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip, SampleFormat format) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_wav(os, clip, format);
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

AudioClip downmix_to_mono(const AudioClip& clip) {
  validate(clip);
  if (clip.channel_count() == 1) return clip;
  AudioClip mono;
  mono.sample_rate_hz = clip.sample_rate_hz;
  mono.channels.assign(1, std::vector<float>(clip.frames(), 0.0f));
  const double scale = 1.0 / static_cast<double>(clip.channel_count());
  for (std::size_t i = 0; i < clip.frames(); ++i) {
    double acc = 0.0;
    for (const auto& ch : clip.channels) acc += ch[i];
    mono.channels[0][i] = static_cast<float>(acc * scale);
  }
  return mono;
}

}  // namespace spatialforge
