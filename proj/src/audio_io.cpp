#include "sedsep/audio_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <string>

#include "sedsep/error.hpp"

namespace sedsep {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

}  // namespace

Waveform::Waveform(std::vector<double> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (sample_rate_ <= 0) {
    raise(errc::kBadConfig, "sample rate must be positive, got " + std::to_string(sample_rate_));
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      raise(errc::kBadConfig, "non-finite sample at index " + std::to_string(i));
    }
  }
}

Waveform Waveform::zeros(std::size_t length, int sample_rate) {
  return Waveform(std::vector<double>(length, 0.0), sample_rate);
}

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(errc::kIoFailure, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const std::string where = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    raise(errc::kMalformedWav, where + ": not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) {
        raise(errc::kMalformedWav, where + ": truncated fmt chunk");
      }
      format = le16(bytes.data() + body);
      channels = le16(bytes.data() + body + 2);
      rate = le32(bytes.data() + body + 4);
      bits = le16(bytes.data() + body + 14);
      if (format == kFormatExtensible) {
        if (size < 40) raise(errc::kMalformedWav, where + ": truncated extensible fmt chunk");
        // The sub-format GUID starts with the actual format tag.
        format = le16(bytes.data() + body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (body + size > bytes.size()) {
        raise(errc::kMalformedWav, where + ": data chunk extends past end of file");
      }
      data = bytes.data() + body;
      data_size = size;
      break;
    }
    pos = body + size + (size & 1u);
  }

  if (!have_fmt) raise(errc::kMalformedWav, where + ": missing fmt chunk");
  if (data == nullptr) raise(errc::kMalformedWav, where + ": missing data chunk");
  if (channels != 1) {
    raise(errc::kUnsupportedFormat,
          where + ": expected mono audio, got " + std::to_string(channels) + " channels");
  }
  if (rate == 0) raise(errc::kMalformedWav, where + ": zero sample rate");

  std::vector<double> samples;
  if (format == kFormatPcm && bits == 16) {
    if (data_size % 2 != 0) raise(errc::kMalformedWav, where + ": odd PCM16 data size");
    samples.resize(data_size / 2);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto v = static_cast<std::int16_t>(le16(data + 2 * i));
      samples[i] = static_cast<double>(v) / 32768.0;
    }
  } else if (format == kFormatFloat && bits == 32) {
    if (data_size % 4 != 0) raise(errc::kMalformedWav, where + ": bad float32 data size");
    samples.resize(data_size / 4);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const float f = std::bit_cast<float>(le32(data + 4 * i));
      if (!std::isfinite(f)) raise(errc::kMalformedWav, where + ": non-finite float sample");
      samples[i] = static_cast<double>(f);
    }
  } else {
    raise(errc::kUnsupportedFormat, where + ": unsupported encoding (format " +
                                        std::to_string(format) + ", " + std::to_string(bits) +
                                        " bits)");
  }
  return Waveform(std::move(samples), static_cast<int>(rate));
}

WavWriteResult write_wav(const Waveform& w, const std::filesystem::path& path,
                         SampleFormat format) {
  WavWriteResult result;
  const bool pcm = format == SampleFormat::kPcm16;
  const std::uint16_t bytes_per_sample = pcm ? 2 : 4;
  const auto data_size = static_cast<std::uint32_t>(w.size() * bytes_per_sample);

  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  put32(out, 36 + data_size);
  out += "WAVEfmt ";
  put32(out, 16);
  put16(out, pcm ? kFormatPcm : kFormatFloat);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(w.sample_rate()));
  put32(out, static_cast<std::uint32_t>(w.sample_rate()) * bytes_per_sample);
  put16(out, bytes_per_sample);
  put16(out, static_cast<std::uint16_t>(8 * bytes_per_sample));
  out += "data";
  put32(out, data_size);

  for (double x : w.samples()) {
    if (pcm) {
      if (x > 1.0 || x < -1.0) ++result.clipped_samples;
      const double scaled = std::round(std::clamp(x, -1.0, 1.0) * 32768.0);
      const auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
      put16(out, static_cast<std::uint16_t>(v));
    } else {
      put32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) raise(errc::kIoFailure, "cannot open " + path.string() + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) raise(errc::kIoFailure, "write failed for " + path.string());
  return result;
}

void assert_compatible(const Waveform& a, const Waveform& b) {
  if (a.sample_rate() != b.sample_rate()) {
    raise(errc::kRateMismatch, "sample rates differ: " + std::to_string(a.sample_rate()) +
                                   " vs " + std::to_string(b.sample_rate()));
  }
  if (a.size() != b.size()) {
    raise(errc::kLengthMismatch,
          "lengths differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
}

double energy(std::span<const double> x) {
  return std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
}

}  // namespace sedsep
