#include "mcse/audio.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "mcse/error.hpp"

namespace mcse {

MultiChannelWave::MultiChannelWave(std::size_t channels, std::size_t samples,
                                   int sample_rate)
    : channels_(channels),
      samples_(samples),
      sample_rate_(sample_rate),
      data_(channels * samples, 0.0) {
  Require(sample_rate > 0, ErrorCode::kInvalidArgument,
          "sample rate must be positive");
}

MultiChannelWave MultiChannelWave::FromChannels(
    const std::vector<std::vector<double>>& channels, int sample_rate) {
  const std::size_t n = channels.empty() ? 0 : channels.front().size();
  MultiChannelWave wave(channels.size(), n, sample_rate);
  for (std::size_t r = 0; r < channels.size(); ++r) {
    Require(channels[r].size() == n, ErrorCode::kDimensionMismatch,
            "all channels must have equal length");
    std::copy(channels[r].begin(), channels[r].end(),
              wave.Channel(r).begin());
  }
  return wave;
}

MultiChannelWave MultiChannelWave::Mono(std::span<const double> samples,
                                        int sample_rate) {
  MultiChannelWave wave(1, samples.size(), sample_rate);
  std::copy(samples.begin(), samples.end(), wave.data_.begin());
  return wave;
}

std::span<double> MultiChannelWave::Channel(std::size_t r) {
  Require(r < channels_, ErrorCode::kOutOfRange, "channel index out of range");
  return {data_.data() + r * samples_, samples_};
}

std::span<const double> MultiChannelWave::Channel(std::size_t r) const {
  Require(r < channels_, ErrorCode::kOutOfRange, "channel index out of range");
  return {data_.data() + r * samples_, samples_};
}

MultiChannelWave MultiChannelWave::SelectChannel(std::size_t r) const {
  return Mono(Channel(r), sample_rate_);
}

void MultiChannelWave::Validate() const {
  Require(sample_rate_ > 0, ErrorCode::kInvalidArgument,
          "sample rate must be positive");
  for (double v : data_) {
    Require(std::isfinite(v), ErrorCode::kNumeric,
            "wave contains non-finite samples");
  }
}

double Energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t ReadU32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t ReadU16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void PutU32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}

void PutU16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(v & 0xFF);
  out.push_back((v >> 8) & 0xFF);
}

}  // namespace

MultiChannelWave ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(static_cast<bool>(in), ErrorCode::kIo, "cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  Require(bytes.size() >= 12 && std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
              std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
          ErrorCode::kIo, path + ": not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = ReadU32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      Require(size >= 16 && avail >= 16, ErrorCode::kIo,
              path + ": truncated fmt chunk");
      format = ReadU16(chunk + 8);
      channels = ReadU16(chunk + 10);
      rate = ReadU32(chunk + 12);
      bits = ReadU16(chunk + 22);
      if (format == kFormatExtensible) {
        Require(size >= 40 && avail >= 40, ErrorCode::kIo,
                path + ": truncated extensible fmt chunk");
        format = ReadU16(chunk + 8 + 24);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = std::min<std::size_t>(size, avail);
    }
    pos = body + size + (size & 1u);
  }

  Require(data != nullptr, ErrorCode::kIo, path + ": missing data chunk");
  Require(channels > 0 && rate > 0, ErrorCode::kIo,
          path + ": missing or invalid fmt chunk");
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  Require(pcm16 || f32, ErrorCode::kIo,
          path + ": only PCM16 and float32 WAV are supported");

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frames = data_size / (bytes_per_sample * channels);
  MultiChannelWave wave(channels, frames, static_cast<int>(rate));
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t r = 0; r < channels; ++r) {
      const unsigned char* p = data + (n * channels + r) * bytes_per_sample;
      if (pcm16) {
        const auto v = static_cast<std::int16_t>(ReadU16(p));
        wave(r, n) = static_cast<double>(v) / 32768.0;
      } else {
        const std::uint32_t u = ReadU32(p);
        float v;
        std::memcpy(&v, &u, sizeof(v));
        wave(r, n) = static_cast<double>(v);
      }
    }
  }
  return wave;
}

MultiChannelWave ReadWav(const std::string& path, int expected_rate) {
  MultiChannelWave wave = ReadWav(path);
  Require(wave.SampleRate() == expected_rate, ErrorCode::kInvalidArgument,
          path + ": sample rate " + std::to_string(wave.SampleRate()) +
              " does not match expected " + std::to_string(expected_rate));
  return wave;
}

void WriteWav(const std::string& path, const MultiChannelWave& wave,
              WavEncoding encoding) {
  Require(wave.NumChannels() > 0 && wave.NumChannels() <= 0xFFFF,
          ErrorCode::kInvalidArgument, "invalid channel count for WAV");
  const bool f32 = encoding == WavEncoding::kFloat32;
  const std::uint16_t bits = f32 ? 32 : 16;
  const std::uint16_t channels = static_cast<std::uint16_t>(wave.NumChannels());
  const std::uint32_t block = channels * (bits / 8);
  const std::uint64_t data_size =
      static_cast<std::uint64_t>(block) * wave.NumSamples();
  Require(data_size + 36 <= 0xFFFFFFFFull, ErrorCode::kInvalidArgument,
          "wave too long for RIFF");

  std::vector<unsigned char> out;
  out.reserve(44 + data_size);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  PutU32(out, static_cast<std::uint32_t>(36 + data_size));
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  PutU32(out, 16);
  PutU16(out, f32 ? kFormatFloat : kFormatPcm);
  PutU16(out, channels);
  PutU32(out, static_cast<std::uint32_t>(wave.SampleRate()));
  PutU32(out, static_cast<std::uint32_t>(wave.SampleRate()) * block);
  PutU16(out, static_cast<std::uint16_t>(block));
  PutU16(out, bits);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  PutU32(out, static_cast<std::uint32_t>(data_size));
  for (std::size_t n = 0; n < wave.NumSamples(); ++n) {
    for (std::size_t r = 0; r < channels; ++r) {
      const double v = wave(r, n);
      if (f32) {
        const float fv = static_cast<float>(v);
        std::uint32_t u;
        std::memcpy(&u, &fv, sizeof(u));
        PutU32(out, u);
      } else {
        const double scaled = std::round(std::clamp(v, -1.0, 1.0) * 32767.0);
        PutU16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
      }
    }
  }
  std::ofstream os(path, std::ios::binary);
  Require(static_cast<bool>(os), ErrorCode::kIo, "cannot write " + path);
  os.write(reinterpret_cast<const char*>(out.data()),
           static_cast<std::streamsize>(out.size()));
  Require(static_cast<bool>(os), ErrorCode::kIo, "write failed for " + path);
}

}  // namespace mcse
