#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mcse {

inline constexpr int kDefaultSampleRate = 16000;

// R channels of equal length, stored channel-major.
class MultiChannelWave {
 public:
  MultiChannelWave() = default;
  MultiChannelWave(std::size_t channels, std::size_t samples,
                   int sample_rate = kDefaultSampleRate);

  static MultiChannelWave FromChannels(
      const std::vector<std::vector<double>>& channels,
      int sample_rate = kDefaultSampleRate);
  static MultiChannelWave Mono(std::span<const double> samples,
                               int sample_rate = kDefaultSampleRate);

  std::size_t NumChannels() const { return channels_; }
  std::size_t NumSamples() const { return samples_; }
  int SampleRate() const { return sample_rate_; }
  bool Empty() const { return channels_ == 0 || samples_ == 0; }

  std::span<double> Channel(std::size_t r);
  std::span<const double> Channel(std::size_t r) const;

  double& operator()(std::size_t r, std::size_t n) {
    return data_[r * samples_ + n];
  }
  double operator()(std::size_t r, std::size_t n) const {
    return data_[r * samples_ + n];
  }

  MultiChannelWave SelectChannel(std::size_t r) const;

  // Throws on non-finite samples or an invalid sample rate.
  void Validate() const;

  const std::vector<double>& Data() const { return data_; }

 private:
  std::size_t channels_ = 0;
  std::size_t samples_ = 0;
  int sample_rate_ = kDefaultSampleRate;
  std::vector<double> data_;
};

enum class WavEncoding { kPcm16, kFloat32 };

// RIFF/WAVE, interleaved PCM16 or IEEE float32 (plain or extensible header).
MultiChannelWave ReadWav(const std::string& path);
// Same, but a sample rate different from expected_rate is an error.
MultiChannelWave ReadWav(const std::string& path, int expected_rate);
void WriteWav(const std::string& path, const MultiChannelWave& wave,
              WavEncoding encoding = WavEncoding::kFloat32);

double Energy(std::span<const double> x);

}  // namespace mcse
