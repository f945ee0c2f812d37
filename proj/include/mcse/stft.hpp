#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mcse/audio.hpp"

namespace mcse {

using Complex = std::complex<double>;

enum class WindowKind {
  kSqrtHann,  // sqrt of periodic Hann, used for analysis and synthesis
  kHann,      // periodic Hann for both; COLA only at hop <= window/4
};

struct StftConfig {
  int fft_size = 512;
  int window_length = 512;
  int hop = 256;
  WindowKind window = WindowKind::kSqrtHann;

  std::size_t NumBins() const { return static_cast<std::size_t>(fft_size) / 2 + 1; }
  // Zero padding applied at both ends of the signal before framing.
  std::size_t Padding() const {
    return static_cast<std::size_t>(window_length - hop);
  }
  // Throws unless 0 < hop <= window_length <= fft_size.
  void Validate() const;
  // True when analysis x synthesis windows overlap-add to a constant.
  bool SatisfiesCola() const;
};

std::vector<double> AnalysisWindow(const StftConfig& cfg);

// Complex one-sided STFT tensor, R channels x T frames x F bins.
class Spectrogram {
 public:
  Spectrogram() = default;
  Spectrogram(std::size_t channels, std::size_t frames,
              const StftConfig& cfg = {}, std::size_t num_samples = 0,
              int sample_rate = kDefaultSampleRate);

  std::size_t NumChannels() const { return channels_; }
  std::size_t NumFrames() const { return frames_; }
  std::size_t NumBins() const { return bins_; }
  const StftConfig& Config() const { return cfg_; }
  // Length of the time-domain signal the frames were computed from.
  std::size_t NumSamples() const { return num_samples_; }
  int SampleRate() const { return sample_rate_; }

  Complex& operator()(std::size_t r, std::size_t t, std::size_t f) {
    return data_[(r * frames_ + t) * bins_ + f];
  }
  const Complex& operator()(std::size_t r, std::size_t t, std::size_t f) const {
    return data_[(r * frames_ + t) * bins_ + f];
  }

  std::span<Complex> Values() { return data_; }
  std::span<const Complex> Values() const { return data_; }

  Spectrogram SelectChannel(std::size_t r) const;
  // Same geometry, zero values.
  Spectrogram ZerosLike(std::size_t channels) const;
  bool SameShape(const Spectrogram& other) const;
  bool SameFrameGrid(const Spectrogram& other) const;

 private:
  std::size_t channels_ = 0;
  std::size_t frames_ = 0;
  std::size_t bins_ = 0;
  StftConfig cfg_;
  std::size_t num_samples_ = 0;
  int sample_rate_ = kDefaultSampleRate;
  std::vector<Complex> data_;
};

// Frame count for n samples: ceil((n + padding) / hop).
std::size_t NumFramesFor(std::size_t num_samples, const StftConfig& cfg);

Spectrogram Stft(const MultiChannelWave& wave, const StftConfig& cfg = {});
// Weighted overlap-add; output trimmed to spec.NumSamples().
MultiChannelWave Istft(const Spectrogram& spec);

inline constexpr double kLpsFloor = 1e-12;

// log(|X(t,f)|^2 + floor) for one channel, T x F.
Eigen::MatrixXd LogPowerSpectrum(const Spectrogram& spec, std::size_t channel,
                                 double floor = kLpsFloor);

}  // namespace mcse
