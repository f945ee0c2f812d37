#include "mcse/stft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mcse/error.hpp"
#include "mcse/fft.hpp"

namespace mcse {

void StftConfig::Validate() const {
  Require(hop > 0 && window_length > 0 && fft_size > 0,
          ErrorCode::kInvalidArgument, "STFT sizes must be positive");
  Require(hop <= window_length, ErrorCode::kInvalidArgument,
          "STFT hop must not exceed the window length");
  Require(window_length <= fft_size, ErrorCode::kInvalidArgument,
          "STFT window length must not exceed the FFT size");
  Require(fft_size % 2 == 0, ErrorCode::kInvalidArgument,
          "STFT FFT size must be even");
}

std::vector<double> AnalysisWindow(const StftConfig& cfg) {
  const int n = cfg.window_length;
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    const double hann =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / static_cast<double>(n));
    w[i] = cfg.window == WindowKind::kSqrtHann ? std::sqrt(hann) : hann;
  }
  return w;
}

namespace {

// Sum over frame shifts of analysis*synthesis at each phase of the hop.
std::vector<double> OverlapProfile(const StftConfig& cfg) {
  const std::vector<double> w = AnalysisWindow(cfg);
  std::vector<double> profile(cfg.hop, 0.0);
  for (int i = 0; i < cfg.window_length; ++i) {
    profile[i % cfg.hop] += w[i] * w[i];
  }
  return profile;
}

double ColaConstant(const StftConfig& cfg) {
  const std::vector<double> profile = OverlapProfile(cfg);
  const auto [lo, hi] = std::minmax_element(profile.begin(), profile.end());
  Require(*lo > 0.0 && (*hi - *lo) <= 1e-10 * *hi, ErrorCode::kInvalidArgument,
          "STFT configuration violates the constant-overlap-add condition");
  double sum = 0.0;
  for (double v : profile) sum += v;
  return sum / static_cast<double>(profile.size());
}

}  // namespace

bool StftConfig::SatisfiesCola() const {
  try {
    Validate();
    ColaConstant(*this);
    return true;
  } catch (const Error&) {
    return false;
  }
}

Spectrogram::Spectrogram(std::size_t channels, std::size_t frames,
                         const StftConfig& cfg, std::size_t num_samples,
                         int sample_rate)
    : channels_(channels),
      frames_(frames),
      bins_(cfg.NumBins()),
      cfg_(cfg),
      num_samples_(num_samples),
      sample_rate_(sample_rate),
      data_(channels * frames * cfg.NumBins()) {}

Spectrogram Spectrogram::SelectChannel(std::size_t r) const {
  Require(r < channels_, ErrorCode::kOutOfRange, "channel index out of range");
  Spectrogram out(1, frames_, cfg_, num_samples_, sample_rate_);
  std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(r * frames_ * bins_),
              frames_ * bins_, out.data_.begin());
  return out;
}

Spectrogram Spectrogram::ZerosLike(std::size_t channels) const {
  return Spectrogram(channels, frames_, cfg_, num_samples_, sample_rate_);
}

bool Spectrogram::SameShape(const Spectrogram& other) const {
  return channels_ == other.channels_ && SameFrameGrid(other);
}

bool Spectrogram::SameFrameGrid(const Spectrogram& other) const {
  return frames_ == other.frames_ && bins_ == other.bins_;
}

std::size_t NumFramesFor(std::size_t num_samples, const StftConfig& cfg) {
  const std::size_t hop = static_cast<std::size_t>(cfg.hop);
  return (num_samples + cfg.Padding() + hop - 1) / hop;
}

Spectrogram Stft(const MultiChannelWave& wave, const StftConfig& cfg) {
  cfg.Validate();
  Require(!wave.Empty(), ErrorCode::kInvalidArgument,
          "cannot take the STFT of an empty wave");

  const std::size_t n = wave.NumSamples();
  const std::size_t pad = cfg.Padding();
  const std::size_t hop = static_cast<std::size_t>(cfg.hop);
  const std::size_t win = static_cast<std::size_t>(cfg.window_length);
  const std::size_t frames = NumFramesFor(n, cfg);
  const std::vector<double> w = AnalysisWindow(cfg);

  Spectrogram spec(wave.NumChannels(), frames, cfg, n, wave.SampleRate());
  RealFft fft(static_cast<std::size_t>(cfg.fft_size));
  std::vector<double> frame(static_cast<std::size_t>(cfg.fft_size));
  std::vector<Complex> bins;

  for (std::size_t r = 0; r < wave.NumChannels(); ++r) {
    const auto x = wave.Channel(r);
    for (std::size_t t = 0; t < frames; ++t) {
      std::fill(frame.begin(), frame.end(), 0.0);
      const std::size_t start = t * hop;  // index into the padded signal
      for (std::size_t i = 0; i < win; ++i) {
        const std::size_t p = start + i;
        if (p < pad || p - pad >= n) continue;
        frame[i] = x[p - pad] * w[i];
      }
      fft.Forward(frame, bins);
      for (std::size_t f = 0; f < bins.size(); ++f) spec(r, t, f) = bins[f];
    }
  }
  return spec;
}

MultiChannelWave Istft(const Spectrogram& spec) {
  const StftConfig& cfg = spec.Config();
  cfg.Validate();
  const double cola = ColaConstant(cfg);

  const std::size_t n = spec.NumSamples();
  const std::size_t pad = cfg.Padding();
  const std::size_t hop = static_cast<std::size_t>(cfg.hop);
  const std::size_t win = static_cast<std::size_t>(cfg.window_length);
  const std::size_t frames = spec.NumFrames();
  Require(frames == NumFramesFor(n, cfg), ErrorCode::kDimensionMismatch,
          "spectrogram frame count does not match its signal length");
  const std::vector<double> w = AnalysisWindow(cfg);

  MultiChannelWave wave(spec.NumChannels(), n, spec.SampleRate());
  RealFft fft(static_cast<std::size_t>(cfg.fft_size));
  std::vector<Complex> bins(spec.NumBins());
  std::vector<double> frame;
  std::vector<double> acc((frames - 1) * hop + win, 0.0);

  for (std::size_t r = 0; r < spec.NumChannels(); ++r) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t f = 0; f < bins.size(); ++f) bins[f] = spec(r, t, f);
      // Imaginary parts of DC and Nyquist carry no real-signal information.
      bins.front() = Complex(bins.front().real(), 0.0);
      bins.back() = Complex(bins.back().real(), 0.0);
      fft.Inverse(bins, frame);
      const std::size_t start = t * hop;
      for (std::size_t i = 0; i < win; ++i) acc[start + i] += frame[i] * w[i];
    }
    auto out = wave.Channel(r);
    for (std::size_t i = 0; i < n; ++i) out[i] = acc[i + pad] / cola;
  }
  return wave;
}

Eigen::MatrixXd LogPowerSpectrum(const Spectrogram& spec, std::size_t channel,
                                 double floor) {
  Require(channel < spec.NumChannels(), ErrorCode::kOutOfRange,
          "LPS channel out of range");
  Eigen::MatrixXd lps(spec.NumFrames(), spec.NumBins());
  for (std::size_t t = 0; t < spec.NumFrames(); ++t) {
    for (std::size_t f = 0; f < spec.NumBins(); ++f) {
      lps(t, f) = std::log(std::norm(spec(channel, t, f)) + floor);
    }
  }
  return lps;
}

}  // namespace mcse
