#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "mcse/error.hpp"
#include "mcse/fft.hpp"
#include "mcse/metrics.hpp"
#include "mcse/resample.hpp"

namespace mcse {

namespace {

constexpr int kSrmrRate = 16000;
constexpr int kChannels = 23;
constexpr double kLowFreq = 125.0;
constexpr int kModBands = 8;
constexpr double kModMin = 4.0;
constexpr double kModMax = 128.0;
constexpr double kModQ = 2.0;
constexpr double kEarQ = 9.26449;
constexpr double kMinBw = 24.7;

// Transposed direct form II biquad, a[0] normalized away.
void Biquad(std::vector<double>& x, const std::array<double, 3>& b,
            const std::array<double, 3>& a) {
  const double b0 = b[0] / a[0], b1 = b[1] / a[0], b2 = b[2] / a[0];
  const double a1 = a[1] / a[0], a2 = a[2] / a[0];
  double z1 = 0.0, z2 = 0.0;
  for (double& v : x) {
    const double in = v;
    const double out = b0 * in + z1;
    z1 = b1 * in - a1 * out + z2;
    z2 = b2 * in - a2 * out;
    v = out;
  }
}

// Slaney's ERB-spaced center frequencies from high to low.
std::vector<double> ErbSpace(double low, double high, int n) {
  std::vector<double> cf(static_cast<std::size_t>(n));
  const double q = kEarQ * kMinBw;
  for (int i = 1; i <= n; ++i) {
    const double frac = static_cast<double>(i) / n;
    cf[static_cast<std::size_t>(i - 1)] =
        -q + std::exp(frac * (-std::log(high + q) + std::log(low + q))) * (high + q);
  }
  return cf;
}

// Slaney's fourth-order gammatone as four cascaded biquads, unit gain at cf.
std::vector<double> GammatoneChannel(std::span<const double> x, double cf, int fs) {
  using C = std::complex<double>;
  const double t = 1.0 / fs;
  const double erb = cf / kEarQ + kMinBw;
  const double bw = 1.019 * 2.0 * std::numbers::pi * erb;
  const double arg = 2.0 * cf * std::numbers::pi * t;
  const C vec = std::exp(C(0.0, 2.0 * arg));
  const double b1 = -2.0 * std::cos(arg) / std::exp(bw * t);
  const double b2 = std::exp(-2.0 * bw * t);
  const double rt_pos = std::sqrt(3.0 + std::pow(2.0, 1.5));
  const double rt_neg = std::sqrt(3.0 - std::pow(2.0, 1.5));
  const double common = -t * std::exp(-bw * t);
  const double k[4] = {std::cos(arg) + rt_pos * std::sin(arg),
                       std::cos(arg) - rt_pos * std::sin(arg),
                       std::cos(arg) + rt_neg * std::sin(arg),
                       std::cos(arg) - rt_neg * std::sin(arg)};
  const C gain_arg = std::exp(C(-bw * t, arg));
  C prod = std::pow(t * std::exp(bw * t) /
                        (-1.0 / std::exp(bw * t) + 1.0 + vec * (1.0 - std::exp(bw * t))),
                    4.0);
  for (double ki : k) prod *= vec - gain_arg * ki;
  const double gain = std::abs(prod);

  std::vector<double> y(x.begin(), x.end());
  const std::array<double, 3> a = {1.0, b1, b2};
  for (int s = 0; s < 4; ++s) {
    std::array<double, 3> b = {t, common * k[s], 0.0};
    if (s == 0) {
      for (double& v : b) v /= gain;
    }
    Biquad(y, b, a);
  }
  return y;
}

// |analytic signal| via a zero-padded power-of-two FFT.
std::vector<double> HilbertEnvelope(const std::vector<double>& x) {
  const std::size_t n = NextPowerOfTwo(std::max<std::size_t>(x.size(), 2));
  std::vector<std::complex<double>> buf(n);
  for (std::size_t i = 0; i < x.size(); ++i) buf[i] = x[i];
  ComplexFft(buf, false);
  for (std::size_t i = 1; i < n / 2; ++i) buf[i] *= 2.0;
  for (std::size_t i = n / 2 + 1; i < n; ++i) buf[i] = 0.0;
  ComplexFft(buf, true);
  std::vector<double> env(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) env[i] = std::abs(buf[i]);
  return env;
}

std::vector<double> ModulationCenters() {
  std::vector<double> cfs(kModBands);
  const double spacing = std::pow(kModMax / kModMin, 1.0 / (kModBands - 1));
  for (int i = 0; i < kModBands; ++i) cfs[static_cast<std::size_t>(i)] = kModMin * std::pow(spacing, i);
  return cfs;
}

}  // namespace

SrmrDetail SrmrAnalyze(std::span<const double> wave, int sample_rate) {
  Require(sample_rate > 0, ErrorCode::kInvalidArgument, "SRMR: invalid sample rate");
  std::vector<double> x(wave.begin(), wave.end());
  if (sample_rate != kSrmrRate) x = ResampleRational(x, kSrmrRate, sample_rate);
  double energy = 0.0;
  for (double v : x) energy += v * v;
  Require(energy > 0.0, ErrorCode::kDegenerate, "SRMR: silent input");

  const int fs = kSrmrRate;
  const auto win_len = static_cast<std::size_t>(std::ceil(0.256 * fs));
  const auto win_inc = static_cast<std::size_t>(std::ceil(0.064 * fs));
  Require(x.size() >= win_len, ErrorCode::kInvalidArgument,
          "SRMR: input shorter than one 256 ms frame");
  const std::size_t frames = 1 + (x.size() - win_len) / win_inc;
  std::vector<double> window(win_len);
  for (std::size_t i = 0; i < win_len; ++i) {
    window[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                       static_cast<double>(win_len));
  }

  SrmrDetail detail;
  detail.center_freqs = ErbSpace(kLowFreq, fs / 2.0, kChannels);
  detail.modulation_cfs = ModulationCenters();
  detail.avg_energy.assign(kChannels * kModBands, 0.0);
  for (int c = 0; c < kChannels; ++c) {
    const std::vector<double> env =
        HilbertEnvelope(GammatoneChannel(x, detail.center_freqs[static_cast<std::size_t>(c)], fs));
    for (int m = 0; m < kModBands; ++m) {
      const double w0 = std::tan(2.0 * std::numbers::pi * detail.modulation_cfs[static_cast<std::size_t>(m)] / fs / 2.0);
      const double b0 = w0 / kModQ;
      std::vector<double> band = env;
      Biquad(band, {b0, 0.0, -b0}, {1.0 + b0 + w0 * w0, 2.0 * w0 * w0 - 2.0, 1.0 - b0 + w0 * w0});
      double sum = 0.0;
      for (std::size_t f = 0; f < frames; ++f) {
        double e = 0.0;
        for (std::size_t i = 0; i < win_len; ++i) {
          const double v = window[i] * band[f * win_inc + i];
          e += v * v;
        }
        sum += e;
      }
      detail.avg_energy[static_cast<std::size_t>(c * kModBands + m)] = sum / static_cast<double>(frames);
    }
  }
  double low = 0.0, high = 0.0;
  for (int c = 0; c < kChannels; ++c) {
    for (int m = 0; m < kModBands; ++m) {
      const double e = detail.avg_energy[static_cast<std::size_t>(c * kModBands + m)];
      (m < 4 ? low : high) += e;
    }
  }
  Require(high > 0.0, ErrorCode::kDegenerate, "SRMR: no high modulation energy");
  detail.ratio = low / high;
  return detail;
}

double Srmr(std::span<const double> wave, int sample_rate) {
  return SrmrAnalyze(wave, sample_rate).ratio;
}

}  // namespace mcse
