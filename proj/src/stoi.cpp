#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "mcse/error.hpp"
#include "mcse/fft.hpp"
#include "mcse/metrics.hpp"
#include "mcse/resample.hpp"

namespace mcse {

namespace {

constexpr int kStoiRate = 10000;
constexpr std::size_t kFrame = 256;
constexpr std::size_t kHop = 128;
constexpr std::size_t kNfft = 512;
constexpr int kBands = 15;
constexpr double kMinFreq = 150.0;
constexpr std::size_t kSegment = 30;
constexpr double kBeta = -15.0;
constexpr double kDynRange = 40.0;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Matlab-style hanning(n): the periodic-free window without zero endpoints.
std::vector<double> Hanning(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i + 1) /
                                static_cast<double>(n + 1));
  }
  return w;
}

// Frame starts 0, hop, ... strictly below len - frame (as in the reference).
std::size_t NumFrames(std::size_t len) {
  if (len <= kFrame) return 0;
  return (len - kFrame - 1) / kHop + 1;
}

std::vector<double> OverlapAdd(const std::vector<std::vector<double>>& frames) {
  if (frames.empty()) return {};
  std::vector<double> out((frames.size() - 1) * kHop + kFrame, 0.0);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    for (std::size_t k = 0; k < kFrame; ++k) out[i * kHop + k] += frames[i][k];
  }
  return out;
}

void RemoveSilentFrames(std::vector<double>& x, std::vector<double>& y) {
  const std::vector<double> w = Hanning(kFrame);
  const std::size_t count = NumFrames(x.size());
  std::vector<std::vector<double>> xf(count, std::vector<double>(kFrame));
  std::vector<std::vector<double>> yf(count, std::vector<double>(kFrame));
  std::vector<double> energy(count);
  for (std::size_t i = 0; i < count; ++i) {
    double e = 0.0;
    for (std::size_t k = 0; k < kFrame; ++k) {
      xf[i][k] = w[k] * x[i * kHop + k];
      yf[i][k] = w[k] * y[i * kHop + k];
      e += xf[i][k] * xf[i][k];
    }
    energy[i] = 20.0 * std::log10(std::sqrt(e) + kEps);
  }
  const double max_e = count ? *std::max_element(energy.begin(), energy.end()) : 0.0;
  std::vector<std::vector<double>> xk, yk;
  for (std::size_t i = 0; i < count; ++i) {
    if (max_e - kDynRange - energy[i] < 0.0) {
      xk.push_back(std::move(xf[i]));
      yk.push_back(std::move(yf[i]));
    }
  }
  x = OverlapAdd(xk);
  y = OverlapAdd(yk);
}

// One-third-octave band power matrix as bin ranges [lo, hi).
std::vector<std::pair<std::size_t, std::size_t>> ThirdOctaveBands() {
  const std::size_t bins = kNfft / 2 + 1;
  auto nearest = [&](double freq) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < bins; ++b) {
      const double f = static_cast<double>(b) * kStoiRate / static_cast<double>(kNfft);
      const double d = (f - freq) * (f - freq);
      if (d < best_d) {
        best_d = d;
        best = b;
      }
    }
    return best;
  };
  std::vector<std::pair<std::size_t, std::size_t>> bands;
  for (int k = 0; k < kBands; ++k) {
    const double lo = kMinFreq * std::pow(2.0, (2.0 * k - 1.0) / 6.0);
    const double hi = kMinFreq * std::pow(2.0, (2.0 * k + 1.0) / 6.0);
    bands.emplace_back(nearest(lo), nearest(hi));
  }
  return bands;
}

// T x 15 band magnitudes.
std::vector<std::array<double, kBands>> BandEnvelopes(const std::vector<double>& x) {
  static const auto bands = ThirdOctaveBands();
  const std::vector<double> w = Hanning(kFrame);
  RealFft fft(kNfft);
  std::vector<double> buf(kNfft);
  std::vector<std::complex<double>> spec;
  const std::size_t count = NumFrames(x.size());
  std::vector<std::array<double, kBands>> out(count);
  for (std::size_t t = 0; t < count; ++t) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (std::size_t k = 0; k < kFrame; ++k) buf[k] = w[k] * x[t * kHop + k];
    fft.Forward(buf, spec);
    for (int b = 0; b < kBands; ++b) {
      double p = 0.0;
      for (std::size_t f = bands[b].first; f < bands[b].second; ++f) p += std::norm(spec[f]);
      out[t][b] = std::sqrt(p);
    }
  }
  return out;
}

}  // namespace

double Stoi(std::span<const double> estimate, std::span<const double> reference,
            int sample_rate) {
  Require(estimate.size() == reference.size(), ErrorCode::kDimensionMismatch,
          "STOI: length mismatch");
  Require(sample_rate > 0, ErrorCode::kInvalidArgument, "STOI: invalid sample rate");
  double ref_energy = 0.0;
  for (double v : reference) ref_energy += v * v;
  Require(ref_energy > 0.0, ErrorCode::kDegenerate, "STOI: silent reference");

  std::vector<double> x(reference.begin(), reference.end());
  std::vector<double> y(estimate.begin(), estimate.end());
  if (sample_rate != kStoiRate) {
    x = ResampleRational(x, kStoiRate, sample_rate);
    y = ResampleRational(y, kStoiRate, sample_rate);
  }
  RemoveSilentFrames(x, y);
  const auto xb = BandEnvelopes(x);
  const auto yb = BandEnvelopes(y);
  Require(xb.size() >= kSegment, ErrorCode::kInvalidArgument,
          "STOI: fewer than 30 frames after silence removal (input too short)");

  const double clip = std::pow(10.0, -kBeta / 20.0);
  const std::size_t segments = xb.size() - kSegment + 1;
  double total = 0.0;
  std::array<double, kSegment> xs{}, ys{};
  for (std::size_t m = 0; m < segments; ++m) {
    for (int b = 0; b < kBands; ++b) {
      double nx = 0.0, ny = 0.0;
      for (std::size_t j = 0; j < kSegment; ++j) {
        xs[j] = xb[m + j][b];
        ys[j] = yb[m + j][b];
        nx += xs[j] * xs[j];
        ny += ys[j] * ys[j];
      }
      const double alpha = std::sqrt(nx) / (std::sqrt(ny) + kEps);
      double mx = 0.0, my = 0.0;
      for (std::size_t j = 0; j < kSegment; ++j) {
        ys[j] = std::min(ys[j] * alpha, xs[j] * (1.0 + clip));
        mx += xs[j];
        my += ys[j];
      }
      mx /= kSegment;
      my /= kSegment;
      double sxx = 0.0, syy = 0.0, sxy = 0.0;
      for (std::size_t j = 0; j < kSegment; ++j) {
        xs[j] -= mx;
        ys[j] -= my;
        sxx += xs[j] * xs[j];
        syy += ys[j] * ys[j];
      }
      const double dx = std::sqrt(sxx) + kEps;
      const double dy = std::sqrt(syy) + kEps;
      for (std::size_t j = 0; j < kSegment; ++j) sxy += (xs[j] / dx) * (ys[j] / dy);
      total += sxy;
    }
  }
  return total / static_cast<double>(segments * kBands);
}

}  // namespace mcse
