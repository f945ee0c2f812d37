#include "mcse/synth.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "mcse/error.hpp"
#include "mcse/fft.hpp"
#include "mcse/random.hpp"

namespace mcse {

namespace {

using Formants = std::array<double, 3>;

constexpr Formants kVowels[] = {
    {730.0, 1090.0, 2440.0},  // a
    {270.0, 2290.0, 3010.0},  // i
    {300.0, 870.0, 2240.0},   // u
    {530.0, 1840.0, 2480.0},  // e
    {570.0, 840.0, 2410.0},   // o
};
constexpr Formants kBandwidths = {60.0, 90.0, 120.0};

struct Resonator {
  double y1 = 0.0, y2 = 0.0;
  double Step(double x, double freq, double bw, int fs) {
    const double r = std::exp(-std::numbers::pi * bw / fs);
    const double a1 = 2.0 * r * std::cos(2.0 * std::numbers::pi * freq / fs);
    const double a2 = -r * r;
    const double y = (1.0 - a1 - a2) * x + a1 * y1 + a2 * y2;  // unit DC gain
    y2 = y1;
    y1 = y;
    return y;
  }
};

void NormalizeRms(std::vector<double>& x, double rms) {
  double e = 0.0;
  for (double v : x) e += v * v;
  Require(e > 0.0, ErrorCode::kDegenerate, "synthetic source came out silent");
  const double g = rms / std::sqrt(e / static_cast<double>(x.size()));
  for (double& v : x) v *= g;
}

}  // namespace

std::vector<double> SpeechLikeSource(std::uint64_t seed, std::size_t num_samples,
                                     int sample_rate, const SpeechLikeOptions& opt) {
  Require(num_samples > 0 && sample_rate > 0, ErrorCode::kInvalidArgument,
          "speech-like source needs a positive length and sample rate");
  Require(opt.f0_min > 0.0 && opt.f0_max >= opt.f0_min && opt.syllable_rate > 0.0,
          ErrorCode::kInvalidArgument, "invalid speech-like options");
  Rng rng(seed);
  const double fs = sample_rate;
  const double base_f0 = rng.Uniform(opt.f0_min, opt.f0_max);
  const double vibrato_hz = rng.Uniform(2.0, 5.0);
  const double vibrato_phase = rng.Uniform(0.0, 2.0 * std::numbers::pi);

  std::vector<double> voiced(num_samples, 0.0);
  std::vector<double> fricative(num_samples, 0.0);
  std::array<Resonator, 3> tract;
  Formants prev = kVowels[rng.Index(std::size(kVowels))];
  double phase = 0.0;
  double tilt = 0.0;
  double last_voiced = 0.0;
  double last_fric = 0.0;
  std::size_t pos = 0;
  while (pos < num_samples) {
    if (rng.Uniform() < opt.pause_probability) {
      pos += static_cast<std::size_t>(rng.Uniform(0.1, 0.35) * fs);
      continue;
    }
    const auto len = static_cast<std::size_t>(rng.Uniform(0.6, 1.4) / opt.syllable_rate * fs);
    const Formants vowel = kVowels[rng.Index(std::size(kVowels))];
    const double amp = rng.Uniform(0.5, 1.0);
    const double pitch = rng.Uniform(0.9, 1.15);
    const std::size_t fric_len =
        rng.Uniform() < 0.3 ? static_cast<std::size_t>(rng.Uniform(0.04, 0.09) * fs) : 0;
    for (std::size_t k = 0; k < len && pos + k < num_samples; ++k) {
      const double u = static_cast<double>(k) / static_cast<double>(len);
      const double t = static_cast<double>(pos + k) / fs;
      if (k < fric_len) {
        const double w = rng.Normal();
        fricative[pos + k] = amp * (w - last_fric) *
                             std::sin(std::numbers::pi * static_cast<double>(k) /
                                      static_cast<double>(fric_len));
        last_fric = w;
      } else {
        const double f0 = base_f0 * pitch *
                          (1.0 + 0.08 * std::sin(2.0 * std::numbers::pi * vibrato_hz * t + vibrato_phase));
        phase += f0 / fs;
        double excitation = 0.0;
        if (phase >= 1.0) {
          phase -= 1.0;
          excitation = 1.0;
        }
        tilt = 0.9 * tilt + excitation;  // glottal spectral tilt
        const double blend = std::min(1.0, u / 0.3);
        double y = tilt;
        for (int i = 0; i < 3; ++i) {
          const double f = prev[i] + blend * (vowel[i] - prev[i]);
          y = tract[i].Step(y, f, kBandwidths[i], sample_rate);
        }
        const double env = std::pow(std::sin(std::numbers::pi * u), 2.0);
        voiced[pos + k] = amp * env * (y - last_voiced);  // lip radiation
        last_voiced = y;
      }
    }
    prev = vowel;
    pos += len;
  }
  // Fricatives sit about 10 dB below the voiced segments.
  NormalizeRms(voiced, 1.0);
  double fe = 0.0;
  for (double v : fricative) fe += v * v;
  if (fe > 0.0) NormalizeRms(fricative, 0.3);
  std::vector<double> out(num_samples);
  for (std::size_t i = 0; i < num_samples; ++i) out[i] = voiced[i] + fricative[i];
  NormalizeRms(out, opt.rms);
  return out;
}

std::vector<double> ColoredNoise(std::uint64_t seed, std::size_t num_samples,
                                 int sample_rate, double exponent, double rms) {
  Require(num_samples > 0 && sample_rate > 0, ErrorCode::kInvalidArgument,
          "colored noise needs a positive length and sample rate");
  Rng rng(seed);
  const std::size_t n = NextPowerOfTwo(std::max<std::size_t>(num_samples, 2));
  std::vector<double> white(n);
  for (double& v : white) v = rng.Normal();
  RealFft fft(n);
  std::vector<std::complex<double>> spec;
  fft.Forward(white, spec);
  spec[0] = 0.0;
  for (std::size_t k = 1; k < spec.size(); ++k) {
    spec[k] *= std::pow(static_cast<double>(k), -exponent / 2.0);
  }
  std::vector<double> shaped;
  fft.Inverse(spec, shaped);
  shaped.resize(num_samples);
  NormalizeRms(shaped, rms);
  return shaped;
}

}  // namespace mcse
