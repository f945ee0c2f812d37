#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mcse/audio.hpp"
#include "mcse/geometry.hpp"

namespace mcse {

// Shoebox room [0, x] x [0, y] x [0, z], meters.
using RoomDims = Point3;

enum class AbsorptionModel {
  // Matches the -5 to -35 dB Schroeder slope of the image model's own
  // direction-averaged decay to the requested T60. Default.
  kImageDecay,
  kEyring,  // alpha = 1 - exp(-k V / (S T60))
  kSabine,  // alpha = k V / (S T60)
};

// Uniform wall energy absorption giving the requested T60, with
// k = 24 ln(10) / c for the closed-form models. Throws kOutOfRange if the
// result is not in (0, 1).
double AbsorptionFromT60(const RoomDims& room, double t60,
                         AbsorptionModel model = AbsorptionModel::kImageDecay,
                         double speed_of_sound = kSpeedOfSound);

bool InsideRoom(const RoomDims& room, const Point3& p);

struct RirOptions {
  int sample_rate = kDefaultSampleRate;
  double speed_of_sound = kSpeedOfSound;
  AbsorptionModel model = AbsorptionModel::kImageDecay;
  // Direct+early part ends this long after the direct path.
  double early_ms = 50.0;
  // Reflection order limit; negative keeps every image arriving within the
  // RIR length.
  int max_order = -1;
  // Allen-Berkley 100 Hz high-pass on every channel. Without it the positive
  // image pulses pile up into a slowly decaying low-frequency tail.
  bool high_pass = true;
};

struct Rir {
  std::vector<std::vector<double>> taps;  // one sequence per microphone
  int sample_rate = kDefaultSampleRate;
  std::vector<std::size_t> direct_index;  // per channel, rounded direct delay
  std::vector<std::size_t> split_index;   // per channel, early/late boundary

  std::size_t NumChannels() const { return taps.size(); }
  std::size_t Length() const { return taps.empty() ? 0 : taps.front().size(); }
  // Throws unless taps are finite and direct < split < length on every channel.
  void Validate() const;
  MultiChannelWave AsWave() const;
};

// Allen-Berkley image method with a uniform pressure reflection coefficient
// sqrt(1 - alpha). Image amplitudes fall off as 1/distance and delays are
// rendered with an 8-tap Hann-windowed sinc. The length is at least
// ceil(T60 * fs) samples. `mics` holds absolute positions.
Rir ImageMethodRir(const RoomDims& room, double t60, const Point3& source,
                   const ArrayGeometry& mics, const RirOptions& opt = {});

// Same with an explicit absorption in (0, 1] and length in samples
// (grown if needed to hold the direct path plus the early window).
Rir ImageMethodRirFromAbsorption(const RoomDims& room, double absorption,
                                 std::size_t length, const Point3& source,
                                 const ArrayGeometry& mics,
                                 const RirOptions& opt = {});

// Schroeder backward-integrated energy decay in dB, normalized to 0 dB at
// the first sample.
std::vector<double> SchroederDecayDb(std::span<const double> rir);

// T60 from a least-squares line through the decay curve between hi_db and
// lo_db, extrapolated to -60 dB. Throws kNumeric if the curve never reaches
// lo_db.
double MeasureT60(std::span<const double> rir, int sample_rate,
                  double hi_db = -5.0, double lo_db = -35.0);

}  // namespace mcse
