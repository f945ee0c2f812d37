#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mcse/audio.hpp"
#include "mcse/geometry.hpp"
#include "mcse/room.hpp"

namespace mcse {

// Angle-difference bins between target and interferer, degrees.
inline constexpr double kAngleBinEdges[] = {0.0, 15.0, 45.0, 90.0, 180.0};
inline constexpr int kNumAngleBins = 4;

struct RoomScene {
  std::uint64_t seed = 0;
  RoomDims room{0.0, 0.0, 0.0};
  double t60 = 0.0;
  Point3 array_center{0.0, 0.0, 0.0};
  ArrayGeometry geometry;  // relative to array_center
  Point3 target{0.0, 0.0, 0.0};
  Point3 interferer{0.0, 0.0, 0.0};
  Point3 noise{0.0, 0.0, 0.0};  // point noise source
  double snr_db = 0.0;
  double sir_db = 0.0;
  int angle_bin = 0;
  double angle_difference_deg = 0.0;
  std::string target_source;      // manifest entries
  std::string interferer_source;
  std::string noise_source;       // empty: seeded synthetic noise
  std::size_t interferer_offset = 0;  // samples; 0 is full overlap
  std::size_t reference_channel = 0;

  ArrayGeometry PlacedArray() const { return geometry.Placed(array_center); }
  // Throws unless every position is strictly inside the room, the source
  // distances lie in [1, 5] m and the angle difference is in its bin.
  void Validate() const;
};

struct SceneSampling {
  RoomDims room_min{4.0, 4.0, 3.0};
  RoomDims room_max{10.0, 10.0, 6.0};
  double t60_min = 0.14;
  double t60_max = 0.92;
  std::vector<double> snr_set{0.0, 5.0, 10.0, 15.0, 20.0};
  std::vector<double> sir_set{-6.0, 0.0, 6.0};
  double min_distance = 1.0;
  double max_distance = 5.0;
  double source_height_min = 1.2;
  double source_height_max = 2.0;
  double wall_margin = 0.5;
  int rejection_budget = 1000;
  ArrayGeometry geometry = SymmetricLinearArray15();
};

// Planar azimuth difference of the two sources seen from the array center,
// folded into [0, 180] degrees.
double AngleDifferenceDeg(const Point3& center, const Point3& a, const Point3& b);
int AngleBinOf(double degrees);

// Draws room, T60, angle bin, array position, speakers (distance
// constrained; the interferer is resampled uniformly within the bin's sector
// until it fits the room), SNR, SIR and a noise position. Array and target are
// redrawn when the bin cannot be filled within the budget.
// Target and interferer come from different manifest entries when possible.
// Throws kRejectionBudget when placement still fails.
RoomScene SampleScene(std::uint64_t seed, const std::vector<std::string>& speech,
                      const std::vector<std::string>& noise = {},
                      const SceneSampling& sampling = {});

// One JSON object per line.
std::string SceneToJson(const RoomScene& scene);
RoomScene SceneFromJson(const std::string& line);

struct MixtureOptions {
  RirOptions rir;
  // Extra gain on the interferer after SIR scaling; 0 removes it while
  // keeping the noise level relative to target + interferer.
  double interferer_scale = 1.0;
};

struct SimulatedMixture {
  MultiChannelWave mixture;
  // Reference-channel signals, each as long as the mixture.
  MultiChannelWave target_reverb;
  MultiChannelWave target_early;  // direct path + early reflections
  MultiChannelWave target_dry;    // the unprocessed source
  MultiChannelWave interferer;    // scaled reverberant image
  MultiChannelWave interferer_late;  // interferer image minus its direct+early part
  MultiChannelWave noise;         // scaled reverberant image
  double interferer_gain = 0.0;
  double noise_gain = 0.0;
};

// Convolves the mono sources with their RIRs, scales the interferer for the
// scene SIR and the noise for the scene SNR (target + interferer over noise),
// both measured on the reference channel. The output has the target's length;
// the interferer is delayed by scene.interferer_offset and the noise is
// looped or cut to fit.
SimulatedMixture SimulateMixture(const MultiChannelWave& target,
                                 const MultiChannelWave& interferer,
                                 const MultiChannelWave& noise,
                                 const RoomScene& scene,
                                 const MixtureOptions& opt = {});

// Energy ratio in dB of two equal-length signals.
double EnergyRatioDb(std::span<const double> num, std::span<const double> den);

}  // namespace mcse
