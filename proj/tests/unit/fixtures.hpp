#pragma once

#include "mcse/metrics.hpp"
#include "mcse/scene.hpp"
#include "mcse/stft.hpp"
#include "mcse/synth.hpp"

namespace mcse::testing {

// Fixed two-speaker scene in a 6 x 5 x 3 m room with the 15-mic array.
inline RoomScene FixtureScene(double t60, double snr_db = 10.0, double sir_db = 0.0) {
  RoomScene s;
  s.seed = 7;
  s.room = {6.0, 5.0, 3.0};
  s.t60 = t60;
  s.array_center = {3.0, 2.0, 1.5};
  s.geometry = SymmetricLinearArray15();
  s.target = {2.2, 3.8, 1.6};
  s.interferer = {4.6, 3.4, 1.7};
  s.noise = {5.2, 0.8, 1.4};
  s.snr_db = snr_db;
  s.sir_db = sir_db;
  s.angle_difference_deg = AngleDifferenceDeg(s.array_center, s.target, s.interferer);
  s.angle_bin = AngleBinOf(s.angle_difference_deg);
  return s;
}

inline SimulatedMixture FixtureMixture(const RoomScene& scene, double seconds = 2.0,
                                       std::uint64_t seed = 1) {
  const auto n = static_cast<std::size_t>(seconds * kDefaultSampleRate);
  const auto target = MultiChannelWave::Mono(SpeechLikeSource(seed, n, kDefaultSampleRate));
  SpeechLikeOptions other;
  other.f0_min = 160.0;
  other.f0_max = 260.0;
  const auto interferer =
      MultiChannelWave::Mono(SpeechLikeSource(seed + 100, n, kDefaultSampleRate, other));
  const auto noise = MultiChannelWave::Mono(ColoredNoise(seed + 200, n, kDefaultSampleRate));
  return SimulateMixture(target, interferer, noise, scene);
}

inline double SisnrDb(const Spectrogram& estimate, const MultiChannelWave& reference) {
  const auto wave = Istft(estimate);
  return Sisnr(wave.Channel(0), reference.Channel(0));
}

}  // namespace mcse::testing
