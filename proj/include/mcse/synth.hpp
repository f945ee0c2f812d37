#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mcse {

// Synthetic test material for corpora built without recorded speech.

struct SpeechLikeOptions {
  double f0_min = 90.0;  // a per-seed base pitch is drawn from [f0_min, f0_max]
  double f0_max = 220.0;
  double syllable_rate = 4.0;  // Hz
  double pause_probability = 0.15;
  double rms = 0.05;
};

// Voiced syllables (glottal pulse train through three formant resonators
// with per-syllable vowel targets), fricative noise bursts and short pauses,
// under a syllabic amplitude envelope. Deterministic in `seed`.
std::vector<double> SpeechLikeSource(std::uint64_t seed, std::size_t num_samples,
                                     int sample_rate,
                                     const SpeechLikeOptions& opt = {});

// Gaussian noise with a 1/f^exponent power spectrum (0: white, 1: pink),
// normalized to `rms`.
std::vector<double> ColoredNoise(std::uint64_t seed, std::size_t num_samples,
                                 int sample_rate, double exponent = 1.0,
                                 double rms = 0.05);

}  // namespace mcse
