#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcse/stft.hpp"

namespace mcse {

inline constexpr double kSisnrCapDb = 60.0;

// Scale-invariant SNR in dB after removing the mean of both signals, capped
// at +/- 60 dB. Throws on a length mismatch or a silent reference.
double Sisnr(std::span<const double> estimate, std::span<const double> reference);

// Mean |estimate - reference|^2 over all channels, frames and bins.
double SpectralMse(const Spectrogram& estimate, const Spectrogram& reference);

// Classic STOI, 10 kHz internal rate, 15 third-octave bands from 150 Hz,
// 30-frame segments, -15 dB clipping, 40 dB silent-frame removal driven by
// the reference. Follows the pystoi reference implementation step for step.
// Throws if fewer than 30 frames survive silence removal or the reference is
// silent.
double Stoi(std::span<const double> estimate, std::span<const double> reference,
            int sample_rate);

// Modulation energies behind SRMR, for inspection and tests.
struct SrmrDetail {
  std::vector<double> center_freqs;     // acoustic channels, Hz
  std::vector<double> modulation_cfs;   // 8 modulation bands, Hz
  // avg_energy[channel * 8 + band]: frame-averaged modulation energy.
  std::vector<double> avg_energy;
  double ratio = 0.0;
};

// Speech-to-reverberation modulation energy ratio: 23-channel gammatone
// filterbank (125 Hz to fs/2), Hilbert envelopes, 8 modulation filters
// (4-128 Hz, Q = 2), 256 ms periodic Hamming frames with 64 ms hop. Returns
// the energy in modulation bands 1-4 over bands 5-8 (the upper band is fixed
// at 8). Input is resampled to 16 kHz first. Throws on silent input.
double Srmr(std::span<const double> wave, int sample_rate);
SrmrDetail SrmrAnalyze(std::span<const double> wave, int sample_rate);

struct UtteranceMetrics {
  std::string id;
  double sisnr_db = 0.0;
  std::optional<double> spectral_mse;
  double stoi = 0.0;  // in [0, 1]
  double srmr = 0.0;
};

struct MetricReport {
  std::vector<UtteranceMetrics> utterances;

  // Arithmetic means; spectral MSE over the utterances that have it.
  UtteranceMetrics Mean() const;
};

// Computes SISNR, STOI and SRMR of an estimate against its reference after
// trimming both to the shorter length.
UtteranceMetrics Evaluate(std::string id, std::span<const double> estimate,
                          std::span<const double> reference, int sample_rate);

}  // namespace mcse
