#include "mcse/features.hpp"

#include <cmath>
#include <numbers>

#include "mcse/error.hpp"

namespace mcse {

Eigen::MatrixXd IpdFeatures(const Spectrogram& spec, const MicPairList& pairs) {
  pairs.Validate(spec.NumChannels());
  const std::size_t bins = spec.NumBins();
  Eigen::MatrixXd out(spec.NumFrames(), bins * pairs.Size());
  for (std::size_t p = 0; p < pairs.Size(); ++p) {
    const auto [i, j] = pairs.pairs[p];
    for (std::size_t t = 0; t < spec.NumFrames(); ++t) {
      for (std::size_t f = 0; f < bins; ++f) {
        const double diff = std::arg(spec(i, t, f)) - std::arg(spec(j, t, f));
        out(t, p * bins + f) = std::cos(diff);
      }
    }
  }
  return out;
}

// Mean over pairs of cos(observed IPD - steering IPD).
Eigen::MatrixXd AngleFeature(const Spectrogram& spec, double doa,
                             const ArrayGeometry& geometry,
                             const MicPairList& pairs, double speed_of_sound) {
  Require(geometry.NumMics() == spec.NumChannels(), ErrorCode::kDimensionMismatch,
          "angle feature: geometry and spectrogram channel counts differ");
  Require(std::isfinite(doa), ErrorCode::kInvalidArgument,
          "angle feature: DOA must be finite");
  Require(pairs.Size() > 0, ErrorCode::kInvalidArgument,
          "angle feature: empty pair list");
  pairs.Validate(spec.NumChannels());

  const std::vector<double> delays = PlaneWaveDelays(geometry, doa, speed_of_sound);
  const double bin_hz = static_cast<double>(spec.SampleRate()) /
                        static_cast<double>(spec.Config().fft_size);
  Eigen::MatrixXd af = Eigen::MatrixXd::Zero(spec.NumFrames(), spec.NumBins());
  for (const auto& [i, j] : pairs.pairs) {
    for (std::size_t f = 0; f < spec.NumBins(); ++f) {
      const double omega = 2.0 * std::numbers::pi * bin_hz * static_cast<double>(f);
      const double expected = -omega * (delays[i] - delays[j]);
      for (std::size_t t = 0; t < spec.NumFrames(); ++t) {
        const double observed = std::arg(spec(i, t, f)) - std::arg(spec(j, t, f));
        af(t, f) += std::cos(observed - expected);
      }
    }
  }
  af /= static_cast<double>(pairs.Size());
  return af;
}

}  // namespace mcse
