#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "mcse/hermitian.hpp"
#include "mcse/masks.hpp"
#include "mcse/stft.hpp"

namespace mcse {

inline constexpr int kWpeTapsSingleChannel = 18;
inline constexpr int kWpeTapsMultiChannel = 2;
inline constexpr int kWpeDelay = 2;
inline constexpr double kWpeEpsSingleChannel = 1e-5;
inline constexpr double kWpeEpsMultiChannel = 1e-6;
// lambda is floored at this fraction of the mean input power.
inline constexpr double kLambdaFloorRatio = 1e-10;

struct WpeConfig {
  int taps = kWpeTapsMultiChannel;   // L
  int delay = kWpeDelay;             // D
  int iterations = 3;                // iterative variant only
  double eps = kWpeEpsMultiChannel;  // correlation-matrix flooring
  double lambda_floor_ratio = kLambdaFloorRatio;

  void Validate() const;
  // Defaults for single-channel (R == 1) or multi-channel input.
  static WpeConfig ForChannels(std::size_t channels);
};

// Per-bin (L*R) x R prediction filter.
struct WpeFilter {
  std::vector<CMatrix> values;
  std::size_t NumBins() const { return values.size(); }
};

// [x(t-D)^T, ..., x(t-D-L+1)^T]^T at bin f; frames before 0 read as zero.
CVector StackDelayed(const Spectrogram& spec, int taps, int delay,
                     std::ptrdiff_t t, std::size_t f);

// lambda(t,f) = |M(t,f)|^2 * ||x(t,f)||^2 / R. A null mask means M == 1.
Eigen::MatrixXd SignalPower(const Spectrogram& spec, const ComplexMask* mask);

// Weighted normal equations:
//   W = floor(sum_t xs xs^H / lambda)^-1 sum_t xs x^H / lambda,
// with lambda floored at cfg.lambda_floor_ratio * mean input power.
WpeFilter WpeFilterUpdate(const Spectrogram& spec, const Eigen::MatrixXd& lambda,
                          const WpeConfig& cfg);

// d(t,f) = x(t,f) - W(f)^H xs(t-D, f).
Spectrogram WpeDereverberate(const Spectrogram& spec, const WpeFilter& filter,
                             int taps, int delay);

// Alternates the filter update with lambda = ||d||^2 / R, starting from the
// input power. Zero iterations return the input unchanged.
Spectrogram WpeIterative(const Spectrogram& spec, const WpeConfig& cfg);

// Single pass with lambda taken from the mask-filtered input power.
Spectrogram WpeMasked(const Spectrogram& spec, const ComplexMask& mask,
                      const WpeConfig& cfg);

// Elementwise complex masking, broadcast over channels.
Spectrogram SpecmApply(const Spectrogram& spec, const ComplexMask& mask);

// sum_{t,f} ||d(t,f)||^2 / lambda(t,f) + R log lambda(t,f) for the given
// filter; lambda floored as in WpeFilterUpdate. Used to monitor convergence.
double WpeNegativeLogLikelihood(const Spectrogram& spec, const WpeFilter& filter,
                                const Eigen::MatrixXd& lambda,
                                const WpeConfig& cfg);

}  // namespace mcse
