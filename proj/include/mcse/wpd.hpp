#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "mcse/dereverb.hpp"
#include "mcse/hermitian.hpp"
#include "mcse/masks.hpp"
#include "mcse/mvdr.hpp"
#include "mcse/stft.hpp"

namespace mcse {

inline constexpr int kWpdTaps = 1;
inline constexpr int kWpdDelay = 2;
inline constexpr double kWpdEps = 1e-4;
inline constexpr double kWpdLambdaFloorRatio = 1e-3;

struct WpdConfig {
  int taps = kWpdTaps;    // L, number of delayed frames in the stack
  int delay = kWpdDelay;  // D
  double eps = kWpdEps;   // flooring of the power-normalized covariance
  double lambda_floor_ratio = kWpdLambdaFloorRatio;

  void Validate() const;
  std::size_t StackDim(std::size_t channels) const {
    return static_cast<std::size_t>(taps + 1) * channels;
  }
};

// [y(t)^T, y(t-D)^T, ..., y(t-D-L+1)^T]^T at bin f, zero before frame 0.
CVector WpdStack(const Spectrogram& spec, int taps, int delay, std::ptrdiff_t t,
                 std::size_t f);

struct WpdCovariances {
  NarrowbandMatrixSet target;       // mask-weighted covariance of stacked vectors
  NarrowbandMatrixSet power_normalized;  // sum_t ys ys^H / lambda
};

// Builds both spatio-temporal covariances from the masks. lambda is
// (1/R) sum_r |M_lambda Y_r|^2, floored at cfg.lambda_floor_ratio times the
// mean mixture power. An all-zero target mask flags the bin degenerate.
WpdCovariances WpdCovariance(const Spectrogram& spec, const ComplexMask& mask_x,
                             const ComplexMask& mask_lambda, const WpdConfig& cfg);

BeamformerWeights WpdWeights(const Spectrogram& spec, const ComplexMask& mask_x,
                             const ComplexMask& mask_lambda, const WpdConfig& cfg,
                             ReferenceChannel ref);

// d(t,f) = w(f)^H [y(t,f); y(t-D,f); ...].
Spectrogram WpdApply(const BeamformerWeights& weights, const Spectrogram& spec,
                     int taps, int delay);

struct WpdResult {
  Spectrogram output;
  BeamformerWeights weights;
};

WpdResult WpdEnhance(const Spectrogram& spec, const ComplexMask& mask_x,
                     const ComplexMask& mask_lambda, const WpdConfig& cfg,
                     ReferenceChannel ref);

// The weighted output power sum_t |w^H ys(t)|^2 / lambda(t) at one bin.
double WpdWeightedPower(const CVector& w, const CMatrix& power_normalized);

}  // namespace mcse
