#include "mcse/wpd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mcse/error.hpp"

namespace mcse {

void WpdConfig::Validate() const {
  Require(taps >= 0, ErrorCode::kInvalidArgument, "WPD taps must be >= 0");
  Require(delay >= 1, ErrorCode::kInvalidArgument, "WPD delay must be >= 1");
  Require(eps >= 0.0, ErrorCode::kInvalidArgument, "WPD eps must be >= 0");
  Require(lambda_floor_ratio > 0.0, ErrorCode::kInvalidArgument,
          "WPD lambda floor ratio must be positive");
}

CVector WpdStack(const Spectrogram& spec, int taps, int delay, std::ptrdiff_t t,
                 std::size_t f) {
  const std::size_t channels = spec.NumChannels();
  CVector v = CVector::Zero(static_cast<Eigen::Index>((taps + 1) * channels));
  if (t >= 0 && t < static_cast<std::ptrdiff_t>(spec.NumFrames())) {
    for (std::size_t r = 0; r < channels; ++r) {
      v(static_cast<Eigen::Index>(r)) = spec(r, static_cast<std::size_t>(t), f);
    }
  }
  if (taps > 0) {
    v.tail(static_cast<Eigen::Index>(taps * channels)) =
        StackDelayed(spec, taps, delay, t, f);
  }
  return v;
}

WpdCovariances WpdCovariance(const Spectrogram& spec, const ComplexMask& mask_x,
                             const ComplexMask& mask_lambda, const WpdConfig& cfg) {
  cfg.Validate();
  mask_x.RequireMatches(spec, "WPD target mask");
  mask_lambda.RequireMatches(spec, "WPD power mask");

  const std::size_t dim = cfg.StackDim(spec.NumChannels());
  const auto frames = static_cast<Eigen::Index>(spec.NumFrames());
  const Eigen::MatrixXd lambda = SignalPower(spec, &mask_lambda);
  double mean_power = 0.0;
  for (const Complex& v : spec.Values()) mean_power += std::norm(v);
  mean_power /= static_cast<double>(std::max<std::size_t>(1, spec.Values().size()));
  const double floor = std::max(cfg.lambda_floor_ratio * mean_power,
                                std::numeric_limits<double>::min());

  WpdCovariances cov{NarrowbandMatrixSet(spec.NumBins(), dim),
                     NarrowbandMatrixSet(spec.NumBins(), dim)};
  CMatrix target(static_cast<Eigen::Index>(dim), frames);
  CMatrix normalized(static_cast<Eigen::Index>(dim), frames);
  for (std::size_t f = 0; f < spec.NumBins(); ++f) {
    double mask_power = 0.0;
    for (Eigen::Index t = 0; t < frames; ++t) {
      const CVector ys = WpdStack(spec, cfg.taps, cfg.delay, t, f);
      const Complex m = mask_x(static_cast<std::size_t>(t), f);
      mask_power += std::norm(m);
      target.col(t) = m * ys;
      const double lam = std::max(lambda(t, static_cast<Eigen::Index>(f)), floor);
      normalized.col(t) = ys / std::sqrt(lam);
    }
    cov.power_normalized.matrices[f] = normalized * normalized.adjoint();
    if (mask_power < kPsdDenominatorFloor) {
      cov.target.matrices[f] =
          kPsdDenominatorFloor * CMatrix::Identity(static_cast<Eigen::Index>(dim),
                                                   static_cast<Eigen::Index>(dim));
      cov.target.degenerate[f] = 1;
    } else {
      cov.target.matrices[f] = (target * target.adjoint()) / mask_power;
    }
  }
  return cov;
}

BeamformerWeights WpdWeights(const Spectrogram& spec, const ComplexMask& mask_x,
                             const ComplexMask& mask_lambda, const WpdConfig& cfg,
                             ReferenceChannel ref) {
  Require(ref.index < spec.NumChannels(), ErrorCode::kOutOfRange,
          "WPD: reference channel out of range");
  const WpdCovariances cov = WpdCovariance(spec, mask_x, mask_lambda, cfg);
  // The padded reference vector selects the same index in the stacked space.
  return TraceNormalizedWeights(cov.target, cov.power_normalized, ref, cfg.eps);
}

Spectrogram WpdApply(const BeamformerWeights& weights, const Spectrogram& spec,
                     int taps, int delay) {
  Require(taps >= 0 && delay >= 1, ErrorCode::kInvalidArgument,
          "WPD: invalid taps or delay");
  Require(weights.NumBins() == spec.NumBins(), ErrorCode::kDimensionMismatch,
          "WPD: weight bin count mismatch");
  Require(weights.Dim() == static_cast<std::size_t>(taps + 1) * spec.NumChannels(),
          ErrorCode::kDimensionMismatch,
          "WPD: weight dimension does not match (L+1)R");
  Spectrogram out = spec.ZerosLike(1);
  for (std::size_t f = 0; f < spec.NumBins(); ++f) {
    for (std::size_t t = 0; t < spec.NumFrames(); ++t) {
      const CVector ys = WpdStack(spec, taps, delay, static_cast<std::ptrdiff_t>(t), f);
      out(0, t, f) = weights.values[f].dot(ys);  // dot() conjugates the left side
    }
  }
  return out;
}

WpdResult WpdEnhance(const Spectrogram& spec, const ComplexMask& mask_x,
                     const ComplexMask& mask_lambda, const WpdConfig& cfg,
                     ReferenceChannel ref) {
  BeamformerWeights w = WpdWeights(spec, mask_x, mask_lambda, cfg, ref);
  Spectrogram out = WpdApply(w, spec, cfg.taps, cfg.delay);
  return {std::move(out), std::move(w)};
}

double WpdWeightedPower(const CVector& w, const CMatrix& power_normalized) {
  return (w.adjoint() * power_normalized * w)(0, 0).real();
}

}  // namespace mcse
