#include "mcse/mvdr.hpp"

#include <algorithm>
#include <cmath>

#include "mcse/error.hpp"

namespace mcse {

std::size_t BeamformerWeights::NumDegenerate() const {
  return static_cast<std::size_t>(
      std::count_if(degenerate.begin(), degenerate.end(),
                    [](std::uint8_t d) { return d != 0; }));
}

BeamformerWeights TraceNormalizedWeights(const NarrowbandMatrixSet& phi_num,
                                         const NarrowbandMatrixSet& phi_den,
                                         ReferenceChannel ref, double eps) {
  Require(phi_num.NumBins() == phi_den.NumBins() && phi_num.Dim() == phi_den.Dim(),
          ErrorCode::kDimensionMismatch,
          "beamformer: PSD matrix sets have different shapes");
  const std::size_t dim = phi_num.Dim();
  Require(ref.index < dim, ErrorCode::kOutOfRange,
          "beamformer: reference channel out of range");
  Require(eps >= 0.0, ErrorCode::kInvalidArgument,
          "beamformer: flooring eps must be non-negative");

  const auto r = static_cast<Eigen::Index>(ref.index);
  const CVector passthrough = CVector::Unit(static_cast<Eigen::Index>(dim), r);
  BeamformerWeights w;
  w.values.assign(phi_num.NumBins(), passthrough);
  w.degenerate.assign(phi_num.NumBins(), 0);

  for (std::size_t f = 0; f < phi_num.NumBins(); ++f) {
    if (phi_num.IsDegenerate(f) || phi_den.IsDegenerate(f)) {
      w.degenerate[f] = 1;
      continue;
    }
    CMatrix x;
    try {
      x = SolveHermitian(FloorMatrix(phi_den.matrices[f], eps), phi_num.matrices[f]);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNumeric) throw;
      w.degenerate[f] = 1;
      continue;
    }
    const Complex trace = x.trace();
    if (!(std::abs(trace) >= kTraceGuard)) {
      w.degenerate[f] = 1;
      continue;
    }
    w.values[f] = x.col(r) / trace;
  }
  return w;
}

BeamformerWeights MvdrWeights(const NarrowbandMatrixSet& phi_x,
                              const NarrowbandMatrixSet& phi_n,
                              ReferenceChannel ref, double eps) {
  return TraceNormalizedWeights(phi_x, phi_n, ref, eps);
}

Spectrogram ApplyFilter(const BeamformerWeights& weights, const Spectrogram& spec) {
  Require(weights.NumBins() == spec.NumBins(), ErrorCode::kDimensionMismatch,
          "apply_filter: bin count mismatch");
  Require(weights.Dim() == spec.NumChannels(), ErrorCode::kDimensionMismatch,
          "apply_filter: filter dimension does not match channel count");
  Spectrogram out = spec.ZerosLike(1);
  for (std::size_t f = 0; f < spec.NumBins(); ++f) {
    const CVector& w = weights.values[f];
    Require(static_cast<std::size_t>(w.size()) == spec.NumChannels(),
            ErrorCode::kDimensionMismatch, "apply_filter: filter dimension differs at some bin");
    for (std::size_t t = 0; t < spec.NumFrames(); ++t) {
      Complex acc(0.0, 0.0);
      for (std::size_t m = 0; m < spec.NumChannels(); ++m) {
        acc += std::conj(w(static_cast<Eigen::Index>(m))) * spec(m, t, f);
      }
      out(0, t, f) = acc;
    }
  }
  return out;
}

SeparationResult SeparateMvdr(const Spectrogram& mixture,
                              const ComplexMask& mask_x,
                              const ComplexMask& mask_n, ReferenceChannel ref,
                              double eps) {
  const NarrowbandMatrixSet phi_x = MaskedPsd(mixture, mask_x);
  const NarrowbandMatrixSet phi_n = MaskedPsd(mixture, mask_n);
  BeamformerWeights w = MvdrWeights(phi_x, phi_n, ref, eps);
  Spectrogram out = ApplyFilter(w, mixture);
  return {std::move(out), std::move(w)};
}

}  // namespace mcse
