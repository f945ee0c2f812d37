#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mcse/hermitian.hpp"
#include "mcse/masks.hpp"
#include "mcse/stft.hpp"

namespace mcse {

// Reference microphone r; u_r is the corresponding one-hot vector.
struct ReferenceChannel {
  std::size_t index = 0;
};

// One filter vector per frequency bin; w(f) is applied as w(f)^H y(t, f).
struct BeamformerWeights {
  std::vector<CVector> values;
  std::vector<std::uint8_t> degenerate;

  std::size_t NumBins() const { return values.size(); }
  std::size_t Dim() const {
    return values.empty() ? 0 : static_cast<std::size_t>(values.front().size());
  }
  std::size_t NumDegenerate() const;
};

inline constexpr double kTraceGuard = 1e-10;
inline constexpr double kMvdrFloorEps = 1e-5;

// Shared closed form of the mask-based MVDR and WPD filters:
//   X = floor(phi_den, eps)^-1 phi_num,   w = X u_r / tr(X).
// Falls back to u_r (flagged) when either input bin is degenerate, the solve
// fails, or |tr(X)| < kTraceGuard.
BeamformerWeights TraceNormalizedWeights(const NarrowbandMatrixSet& phi_num,
                                         const NarrowbandMatrixSet& phi_den,
                                         ReferenceChannel ref, double eps);

BeamformerWeights MvdrWeights(const NarrowbandMatrixSet& phi_x,
                              const NarrowbandMatrixSet& phi_n,
                              ReferenceChannel ref, double eps = kMvdrFloorEps);

// S(t, f) = w(f)^H y(t, f); returns a single-channel spectrogram.
Spectrogram ApplyFilter(const BeamformerWeights& weights, const Spectrogram& spec);

struct SeparationResult {
  Spectrogram output;
  BeamformerWeights weights;
};

SeparationResult SeparateMvdr(const Spectrogram& mixture,
                              const ComplexMask& mask_x,
                              const ComplexMask& mask_n, ReferenceChannel ref,
                              double eps = kMvdrFloorEps);

}  // namespace mcse
