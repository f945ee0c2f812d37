#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mcse/masks.hpp"
#include "mcse/stft.hpp"

namespace mcse {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// One square complex matrix per frequency bin. `degenerate[f]` marks bins
// whose estimate fell back to a floored identity.
struct NarrowbandMatrixSet {
  std::vector<CMatrix> matrices;
  std::vector<std::uint8_t> degenerate;

  NarrowbandMatrixSet() = default;
  NarrowbandMatrixSet(std::size_t bins, std::size_t dim);

  std::size_t NumBins() const { return matrices.size(); }
  std::size_t Dim() const {
    return matrices.empty() ? 0 : static_cast<std::size_t>(matrices.front().rows());
  }
  bool IsDegenerate(std::size_t f) const { return degenerate[f] != 0; }
};

// Guard on the mask-power denominator of a masked PSD estimate.
inline constexpr double kPsdDenominatorFloor = 1e-10;

// Phi(f) = sum_t |M|^2 y y^H / sum_t |M|^2 for every bin. Bins whose mask
// power is below kPsdDenominatorFloor get kPsdDenominatorFloor * I, flagged.
NarrowbandMatrixSet MaskedPsd(const Spectrogram& spec, const ComplexMask& mask);

// Diagonal loading Phi + eps * tr(Phi) * I.
CMatrix FloorMatrix(const CMatrix& m, double eps);

// (m + m^H) / 2.
CMatrix Symmetrize(const CMatrix& m);

// Solves m X = rhs for Hermitian positive (semi)definite m with a pivoted
// LDL^H factorization. Throws ErrorCode::kNumeric if m is singular.
CMatrix SolveHermitian(const CMatrix& m, const CMatrix& rhs);

// ||m X - rhs|| / (||m|| ||X|| + ||rhs||), Frobenius norms.
double BackwardError(const CMatrix& m, const CMatrix& x, const CMatrix& rhs);

}  // namespace mcse
