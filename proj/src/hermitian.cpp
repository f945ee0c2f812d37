#include "mcse/hermitian.hpp"

#include <cmath>
#include <limits>

#include "mcse/error.hpp"

namespace mcse {

NarrowbandMatrixSet::NarrowbandMatrixSet(std::size_t bins, std::size_t dim)
    : matrices(bins, CMatrix::Zero(static_cast<Eigen::Index>(dim),
                                   static_cast<Eigen::Index>(dim))),
      degenerate(bins, 0) {}

NarrowbandMatrixSet MaskedPsd(const Spectrogram& spec, const ComplexMask& mask) {
  mask.RequireMatches(spec, "masked PSD");
  const std::size_t channels = spec.NumChannels();
  const auto dim = static_cast<Eigen::Index>(channels);
  NarrowbandMatrixSet out(spec.NumBins(), channels);
  CVector y(dim);

  for (std::size_t f = 0; f < spec.NumBins(); ++f) {
    CMatrix& phi = out.matrices[f];
    double denom = 0.0;
    for (std::size_t t = 0; t < spec.NumFrames(); ++t) {
      const Complex m = mask(t, f);
      const double power = std::norm(m);
      if (power == 0.0) continue;
      for (std::size_t r = 0; r < channels; ++r) {
        y(static_cast<Eigen::Index>(r)) = m * spec(r, t, f);
      }
      phi.noalias() += y * y.adjoint();
      denom += power;
    }
    if (denom < kPsdDenominatorFloor) {
      phi = kPsdDenominatorFloor * CMatrix::Identity(dim, dim);
      out.degenerate[f] = 1;
    } else {
      phi /= denom;
    }
  }
  return out;
}

CMatrix FloorMatrix(const CMatrix& m, double eps) {
  Require(m.rows() == m.cols(), ErrorCode::kDimensionMismatch,
          "floor_matrix: matrix must be square");
  Require(eps >= 0.0, ErrorCode::kInvalidArgument,
          "floor_matrix: eps must be non-negative");
  Require(m.allFinite(), ErrorCode::kNumeric,
          "floor_matrix: non-finite input");
  if (eps == 0.0) return m;
  const double load = eps * m.trace().real();
  CMatrix out = m;
  out.diagonal().array() += Complex(load, 0.0);
  return out;
}

CMatrix Symmetrize(const CMatrix& m) {
  return 0.5 * (m + m.adjoint());
}

CMatrix SolveHermitian(const CMatrix& m, const CMatrix& rhs) {
  Require(m.rows() == m.cols() && m.rows() == rhs.rows(),
          ErrorCode::kDimensionMismatch, "solve_hermitian: shape mismatch");
  Require(m.allFinite() && rhs.allFinite(), ErrorCode::kNumeric,
          "solve_hermitian: non-finite input");
  const CMatrix h = Symmetrize(m);
  const Eigen::LDLT<CMatrix> ldlt(h);
  Require(ldlt.info() == Eigen::Success, ErrorCode::kNumeric,
          "solve_hermitian: factorization failed");

  // A zero or negative pivot means the (floored) matrix is singular or
  // indefinite; reject it instead of returning garbage.
  const Eigen::VectorXd d = ldlt.vectorD().real();
  const double dmax = d.cwiseAbs().maxCoeff();
  const double tol = static_cast<double>(h.rows()) *
                     std::numeric_limits<double>::epsilon() * dmax;
  Require(dmax > 0.0 && d.minCoeff() > tol, ErrorCode::kNumeric,
          "solve_hermitian: matrix is singular after flooring");

  CMatrix x = ldlt.solve(rhs);
  Require(x.allFinite(), ErrorCode::kNumeric,
          "solve_hermitian: non-finite solution");
  return x;
}

double BackwardError(const CMatrix& m, const CMatrix& x, const CMatrix& rhs) {
  const double denom = m.norm() * x.norm() + rhs.norm();
  if (denom == 0.0) return 0.0;
  return (m * x - rhs).norm() / denom;
}

}  // namespace mcse
