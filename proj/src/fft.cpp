#include "mcse/fft.hpp"

#include <unsupported/Eigen/FFT>

#include "mcse/error.hpp"

namespace mcse {

struct RealFft::Impl {
  Eigen::FFT<double> engine;
  std::vector<double> real_buf;
  std::vector<std::complex<double>> complex_buf;
};

RealFft::RealFft(std::size_t size) : size_(size), impl_(new Impl) {
  Require(size >= 2 && size % 2 == 0, ErrorCode::kInvalidArgument,
          "FFT size must be even and >= 2");
  impl_->engine.SetFlag(Eigen::FFT<double>::HalfSpectrum);
}

RealFft::~RealFft() { delete impl_; }

RealFft::RealFft(RealFft&& other) noexcept
    : size_(other.size_), impl_(other.impl_) {
  other.impl_ = nullptr;
}

RealFft& RealFft::operator=(RealFft&& other) noexcept {
  if (this != &other) {
    delete impl_;
    size_ = other.size_;
    impl_ = other.impl_;
    other.impl_ = nullptr;
  }
  return *this;
}

void RealFft::Forward(std::span<const double> in,
                      std::vector<std::complex<double>>& out) {
  Require(in.size() == size_, ErrorCode::kDimensionMismatch,
          "FFT input size mismatch");
  impl_->real_buf.assign(in.begin(), in.end());
  impl_->engine.fwd(out, impl_->real_buf);
  out.resize(NumBins());
}

void RealFft::Inverse(std::span<const std::complex<double>> in,
                      std::vector<double>& out) {
  Require(in.size() == NumBins(), ErrorCode::kDimensionMismatch,
          "inverse FFT bin count mismatch");
  impl_->complex_buf.assign(in.begin(), in.end());
  impl_->engine.inv(out, impl_->complex_buf, static_cast<Eigen::Index>(size_));
}

void ComplexFft(std::vector<std::complex<double>>& data, bool inverse) {
  Eigen::FFT<double> engine;
  std::vector<std::complex<double>> out;
  if (inverse) {
    engine.inv(out, data);
  } else {
    engine.fwd(out, data);
  }
  data.swap(out);
}

std::size_t NextPowerOfTwo(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> FftConvolve(std::span<const double> a,
                                std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = std::max<std::size_t>(2, NextPowerOfTwo(out_len));
  RealFft fft(n);
  std::vector<double> pa(n, 0.0), pb(n, 0.0);
  std::copy(a.begin(), a.end(), pa.begin());
  std::copy(b.begin(), b.end(), pb.begin());
  std::vector<std::complex<double>> fa, fb;
  fft.Forward(pa, fa);
  fft.Forward(pb, fb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  std::vector<double> y;
  fft.Inverse(fa, y);
  y.resize(out_len);
  return y;
}

}  // namespace mcse
