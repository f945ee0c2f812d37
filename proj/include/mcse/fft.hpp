#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace mcse {

// Real-input FFT of a fixed size. Not shareable across threads; create one
// per worker.
class RealFft {
 public:
  explicit RealFft(std::size_t size);
  ~RealFft();
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;

  std::size_t Size() const { return size_; }
  std::size_t NumBins() const { return size_ / 2 + 1; }

  // in.size() == Size(); out receives Size()/2 + 1 bins, unnormalised.
  void Forward(std::span<const double> in,
               std::vector<std::complex<double>>& out);
  // in holds Size()/2 + 1 bins; out receives Size() samples scaled by 1/Size().
  void Inverse(std::span<const std::complex<double>> in,
               std::vector<double>& out);

 private:
  struct Impl;
  std::size_t size_;
  Impl* impl_;
};

// Full complex FFT, used for analytic signals.
void ComplexFft(std::vector<std::complex<double>>& data, bool inverse);

std::size_t NextPowerOfTwo(std::size_t n);

// Linear convolution via FFT; result length a.size() + b.size() - 1.
std::vector<double> FftConvolve(std::span<const double> a,
                                std::span<const double> b);

}  // namespace mcse
