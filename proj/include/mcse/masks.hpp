#pragma once

#include <complex>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "mcse/stft.hpp"

namespace mcse {

inline constexpr double kMaskClip = 10.0;
inline constexpr double kMixtureGuard = 1e-8;

// T x F complex time-frequency mask, shared by all channels it is applied to.
class ComplexMask {
 public:
  ComplexMask() = default;
  ComplexMask(std::size_t frames, std::size_t bins,
              Complex fill = Complex(0.0, 0.0));

  static ComplexMask Constant(std::size_t frames, std::size_t bins, Complex v) {
    return ComplexMask(frames, bins, v);
  }

  std::size_t NumFrames() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t NumBins() const { return static_cast<std::size_t>(values_.cols()); }

  Complex& operator()(std::size_t t, std::size_t f) {
    return values_(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(f));
  }
  Complex operator()(std::size_t t, std::size_t f) const {
    return values_(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(f));
  }

  const Eigen::MatrixXcd& Values() const { return values_; }
  Eigen::MatrixXcd& Values() { return values_; }

  bool Matches(const Spectrogram& spec) const {
    return NumFrames() == spec.NumFrames() && NumBins() == spec.NumBins();
  }
  void RequireMatches(const Spectrogram& spec, const char* what) const;

 private:
  Eigen::MatrixXcd values_;
};

// M = target / mixture on one channel, magnitude clipped to `clip`, zero where
// |mixture| < guard. A single-channel target is paired with `channel` of the
// mixture.
ComplexMask OracleComplexMask(const Spectrogram& target,
                              const Spectrogram& mixture, std::size_t channel,
                              double clip = kMaskClip,
                              double guard = kMixtureGuard);

// Binary mask file: "CFMK", u32 T, u32 F (little endian), then T*F
// interleaved float32 (real, imag), row-major by frame.
void SaveMask(const std::string& path, const ComplexMask& mask);
ComplexMask LoadMask(const std::string& path);
// As above, and the stored dimensions must equal frames x bins.
ComplexMask LoadMask(const std::string& path, std::size_t frames,
                     std::size_t bins);

}  // namespace mcse
