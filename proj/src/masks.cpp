#include "mcse/masks.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "mcse/error.hpp"

namespace mcse {

ComplexMask::ComplexMask(std::size_t frames, std::size_t bins, Complex fill)
    : values_(Eigen::MatrixXcd::Constant(static_cast<Eigen::Index>(frames),
                                         static_cast<Eigen::Index>(bins), fill)) {}

void ComplexMask::RequireMatches(const Spectrogram& spec, const char* what) const {
  Require(Matches(spec), ErrorCode::kDimensionMismatch,
          std::string(what) + ": mask is " + std::to_string(NumFrames()) + "x" +
              std::to_string(NumBins()) + " but spectrogram is " +
              std::to_string(spec.NumFrames()) + "x" +
              std::to_string(spec.NumBins()));
}

ComplexMask OracleComplexMask(const Spectrogram& target,
                              const Spectrogram& mixture, std::size_t channel,
                              double clip, double guard) {
  Require(target.SameFrameGrid(mixture), ErrorCode::kDimensionMismatch,
          "oracle mask: target and mixture grids differ");
  Require(channel < mixture.NumChannels(), ErrorCode::kOutOfRange,
          "oracle mask: channel out of range");
  const std::size_t target_channel = target.NumChannels() == 1 ? 0 : channel;
  Require(target_channel < target.NumChannels(), ErrorCode::kOutOfRange,
          "oracle mask: target channel out of range");

  ComplexMask mask(mixture.NumFrames(), mixture.NumBins());
  for (std::size_t t = 0; t < mixture.NumFrames(); ++t) {
    for (std::size_t f = 0; f < mixture.NumBins(); ++f) {
      const Complex y = mixture(channel, t, f);
      if (std::abs(y) < guard) continue;
      Complex m = target(target_channel, t, f) / y;
      const double mag = std::abs(m);
      if (mag > clip) m *= clip / mag;
      mask(t, f) = m;
    }
  }
  return mask;
}

namespace {

void PutU32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}

std::uint32_t GetU32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void PutF32(std::vector<unsigned char>& out, double v) {
  const float f = static_cast<float>(v);
  std::uint32_t u;
  std::memcpy(&u, &f, sizeof(u));
  PutU32(out, u);
}

float GetF32(const unsigned char* p) {
  const std::uint32_t u = GetU32(p);
  float f;
  std::memcpy(&f, &u, sizeof(f));
  return f;
}

}  // namespace

void SaveMask(const std::string& path, const ComplexMask& mask) {
  std::vector<unsigned char> out;
  out.reserve(12 + 8 * mask.NumFrames() * mask.NumBins());
  out.insert(out.end(), {'C', 'F', 'M', 'K'});
  PutU32(out, static_cast<std::uint32_t>(mask.NumFrames()));
  PutU32(out, static_cast<std::uint32_t>(mask.NumBins()));
  for (std::size_t t = 0; t < mask.NumFrames(); ++t) {
    for (std::size_t f = 0; f < mask.NumBins(); ++f) {
      PutF32(out, mask(t, f).real());
      PutF32(out, mask(t, f).imag());
    }
  }
  std::ofstream os(path, std::ios::binary);
  Require(static_cast<bool>(os), ErrorCode::kIo, "cannot write mask " + path);
  os.write(reinterpret_cast<const char*>(out.data()),
           static_cast<std::streamsize>(out.size()));
  Require(static_cast<bool>(os), ErrorCode::kIo, "mask write failed: " + path);
}

ComplexMask LoadMask(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(static_cast<bool>(in), ErrorCode::kIo, "cannot open mask " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  Require(bytes.size() >= 12 && std::memcmp(bytes.data(), "CFMK", 4) == 0,
          ErrorCode::kIo, path + ": not a CFMK mask file");
  const std::uint64_t frames = GetU32(bytes.data() + 4);
  const std::uint64_t bins = GetU32(bytes.data() + 8);
  const std::uint64_t expected = 12 + 8 * frames * bins;
  Require(bytes.size() == expected, ErrorCode::kDimensionMismatch,
          path + ": payload holds " + std::to_string(bytes.size() - 12) +
              " bytes but header declares " + std::to_string(frames) + "x" +
              std::to_string(bins));

  ComplexMask mask(frames, bins);
  const unsigned char* p = bytes.data() + 12;
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t f = 0; f < bins; ++f, p += 8) {
      const double re = GetF32(p);
      const double im = GetF32(p + 4);
      Require(std::isfinite(re) && std::isfinite(im), ErrorCode::kNumeric,
              path + ": non-finite mask value");
      mask(t, f) = Complex(re, im);
    }
  }
  return mask;
}

ComplexMask LoadMask(const std::string& path, std::size_t frames,
                     std::size_t bins) {
  ComplexMask mask = LoadMask(path);
  Require(mask.NumFrames() == frames && mask.NumBins() == bins,
          ErrorCode::kDimensionMismatch,
          path + ": mask is " + std::to_string(mask.NumFrames()) + "x" +
              std::to_string(mask.NumBins()) + ", expected " +
              std::to_string(frames) + "x" + std::to_string(bins));
  return mask;
}

}  // namespace mcse
