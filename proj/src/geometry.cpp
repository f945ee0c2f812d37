#include "mcse/geometry.hpp"

#include <cmath>

#include "mcse/error.hpp"

namespace mcse {

double Distance(const Point3& a, const Point3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

void ArrayGeometry::Validate() const {
  Require(!mics.empty(), ErrorCode::kInvalidArgument, "array has no microphones");
  for (std::size_t i = 0; i < mics.size(); ++i) {
    for (std::size_t j = i + 1; j < mics.size(); ++j) {
      Require(Distance(mics[i], mics[j]) > 0.0, ErrorCode::kInvalidArgument,
              "array microphone positions must be distinct");
    }
  }
}

ArrayGeometry ArrayGeometry::Placed(const Point3& center) const {
  ArrayGeometry out = *this;
  for (Point3& p : out.mics) {
    for (int k = 0; k < 3; ++k) p[k] += center[k];
  }
  return out;
}

Point3 ArrayGeometry::Centroid() const {
  Point3 c{0.0, 0.0, 0.0};
  for (const Point3& p : mics) {
    for (int k = 0; k < 3; ++k) c[k] += p[k];
  }
  for (double& v : c) v /= static_cast<double>(mics.size());
  return c;
}

ArrayGeometry SymmetricLinearArray15() {
  static constexpr double kSpacingCm[] = {7, 6, 5, 4, 3, 2, 1,
                                          1, 2, 3, 4, 5, 6, 7};
  ArrayGeometry g;
  double x = 0.0;
  g.mics.push_back({0.0, 0.0, 0.0});
  for (double s : kSpacingCm) {
    x += s / 100.0;
    g.mics.push_back({x, 0.0, 0.0});
  }
  const double half = x / 2.0;
  for (Point3& p : g.mics) p[0] -= half;
  return g;
}

void MicPairList::Validate(std::size_t channels) const {
  for (const auto& [i, j] : pairs) {
    Require(i != j, ErrorCode::kInvalidArgument,
            "microphone pair must use two different channels");
    Require(i < channels && j < channels, ErrorCode::kOutOfRange,
            "microphone pair index out of range");
  }
}

MicPairList DefaultMicPairs15() {
  static constexpr std::size_t kOneBased[][2] = {
      {1, 15}, {2, 14}, {3, 13}, {1, 7}, {12, 4},
      {11, 5}, {12, 8}, {7, 10}, {8, 9}};
  MicPairList list;
  for (const auto& p : kOneBased) list.pairs.emplace_back(p[0] - 1, p[1] - 1);
  return list;
}

std::vector<double> PlaneWaveDelays(const ArrayGeometry& geometry, double doa,
                                    double speed_of_sound) {
  const double ux = std::cos(doa), uy = std::sin(doa);
  std::vector<double> delays(geometry.NumMics());
  for (std::size_t m = 0; m < geometry.NumMics(); ++m) {
    const Point3& p = geometry.mics[m];
    delays[m] = -(p[0] * ux + p[1] * uy) / speed_of_sound;
  }
  return delays;
}

}  // namespace mcse
