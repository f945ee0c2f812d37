#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

namespace mcse {

using Point3 = std::array<double, 3>;

inline constexpr double kSpeedOfSound = 343.0;  // m/s

double Distance(const Point3& a, const Point3& b);

// Microphone positions in meters. Positions are relative to the array center
// unless the geometry was produced by Placed().
struct ArrayGeometry {
  std::vector<Point3> mics;

  std::size_t NumMics() const { return mics.size(); }
  // Throws unless all positions are distinct.
  void Validate() const;
  // Translate every microphone by `center`.
  ArrayGeometry Placed(const Point3& center) const;
  Point3 Centroid() const;
};

// 15-microphone symmetric linear array along the x axis with spacings
// 7,6,5,4,3,2,1,1,2,3,4,5,6,7 cm, centered at the origin.
ArrayGeometry SymmetricLinearArray15();

// Ordered channel pairs (i, j), zero-based.
struct MicPairList {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  std::size_t Size() const { return pairs.size(); }
  // Throws on i == j or an index >= channels.
  void Validate(std::size_t channels) const;
};

// The nine pairs 1/15, 2/14, 3/13, 1/7, 12/4, 11/5, 12/8, 7/10, 8/9 of the
// 15-microphone array (converted to zero-based indices).
MicPairList DefaultMicPairs15();

// Far-field plane-wave arrival delay (seconds) of each microphone relative to
// the array origin, for a source at azimuth `doa` (radians, measured from the
// +x axis in the horizontal plane).
std::vector<double> PlaneWaveDelays(const ArrayGeometry& geometry, double doa,
                                    double speed_of_sound = kSpeedOfSound);

}  // namespace mcse
