#include "mcse/room.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "mcse/error.hpp"

namespace mcse {

namespace {

constexpr int kSincTaps = 8;
constexpr int kSincHalf = 3;  // taps start at floor(delay) - 3
constexpr int kLutSteps = 2048;

using TapRow = std::array<double, kSincTaps>;

double WindowedSinc(double x) {
  if (std::abs(x) >= 4.0) return 0.0;
  const double window = 0.5 * (1.0 + std::cos(std::numbers::pi * x / 4.0));
  if (x == 0.0) return window;
  if (x == std::round(x)) return 0.0;
  const double px = std::numbers::pi * x;
  return window * std::sin(px) / px;
}

// Taps for fractional parts frac = i / kLutSteps, interpolated linearly.
const std::vector<TapRow>& SincTable() {
  static const std::vector<TapRow> table = [] {
    std::vector<TapRow> t(kLutSteps + 1);
    for (int i = 0; i <= kLutSteps; ++i) {
      const double frac = static_cast<double>(i) / kLutSteps;
      for (int k = 0; k < kSincTaps; ++k) {
        t[i][k] = WindowedSinc(static_cast<double>(k - kSincHalf) - frac);
      }
    }
    return t;
  }();
  return table;
}

double SurfaceArea(const RoomDims& r) {
  return 2.0 * (r[0] * r[1] + r[0] * r[2] + r[1] * r[2]);
}

void CheckRoom(const RoomDims& room) {
  for (double d : room) {
    Require(std::isfinite(d) && d > 0.0, ErrorCode::kInvalidArgument,
            "room dimensions must be positive");
  }
}

// `taps` carries kSincTaps guard samples on both sides; the caller drops
// images whose support would leave the buffer.
void AddImage(double* taps, double delay, double amplitude) {
  const double base = std::floor(delay);
  const double pos = (delay - base) * kLutSteps;
  const auto idx = static_cast<int>(pos);
  const double w = pos - idx;
  const auto& table = SincTable();
  const TapRow& a = table[static_cast<std::size_t>(idx)];
  const TapRow& b = table[static_cast<std::size_t>(std::min(idx + 1, kLutSteps))];
  double* out = taps + kSincTaps + static_cast<std::ptrdiff_t>(base) - kSincHalf;
  for (int k = 0; k < kSincTaps; ++k) out[k] += amplitude * ((1.0 - w) * a[k] + w * b[k]);
}

// Direction-averaged image-model decay. Along unit direction u an image at
// distance d has undergone about d g(u) reflections, g = sum_k |u_k| / L_k,
// so the energy arriving at time t is exp(-kappa g t) with
// kappa = -2 c ln(beta), and the Schroeder curve is
//   EDC(t) ~ mean_u exp(-kappa g t) / g.
// Returns s35 - s5 for the normalized time s = kappa t at which EDC falls
// to -5 and -35 dB.
double DecaySpan(const RoomDims& room) {
  constexpr int kGrid = 64;
  std::vector<double> g;
  g.reserve(kGrid * kGrid);
  for (int i = 0; i < kGrid; ++i) {
    const double cz = (i + 0.5) / kGrid;  // uniform in cos(theta) is uniform area
    const double sz = std::sqrt(1.0 - cz * cz);
    for (int j = 0; j < kGrid; ++j) {
      const double phi = (j + 0.5) / kGrid * std::numbers::pi / 2.0;
      g.push_back(sz * std::cos(phi) / room[0] + sz * std::sin(phi) / room[1] +
                  cz / room[2]);
    }
  }
  auto edc = [&](double s) {
    double num = 0.0, den = 0.0;
    for (double gi : g) {
      num += std::exp(-s * gi) / gi;
      den += 1.0 / gi;
    }
    return num / den;
  };
  auto level_time = [&](double db) {
    const double target = std::pow(10.0, db / 10.0);
    double lo = 0.0, hi = 1.0;
    while (edc(hi) > target) hi *= 2.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (edc(mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  return level_time(-35.0) - level_time(-5.0);
}

void AllenBerkleyHighPass(std::vector<double>& x, int sample_rate) {
  const double w = 2.0 * std::numbers::pi * 100.0 / sample_rate;
  const double r1 = std::exp(-w);
  const double b1 = 2.0 * r1 * std::cos(w);
  const double b2 = -r1 * r1;
  const double a1 = -(1.0 + r1);
  double y0 = 0.0, y1 = 0.0, y2 = 0.0;
  for (double& v : x) {
    y2 = y1;
    y1 = y0;
    y0 = b1 * y1 + b2 * y2 + v;
    v = y0 + a1 * y1 + r1 * y2;
  }
}

}  // namespace

double AbsorptionFromT60(const RoomDims& room, double t60, AbsorptionModel model,
                         double speed_of_sound) {
  CheckRoom(room);
  Require(t60 > 0.0 && std::isfinite(t60), ErrorCode::kInvalidArgument,
          "T60 must be positive");
  double alpha = 0.0;
  if (model == AbsorptionModel::kImageDecay) {
    // 30 dB of decay takes half of T60.
    const double kappa = 2.0 * DecaySpan(room) / t60;
    alpha = 1.0 - std::exp(-kappa / speed_of_sound);  // 1 - beta^2
  } else {
    const double volume = room[0] * room[1] * room[2];
    const double k = 24.0 * std::numbers::ln10 / speed_of_sound;
    const double x = k * volume / (SurfaceArea(room) * t60);
    alpha = model == AbsorptionModel::kSabine ? x : 1.0 - std::exp(-x);
  }
  Require(alpha > 0.0 && alpha < 1.0, ErrorCode::kOutOfRange,
          "T60 too short for this room: absorption outside (0, 1)");
  return alpha;
}

bool InsideRoom(const RoomDims& room, const Point3& p) {
  for (int k = 0; k < 3; ++k) {
    if (!(p[k] > 0.0 && p[k] < room[k])) return false;
  }
  return true;
}

void Rir::Validate() const {
  Require(!taps.empty(), ErrorCode::kInvalidArgument, "RIR has no channels");
  Require(direct_index.size() == taps.size() && split_index.size() == taps.size(),
          ErrorCode::kDimensionMismatch, "RIR index vectors do not match channels");
  for (std::size_t r = 0; r < taps.size(); ++r) {
    Require(taps[r].size() == Length(), ErrorCode::kDimensionMismatch,
            "RIR channels differ in length");
    Require(direct_index[r] < split_index[r] && split_index[r] < taps[r].size(),
            ErrorCode::kInvalidArgument, "RIR needs direct < split < length");
    for (double v : taps[r]) {
      Require(std::isfinite(v), ErrorCode::kNumeric, "RIR has non-finite taps");
    }
  }
}

MultiChannelWave Rir::AsWave() const { return MultiChannelWave::FromChannels(taps, sample_rate); }

Rir ImageMethodRir(const RoomDims& room, double t60, const Point3& source,
                   const ArrayGeometry& mics, const RirOptions& opt) {
  const double alpha = AbsorptionFromT60(room, t60, opt.model, opt.speed_of_sound);
  const auto length = static_cast<std::size_t>(std::ceil(t60 * opt.sample_rate));
  return ImageMethodRirFromAbsorption(room, alpha, length, source, mics, opt);
}

Rir ImageMethodRirFromAbsorption(const RoomDims& room, double absorption,
                                 std::size_t length, const Point3& source,
                                 const ArrayGeometry& mics, const RirOptions& opt) {
  CheckRoom(room);
  Require(absorption > 0.0 && absorption <= 1.0, ErrorCode::kOutOfRange,
          "absorption must lie in (0, 1]");
  Require(opt.sample_rate > 0 && opt.speed_of_sound > 0.0 && opt.early_ms > 0.0,
          ErrorCode::kInvalidArgument, "invalid RIR options");
  Require(InsideRoom(room, source), ErrorCode::kOutOfRange,
          "source position outside the room");
  mics.Validate();
  for (const Point3& m : mics.mics) {
    Require(InsideRoom(room, m), ErrorCode::kOutOfRange,
            "microphone position outside the room");
  }

  const double fs = opt.sample_rate;
  const double samples_per_meter = fs / opt.speed_of_sound;
  const auto early = static_cast<std::size_t>(std::lround(opt.early_ms * fs / 1000.0));
  const std::size_t channels = mics.NumMics();

  Rir rir;
  rir.sample_rate = opt.sample_rate;
  rir.direct_index.resize(channels);
  rir.split_index.resize(channels);
  std::size_t needed = length;
  for (std::size_t r = 0; r < channels; ++r) {
    const double delay = Distance(source, mics.mics[r]) * samples_per_meter;
    rir.direct_index[r] = static_cast<std::size_t>(std::lround(delay));
    rir.split_index[r] = rir.direct_index[r] + early;
    needed = std::max({needed, rir.split_index[r] + 1,
                       static_cast<std::size_t>(delay) + kSincTaps});
  }
  length = needed;
  std::vector<std::vector<double>> padded(
      channels, std::vector<double>(length + 2 * kSincTaps, 0.0));

  const double beta = std::sqrt(1.0 - absorption);
  const Point3 center = mics.Centroid();
  double array_radius = 0.0;
  for (const Point3& m : mics.mics) array_radius = std::max(array_radius, Distance(m, center));
  const double reach = static_cast<double>(length + kSincHalf) / samples_per_meter + array_radius;

  // Image coordinate along one axis: (1 - 2q) s + 2 m L, with |m - q| + |m|
  // wall reflections.
  struct AxisImage {
    double coord;
    int order;
  };
  auto axis_images = [&](int axis, double radius) {
    std::vector<AxisImage> out;
    const double len = room[axis];
    const double s = source[axis];
    for (int q = 0; q <= 1; ++q) {
      const double base = q == 0 ? s : -s;
      const auto lo = static_cast<long>(std::floor((center[axis] - radius - base) / (2.0 * len)));
      const auto hi = static_cast<long>(std::ceil((center[axis] + radius - base) / (2.0 * len)));
      for (long m = lo; m <= hi; ++m) {
        const double c = base + 2.0 * static_cast<double>(m) * len;
        if (std::abs(c - center[axis]) > radius) continue;
        out.push_back({c, static_cast<int>(std::labs(m - q) + std::labs(m))});
      }
    }
    return out;
  };

  std::vector<double> gains;
  auto gain_for = [&](int order) {
    while (static_cast<int>(gains.size()) <= order) {
      gains.push_back(gains.empty() ? 1.0 : gains.back() * beta);
    }
    return gains[static_cast<std::size_t>(order)];
  };

  const double max_delay = static_cast<double>(length + kSincHalf);
  for (const AxisImage& ix : axis_images(0, reach)) {
    const double dx0 = ix.coord - center[0];
    const double ry = std::sqrt(std::max(0.0, reach * reach - dx0 * dx0));
    for (const AxisImage& iy : axis_images(1, ry)) {
      const double dy0 = iy.coord - center[1];
      const double rz = std::sqrt(std::max(0.0, reach * reach - dx0 * dx0 - dy0 * dy0));
      for (const AxisImage& iz : axis_images(2, rz)) {
        const int order = ix.order + iy.order + iz.order;
        if (opt.max_order >= 0 && order > opt.max_order) continue;
        const double g = gain_for(order);
        if (g == 0.0) continue;
        for (std::size_t r = 0; r < channels; ++r) {
          const Point3& m = mics.mics[r];
          const double dx = ix.coord - m[0], dy = iy.coord - m[1], dz = iz.coord - m[2];
          const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
          const double delay = dist * samples_per_meter;
          if (delay >= max_delay) continue;
          AddImage(padded[r].data(), delay, g / dist);
        }
      }
    }
  }
  rir.taps.resize(channels);
  for (std::size_t r = 0; r < channels; ++r) {
    const auto first = padded[r].begin() + kSincTaps;
    rir.taps[r].assign(first, first + static_cast<std::ptrdiff_t>(length));
  }
  if (opt.high_pass) {
    for (auto& ch : rir.taps) AllenBerkleyHighPass(ch, opt.sample_rate);
  }
  return rir;
}

std::vector<double> SchroederDecayDb(std::span<const double> rir) {
  std::vector<double> energy(rir.size());
  double acc = 0.0;
  for (std::size_t i = rir.size(); i-- > 0;) {
    acc += rir[i] * rir[i];
    energy[i] = acc;
  }
  Require(acc > 0.0, ErrorCode::kDegenerate, "Schroeder decay of a silent RIR");
  std::vector<double> db(rir.size());
  for (std::size_t i = 0; i < rir.size(); ++i) {
    db[i] = energy[i] > 0.0 ? 10.0 * std::log10(energy[i] / acc)
                            : -std::numeric_limits<double>::infinity();
  }
  return db;
}

double MeasureT60(std::span<const double> rir, int sample_rate, double hi_db,
                  double lo_db) {
  Require(sample_rate > 0 && hi_db > lo_db, ErrorCode::kInvalidArgument,
          "invalid T60 fit range");
  const std::vector<double> db = SchroederDecayDb(rir);
  double n = 0.0, st = 0.0, sd = 0.0, stt = 0.0, std_ = 0.0;
  bool reached = false;
  for (std::size_t i = 0; i < db.size(); ++i) {
    if (db[i] > hi_db) continue;
    if (db[i] < lo_db) {
      reached = true;
      break;
    }
    const double t = static_cast<double>(i) / sample_rate;
    n += 1.0;
    st += t;
    sd += db[i];
    stt += t * t;
    std_ += t * db[i];
  }
  Require(reached && n >= 2.0, ErrorCode::kNumeric,
          "decay curve does not span the fit range");
  const double slope = (n * std_ - st * sd) / (n * stt - st * st);
  Require(slope < 0.0, ErrorCode::kNumeric, "decay curve is not decreasing");
  return -60.0 / slope;
}

}  // namespace mcse
