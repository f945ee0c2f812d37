#include "mcse/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "mcse/error.hpp"
#include "mcse/fft.hpp"
#include "mcse/random.hpp"

namespace mcse {

namespace {

using nlohmann::json;

double Azimuth(const Point3& center, const Point3& p) {
  return std::atan2(p[1] - center[1], p[0] - center[0]);
}

Point3 UniformPoint(Rng& rng, const RoomDims& room, double margin) {
  return {rng.Uniform(margin, room[0] - margin), rng.Uniform(margin, room[1] - margin),
          rng.Uniform(margin, room[2] - margin)};
}

// Array and target placements tried before giving up on the drawn angle bin.
constexpr int kPlacementAttempts = 10;

Point3 SpeakerPoint(Rng& rng, const RoomDims& room, const SceneSampling& s) {
  const double z_hi = std::min(s.source_height_max, room[2] - s.wall_margin);
  return {rng.Uniform(s.wall_margin, room[0] - s.wall_margin),
          rng.Uniform(s.wall_margin, room[1] - s.wall_margin),
          rng.Uniform(s.source_height_min, z_hi)};
}

bool DistanceOk(const Point3& center, const Point3& p, const SceneSampling& s) {
  const double d = Distance(center, p);
  return d >= s.min_distance && d <= s.max_distance;
}

bool InsideMargins(const RoomDims& room, const Point3& p, const SceneSampling& s) {
  const double z_hi = std::min(s.source_height_max, room[2] - s.wall_margin);
  return p[0] >= s.wall_margin && p[0] <= room[0] - s.wall_margin &&
         p[1] >= s.wall_margin && p[1] <= room[1] - s.wall_margin &&
         p[2] >= s.source_height_min && p[2] <= z_hi;
}

// Uniform over the planar sector of the angle bin around the target azimuth,
// out to the maximum distance; the caller rejects points outside the room.
Point3 WedgePoint(Rng& rng, const RoomScene& scene, int bin, const SceneSampling& s) {
  const double lo = kAngleBinEdges[bin] * std::numbers::pi / 180.0;
  const double hi = kAngleBinEdges[bin + 1] * std::numbers::pi / 180.0;
  const double side = rng.Uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
  const double az = Azimuth(scene.array_center, scene.target) + side * rng.Uniform(lo, hi);
  const double r = s.max_distance * std::sqrt(rng.Uniform(0.0, 1.0));
  const double z_hi = std::min(s.source_height_max, scene.room[2] - s.wall_margin);
  return {scene.array_center[0] + r * std::cos(az), scene.array_center[1] + r * std::sin(az),
          rng.Uniform(s.source_height_min, z_hi)};
}

json PointJson(const Point3& p) { return json::array({p[0], p[1], p[2]}); }

Point3 PointFrom(const json& j) {
  Require(j.is_array() && j.size() == 3, ErrorCode::kInvalidArgument,
          "scene: expected a 3-element position");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

// Linear convolution of one source with every RIR channel, cut to `length`.
// The source spectrum is computed once.
std::vector<std::vector<double>> ConvolveChannels(
    std::span<const double> src, const std::vector<std::vector<double>>& rirs,
    std::size_t length) {
  std::size_t rir_len = 0;
  for (const auto& h : rirs) rir_len = std::max(rir_len, h.size());
  const std::size_t n = NextPowerOfTwo(std::max<std::size_t>(src.size() + rir_len, 2));
  RealFft fft(n);
  std::vector<double> buf(n, 0.0);
  std::copy(src.begin(), src.end(), buf.begin());
  std::vector<std::complex<double>> src_spec, h_spec;
  fft.Forward(buf, src_spec);
  std::vector<std::vector<double>> out;
  out.reserve(rirs.size());
  std::vector<double> y;
  for (const auto& h : rirs) {
    std::fill(buf.begin(), buf.end(), 0.0);
    std::copy(h.begin(), h.end(), buf.begin());
    fft.Forward(buf, h_spec);
    for (std::size_t k = 0; k < h_spec.size(); ++k) h_spec[k] *= src_spec[k];
    fft.Inverse(h_spec, y);
    y.resize(length);
    out.push_back(y);
  }
  return out;
}

void RequireMono(const MultiChannelWave& w, const char* what) {
  Require(w.NumChannels() == 1 && w.NumSamples() > 0, ErrorCode::kInvalidArgument,
          std::string(what) + " must be a non-empty mono wave");
  w.Validate();
}

}  // namespace

double AngleDifferenceDeg(const Point3& center, const Point3& a, const Point3& b) {
  double d = std::abs(Azimuth(center, a) - Azimuth(center, b)) * 180.0 / std::numbers::pi;
  d = std::fmod(d, 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

int AngleBinOf(double degrees) {
  for (int b = 0; b < kNumAngleBins - 1; ++b) {
    if (degrees < kAngleBinEdges[b + 1]) return b;
  }
  return kNumAngleBins - 1;
}

void RoomScene::Validate() const {
  for (double d : room) {
    Require(d > 0.0, ErrorCode::kInvalidArgument, "scene: room dimensions must be positive");
  }
  Require(t60 > 0.0, ErrorCode::kInvalidArgument, "scene: T60 must be positive");
  geometry.Validate();
  Require(reference_channel < geometry.NumMics(), ErrorCode::kOutOfRange,
          "scene: reference channel out of range");
  for (const Point3& m : PlacedArray().mics) {
    Require(InsideRoom(room, m), ErrorCode::kOutOfRange, "scene: microphone outside room");
  }
  for (const Point3* p : {&target, &interferer, &noise}) {
    Require(InsideRoom(room, *p), ErrorCode::kOutOfRange, "scene: source outside room");
  }
  for (const Point3* p : {&target, &interferer}) {
    const double d = Distance(array_center, *p);
    Require(d >= 1.0 - 1e-9 && d <= 5.0 + 1e-9, ErrorCode::kOutOfRange,
            "scene: speaker distance outside [1, 5] m");
  }
  Require(angle_bin >= 0 && angle_bin < kNumAngleBins, ErrorCode::kOutOfRange,
          "scene: angle bin out of range");
  Require(AngleBinOf(angle_difference_deg) == angle_bin, ErrorCode::kInvalidArgument,
          "scene: angle difference outside its bin");
}

RoomScene SampleScene(std::uint64_t seed, const std::vector<std::string>& speech,
                      const std::vector<std::string>& noise,
                      const SceneSampling& s) {
  Require(!speech.empty(), ErrorCode::kInvalidArgument, "scene: empty speech manifest");
  Require(!s.snr_set.empty() && !s.sir_set.empty(), ErrorCode::kInvalidArgument,
          "scene: empty SNR or SIR set");
  Require(s.rejection_budget > 0, ErrorCode::kInvalidArgument,
          "scene: rejection budget must be positive");
  Rng rng(seed);
  RoomScene scene;
  scene.seed = seed;
  scene.geometry = s.geometry;

  const std::size_t ti = rng.Index(speech.size());
  std::size_t ii = ti;
  if (speech.size() > 1) {
    ii = rng.Index(speech.size() - 1);
    if (ii >= ti) ++ii;
  }
  scene.target_source = speech[ti];
  scene.interferer_source = speech[ii];

  for (int k = 0; k < 3; ++k) scene.room[k] = rng.Uniform(s.room_min[k], s.room_max[k]);
  scene.t60 = rng.Uniform(s.t60_min, s.t60_max);
  scene.angle_bin = static_cast<int>(rng.Index(kNumAngleBins));
  bool placed = false;
  for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
    scene.array_center = UniformPoint(rng, scene.room, s.wall_margin);
    bool target_ok = false;
    for (int i = 0; i < s.rejection_budget && !target_ok; ++i) {
      scene.target = SpeakerPoint(rng, scene.room, s);
      target_ok = DistanceOk(scene.array_center, scene.target, s);
    }
    Require(target_ok, ErrorCode::kRejectionBudget, "scene: could not place the target speaker");
    for (int i = 0; i < s.rejection_budget && !placed; ++i) {
      scene.interferer = WedgePoint(rng, scene, scene.angle_bin, s);
      if (!InsideMargins(scene.room, scene.interferer, s) ||
          !DistanceOk(scene.array_center, scene.interferer, s)) {
        continue;
      }
      scene.angle_difference_deg =
          AngleDifferenceDeg(scene.array_center, scene.target, scene.interferer);
      placed = AngleBinOf(scene.angle_difference_deg) == scene.angle_bin;
    }
  }
  Require(placed, ErrorCode::kRejectionBudget,
          "scene: could not place the interferer in the drawn angle bin");

  scene.snr_db = s.snr_set[rng.Index(s.snr_set.size())];
  scene.sir_db = s.sir_set[rng.Index(s.sir_set.size())];
  scene.noise = UniformPoint(rng, scene.room, s.wall_margin);
  if (!noise.empty()) scene.noise_source = noise[rng.Index(noise.size())];
  return scene;
}

std::string SceneToJson(const RoomScene& sc) {
  json mics = json::array();
  for (const Point3& m : sc.geometry.mics) mics.push_back(PointJson(m));
  json j = {
      {"seed", sc.seed},
      {"room", PointJson(sc.room)},
      {"t60", sc.t60},
      {"array_center", PointJson(sc.array_center)},
      {"mics", mics},
      {"target", PointJson(sc.target)},
      {"interferer", PointJson(sc.interferer)},
      {"noise", PointJson(sc.noise)},
      {"snr_db", sc.snr_db},
      {"sir_db", sc.sir_db},
      {"angle_bin", sc.angle_bin},
      {"angle_difference_deg", sc.angle_difference_deg},
      {"target_source", sc.target_source},
      {"interferer_source", sc.interferer_source},
      {"noise_source", sc.noise_source},
      {"interferer_offset", sc.interferer_offset},
      {"reference_channel", sc.reference_channel},
  };
  return j.dump();
}

RoomScene SceneFromJson(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidArgument, std::string("scene: bad JSON: ") + e.what());
  }
  RoomScene sc;
  try {
    sc.seed = j.at("seed").get<std::uint64_t>();
    sc.room = PointFrom(j.at("room"));
    sc.t60 = j.at("t60").get<double>();
    sc.array_center = PointFrom(j.at("array_center"));
    for (const auto& m : j.at("mics")) sc.geometry.mics.push_back(PointFrom(m));
    sc.target = PointFrom(j.at("target"));
    sc.interferer = PointFrom(j.at("interferer"));
    sc.noise = PointFrom(j.at("noise"));
    sc.snr_db = j.at("snr_db").get<double>();
    sc.sir_db = j.at("sir_db").get<double>();
    sc.angle_bin = j.at("angle_bin").get<int>();
    sc.angle_difference_deg = j.at("angle_difference_deg").get<double>();
    sc.target_source = j.at("target_source").get<std::string>();
    sc.interferer_source = j.at("interferer_source").get<std::string>();
    sc.noise_source = j.value("noise_source", std::string());
    sc.interferer_offset = j.value("interferer_offset", std::size_t{0});
    sc.reference_channel = j.value("reference_channel", std::size_t{0});
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidArgument, std::string("scene: ") + e.what());
  }
  return sc;
}

double EnergyRatioDb(std::span<const double> num, std::span<const double> den) {
  return 10.0 * std::log10(Energy(num) / Energy(den));
}

SimulatedMixture SimulateMixture(const MultiChannelWave& target,
                                 const MultiChannelWave& interferer,
                                 const MultiChannelWave& noise, const RoomScene& scene,
                                 const MixtureOptions& opt) {
  scene.Validate();
  RequireMono(target, "target");
  RequireMono(interferer, "interferer");
  RequireMono(noise, "noise");
  const int fs = target.SampleRate();
  Require(interferer.SampleRate() == fs && noise.SampleRate() == fs,
          ErrorCode::kInvalidArgument, "simulate: sources differ in sample rate");
  Require(opt.interferer_scale >= 0.0, ErrorCode::kInvalidArgument,
          "simulate: interferer scale must be >= 0");

  const std::size_t n = target.NumSamples();
  const std::size_t ref = scene.reference_channel;
  std::vector<double> tgt(target.Channel(0).begin(), target.Channel(0).end());
  std::vector<double> itf(n, 0.0);
  for (std::size_t k = 0; k + scene.interferer_offset < n && k < interferer.NumSamples(); ++k) {
    itf[k + scene.interferer_offset] = interferer(0, k);
  }
  std::vector<double> nse(n);
  for (std::size_t k = 0; k < n; ++k) nse[k] = noise(0, k % noise.NumSamples());
  Require(Energy(tgt) > 0.0, ErrorCode::kDegenerate, "simulate: silent target");
  Require(Energy(itf) > 0.0, ErrorCode::kDegenerate, "simulate: silent interferer");
  Require(Energy(nse) > 0.0, ErrorCode::kDegenerate, "simulate: silent noise");

  RirOptions ro = opt.rir;
  ro.sample_rate = fs;
  const ArrayGeometry mics = scene.PlacedArray();
  const double alpha = AbsorptionFromT60(scene.room, scene.t60, ro.model, ro.speed_of_sound);
  const auto rir_len = static_cast<std::size_t>(std::ceil(scene.t60 * fs));
  const Rir rt = ImageMethodRirFromAbsorption(scene.room, alpha, rir_len, scene.target, mics, ro);
  const Rir ri = ImageMethodRirFromAbsorption(scene.room, alpha, rir_len, scene.interferer, mics, ro);
  const Rir rn = ImageMethodRirFromAbsorption(scene.room, alpha, rir_len, scene.noise, mics, ro);

  const auto t_img = ConvolveChannels(tgt, rt.taps, n);
  const auto i_img = ConvolveChannels(itf, ri.taps, n);
  const auto n_img = ConvolveChannels(nse, rn.taps, n);
  const std::vector<double> early_rir(rt.taps[ref].begin(),
                                      rt.taps[ref].begin() + static_cast<std::ptrdiff_t>(rt.split_index[ref]));
  const auto early = ConvolveChannels(tgt, {early_rir}, n);
  const std::vector<double> early_rir_i(ri.taps[ref].begin(),
                                        ri.taps[ref].begin() + static_cast<std::ptrdiff_t>(ri.split_index[ref]));
  const auto early_i = ConvolveChannels(itf, {early_rir_i}, n);

  const double et = Energy(t_img[ref]);
  const double ei = Energy(i_img[ref]);
  Require(et > 0.0 && ei > 0.0, ErrorCode::kDegenerate,
          "simulate: a reverberant source image is silent at the reference channel");
  SimulatedMixture out;
  out.interferer_gain =
      opt.interferer_scale * std::sqrt(et / (ei * std::pow(10.0, scene.sir_db / 10.0)));
  std::vector<double> speech(n);
  for (std::size_t k = 0; k < n; ++k) {
    speech[k] = t_img[ref][k] + out.interferer_gain * i_img[ref][k];
  }
  const double en = Energy(n_img[ref]);
  Require(en > 0.0, ErrorCode::kDegenerate, "simulate: noise image is silent");
  out.noise_gain = std::sqrt(Energy(speech) / (en * std::pow(10.0, scene.snr_db / 10.0)));

  const std::size_t channels = mics.NumMics();
  out.mixture = MultiChannelWave(channels, n, fs);
  for (std::size_t r = 0; r < channels; ++r) {
    for (std::size_t k = 0; k < n; ++k) {
      out.mixture(r, k) = t_img[r][k] + out.interferer_gain * i_img[r][k] +
                          out.noise_gain * n_img[r][k];
    }
  }
  std::vector<double> iscaled(n), nscaled(n);
  for (std::size_t k = 0; k < n; ++k) {
    iscaled[k] = out.interferer_gain * i_img[ref][k];
    nscaled[k] = out.noise_gain * n_img[ref][k];
  }
  out.target_reverb = MultiChannelWave::Mono(t_img[ref], fs);
  out.target_early = MultiChannelWave::Mono(early[0], fs);
  out.target_dry = MultiChannelWave::Mono(tgt, fs);
  out.interferer = MultiChannelWave::Mono(iscaled, fs);
  for (std::size_t k = 0; k < n; ++k) iscaled[k] -= out.interferer_gain * early_i[0][k];
  out.interferer_late = MultiChannelWave::Mono(iscaled, fs);
  out.noise = MultiChannelWave::Mono(nscaled, fs);
  return out;
}

}  // namespace mcse
