#include <cmath>

#include "doctest.h"
#include "mcse/error.hpp"
#include "mcse/fft.hpp"
#include "mcse/mvdr.hpp"
#include "mcse/room.hpp"
#include "unit/fixtures.hpp"
#include "unit/test_util.hpp"

using namespace mcse;
using namespace mcse::testing;

namespace {

NarrowbandMatrixSet Single(const CMatrix& m) {
  NarrowbandMatrixSet s(1, static_cast<std::size_t>(m.rows()));
  s.matrices[0] = m;
  return s;
}

}  // namespace

TEST_SUITE("mvdr") {

TEST_CASE("identity covariances give half the reference column") {
  const auto w = MvdrWeights(Single(CMatrix::Identity(2, 2)), Single(CMatrix::Identity(2, 2)),
                             {0}, 0.0);
  CHECK(std::abs(w.values[0](0) - 0.5) < 1e-15);
  CHECK(std::abs(w.values[0](1)) < 1e-15);
  CHECK(w.NumDegenerate() == 0);
}

TEST_CASE("rank-one closed form") {
  CVector g(2);
  g << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const auto w = MvdrWeights(Single(g * g.adjoint()), Single(CMatrix::Identity(2, 2)), {0}, 0.0);
  // w = g g_r^* / ||g||^2, so w^H g reproduces the reference component.
  const CVector want = g * std::conj(g(0)) / g.squaredNorm();
  CHECK((w.values[0] - want).norm() < 1e-14);
  CHECK(std::abs(w.values[0].dot(g) - g(0)) < 1e-10);
}

TEST_CASE("distortionless for rank-one target and any noise") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    CVector g = RandomVector(rng, 6);
    g /= g(1);
    const CMatrix phi_n = RandomPsd(rng, 6, 8);
    const auto w = MvdrWeights(Single(3.7 * g * g.adjoint()), Single(phi_n), {1});
    CHECK(std::abs(w.values[0].dot(g) - 1.0) < 1e-8);
  }
}

TEST_CASE("weights are invariant to covariance scaling") {
  Rng rng(2);
  const CMatrix phi_x = RandomPsd(rng, 4, 2);
  const CMatrix phi_n = RandomPsd(rng, 4, 6);
  const auto a = MvdrWeights(Single(phi_x), Single(phi_n), {0});
  const auto b = MvdrWeights(Single(250.0 * phi_x), Single(0.01 * phi_n), {0});
  CHECK((a.values[0] - b.values[0]).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("degenerate bins pass the reference through") {
  Rng rng(3);
  NarrowbandMatrixSet x(2, 3), n(2, 3);
  x.matrices[0] = RandomPsd(rng, 3, 1);
  n.matrices[0] = RandomPsd(rng, 3, 3);
  x.matrices[1] = CMatrix::Zero(3, 3);
  n.matrices[1] = CMatrix::Identity(3, 3);
  auto w = MvdrWeights(x, n, {2});
  CHECK_FALSE(w.degenerate[0]);
  CHECK(w.degenerate[1]);
  CHECK((w.values[1] - CVector::Unit(3, 2)).norm() == 0.0);
  x.matrices[1] = RandomPsd(rng, 3, 1);
  n.degenerate[1] = 1;
  w = MvdrWeights(x, n, {2});
  CHECK(w.degenerate[1]);
  CHECK(w.NumDegenerate() == 1);
  CHECK_THROWS_AS(MvdrWeights(x, n, {3}), Error);
}

TEST_CASE("apply filter") {
  Rng rng(4);
  const auto spec = RandomSpec(rng, 3, 5, 4);
  BeamformerWeights w;
  w.degenerate.assign(4, 0);
  for (int f = 0; f < 4; ++f) w.values.push_back(CVector::Unit(3, 1));
  auto out = ApplyFilter(w, spec);
  REQUIRE(out.NumChannels() == 1);
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t f = 0; f < 4; ++f) CHECK(out(0, t, f) == spec(1, t, f));
  for (auto& v : w.values) v.setZero();
  out = ApplyFilter(w, spec);
  for (const auto& v : out.Values()) CHECK(v == Complex(0.0, 0.0));
  for (auto& v : w.values) v = RandomVector(rng, 3);
  out = ApplyFilter(w, spec);
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t f = 0; f < 4; ++f) {
      Complex s = 0.0;
      for (int m = 0; m < 3; ++m) s += std::conj(w.values[f](m)) * spec(m, t, f);
      CHECK(std::abs(out(0, t, f) - s) < 1e-12);
    }
  w.values[2] = RandomVector(rng, 2);
  CHECK_THROWS_AS(ApplyFilter(w, spec), Error);
}

TEST_CASE("identical masks stay finite") {
  Rng rng(5);
  const auto mix = RandomSpec(rng, 4, 50, 9);
  const auto m = RandomMask(rng, 50, 9);
  const auto res = SeparateMvdr(mix, m, m, {0});
  for (const auto& v : res.output.Values()) CHECK(std::isfinite(std::abs(v)));
}

TEST_CASE("anechoic single source is recovered") {
  RoomScene scene = FixtureScene(0.3);
  const auto mics = scene.PlacedArray();
  RirOptions opt;
  opt.high_pass = false;
  const auto rir = ImageMethodRirFromAbsorption(scene.room, 1.0, 4096, scene.target, mics, opt);
  const std::size_t n = 32000;
  const auto src = SpeechLikeSource(3, n, kDefaultSampleRate);
  MultiChannelWave image(15, n), noisy(15, n);
  Rng rng(6);
  for (std::size_t r = 0; r < 15; ++r) {
    const auto y = FftConvolve(src, rir.taps[r]);
    for (std::size_t i = 0; i < n; ++i) {
      image(r, i) = y[i];
      noisy(r, i) = y[i] + 1e-3 * rng.Normal();
    }
  }
  const auto ref = image.SelectChannel(0);
  const auto clean_spec = Stft(image);
  // Noiseless: mask_n is empty and every bin falls back to the reference.
  const auto ones = ComplexMask::Constant(clean_spec.NumFrames(), clean_spec.NumBins(), 1.0);
  const auto zeros = ComplexMask(clean_spec.NumFrames(), clean_spec.NumBins());
  CHECK(SisnrDb(SeparateMvdr(clean_spec, ones, zeros, {0}).output, ref) >= 40.0);

  // White sensor noise with covariances taken from the separate components.
  const auto mix = Stft(noisy);
  auto noise_spec = mix;
  for (std::size_t i = 0; i < mix.Values().size(); ++i)
    noise_spec.Values()[i] -= clean_spec.Values()[i];
  const auto w = MvdrWeights(MaskedPsd(clean_spec, ones), MaskedPsd(noise_spec, ones), {0});
  const double raw = Sisnr(noisy.Channel(0), ref.Channel(0));
  const double out = SisnrDb(ApplyFilter(w, mix), ref);
  MESSAGE("raw " << raw << " dB, mvdr " << out << " dB");
  CHECK(out >= raw + 8.0);
}

}
