#include <cmath>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "mcse/error.hpp"
#include "mcse/fft.hpp"
#include "mcse/metrics.hpp"
#include "mcse/room.hpp"
#include "mcse/synth.hpp"
#include "unit/fixtures.hpp"
#include "unit/test_util.hpp"

using namespace mcse;
using namespace mcse::testing;

namespace {

std::vector<double> Load(const std::string& name) {
  const auto w = ReadWav(std::string(MCSE_TEST_DATA) + "/stoi_" + name + ".wav", 16000);
  return {w.Channel(0).begin(), w.Channel(0).end()};
}

std::vector<double> Centered(std::vector<double> x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  for (double& v : x) v -= m;
  return x;
}

std::vector<double> Reverberate(const std::vector<double>& x, double t60) {
  const auto scene = FixtureScene(t60);
  const auto rir = ImageMethodRir(scene.room, t60, scene.target, scene.PlacedArray());
  auto y = FftConvolve(x, rir.taps[0]);
  y.resize(x.size());
  return y;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("sisnr examples") {
  Rng rng(1);
  auto s = Centered(SpeechLikeSource(1, 16000, 16000));
  CHECK(Sisnr(s, s) == kSisnrCapDb);
  std::vector<double> scaled(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) scaled[i] = -3.5 * s[i];
  CHECK(Sisnr(scaled, s) == kSisnrCapDb);

  std::vector<double> n(s.size());
  for (double& v : n) v = rng.Normal();
  n = Centered(n);
  double dot = 0.0, ss = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    dot += n[i] * s[i];
    ss += s[i] * s[i];
  }
  for (std::size_t i = 0; i < s.size(); ++i) n[i] -= dot / ss * s[i];
  for (double v : n) nn += v * v;
  std::vector<double> est(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) est[i] = s[i] + n[i] * std::sqrt(ss / nn);
  CHECK(std::abs(Sisnr(est, s)) < 1e-9);

  CHECK_THROWS_AS(Sisnr(std::vector<double>(10, 1.0), std::vector<double>(11, 1.0)), Error);
  CHECK_THROWS_AS(Sisnr(est, std::vector<double>(s.size(), 0.0)), Error);
}

TEST_CASE("sisnr is exactly scale invariant") {
  const auto s = SpeechLikeSource(2, 8000, 16000);
  auto e = SpeechLikeSource(3, 8000, 16000);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = 0.3 * e[i] + s[i];
  const double base = Sisnr(e, s);
  for (double a : {0.5, 2.0, 1024.0}) {
    std::vector<double> scaled(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) scaled[i] = a * e[i];
    CHECK(Sisnr(scaled, s) == base);
  }
}

TEST_CASE("spectral mse") {
  Rng rng(4);
  const auto a = RandomSpec(rng, 2, 7, 5);
  CHECK(SpectralMse(a, a) == 0.0);
  auto b = a;
  for (auto& v : b.Values()) v += std::polar(1.0, rng.Uniform(0.0, 6.28));
  CHECK(SpectralMse(b, a) == doctest::Approx(1.0).epsilon(1e-12));
  const auto c = RandomSpec(rng, 2, 7, 5);
  double sum = 0.0;
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t t = 0; t < 7; ++t)
      for (std::size_t f = 0; f < 5; ++f) sum += std::norm(c(r, t, f) - a(r, t, f));
  CHECK(SpectralMse(c, a) == doctest::Approx(sum / 70.0).epsilon(1e-14));
  CHECK_THROWS_AS(SpectralMse(a, RandomSpec(rng, 2, 6, 5)), Error);
}

TEST_CASE("stoi matches the reference implementation") {
  std::ifstream in(std::string(MCSE_TEST_DATA) + "/stoi_golden.json");
  REQUIRE(in.good());
  const auto golden = nlohmann::json::parse(in);
  const auto clean = Load("clean");
  for (const auto& [name, value] : golden.items()) {
    const double got = Stoi(Load(name), clean, 16000);
    MESSAGE(name << ": " << got << " vs " << value.get<double>());
    CHECK(std::abs(got - value.get<double>()) < 1e-6);
  }
}

TEST_CASE("stoi properties") {
  const auto clean = Load("clean");
  CHECK(std::abs(Stoi(clean, clean, 16000) - 1.0) < 1e-6);
  CHECK(Stoi(Load("babble"), clean, 16000) < 0.2);
  const auto noisy = Load("noisy");
  std::vector<double> loud(noisy.size());
  for (std::size_t i = 0; i < noisy.size(); ++i) loud[i] = 4.0 * noisy[i];
  CHECK(Stoi(loud, clean, 16000) == doctest::Approx(Stoi(noisy, clean, 16000)).epsilon(1e-9));
  std::vector<double> quiet(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) quiet[i] = 0.25 * clean[i];
  CHECK(Stoi(noisy, quiet, 16000) == doctest::Approx(Stoi(noisy, clean, 16000)).epsilon(1e-9));
  CHECK_THROWS_AS(Stoi(std::vector<double>(4000, 0.1), std::vector<double>(4000, 0.0), 16000), Error);
  CHECK_THROWS_AS(Stoi(std::vector<double>(clean.begin(), clean.begin() + 2000),
                       std::vector<double>(clean.begin(), clean.begin() + 2000), 16000),
                  Error);
}

TEST_CASE("srmr separates clean from reverberant speech") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto clean = SpeechLikeSource(seed, 48000, 16000);
    const double a = Srmr(clean, 16000);
    const double b = Srmr(Reverberate(clean, 0.6), 16000);
    MESSAGE("seed " << seed << ": clean " << a << ", reverberant " << b);
    CHECK(a > b);
  }
}

TEST_CASE("srmr invariances") {
  const auto x = SpeechLikeSource(4, 40000, 16000);
  const double base = Srmr(x, 16000);
  for (double g : {0.01, 3.0}) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = g * x[i];
    CHECK(std::abs(Srmr(y, 16000) - base) < 1e-8);
  }
  std::vector<double> padded(x);
  padded.resize(x.size() + x.size() / 10, 0.0);
  CHECK(std::abs(Srmr(padded, 16000) - base) / base < 0.05);
  CHECK_THROWS_AS(Srmr(std::vector<double>(16000, 0.0), 16000), Error);

  const auto detail = SrmrAnalyze(x, 16000);
  CHECK(detail.center_freqs.size() == 23);
  CHECK(detail.modulation_cfs.size() == 8);
  CHECK(detail.modulation_cfs.front() == doctest::Approx(4.0));
  CHECK(detail.modulation_cfs.back() == doctest::Approx(128.0));
  CHECK(detail.center_freqs.back() == doctest::Approx(125.0));
  CHECK(detail.center_freqs.front() > detail.center_freqs.back());
  CHECK(detail.ratio == doctest::Approx(base));
}

TEST_CASE("evaluation and report means") {
  const auto ref = SpeechLikeSource(5, 32000, 16000);
  auto est = ref;
  est.resize(31000);
  const auto u = Evaluate("u1", est, ref, 16000);
  CHECK(u.id == "u1");
  CHECK(u.sisnr_db == kSisnrCapDb);
  CHECK(u.stoi == doctest::Approx(1.0).epsilon(1e-6));
  MetricReport report;
  report.utterances = {u, {"u2", 10.0, 0.5, 0.5, 2.0}, {"u3", -5.0, std::nullopt, 0.2, 4.0}};
  const auto mean = report.Mean();
  CHECK(mean.sisnr_db == doctest::Approx((60.0 + 10.0 - 5.0) / 3.0));
  CHECK(mean.stoi == doctest::Approx((u.stoi + 0.7) / 3.0));
  CHECK(mean.srmr == doctest::Approx((u.srmr + 6.0) / 3.0));
  REQUIRE(mean.spectral_mse.has_value());
  CHECK(*mean.spectral_mse == doctest::Approx(0.5));
}

}
