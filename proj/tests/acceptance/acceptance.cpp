#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "CLI11.hpp"
#include "mcse/dereverb.hpp"
#include "mcse/error.hpp"
#include "mcse/fft.hpp"
#include "mcse/hermitian.hpp"
#include "mcse/metrics.hpp"
#include "mcse/mvdr.hpp"
#include "mcse/pipeline.hpp"
#include "mcse/random.hpp"
#include "mcse/room.hpp"
#include "mcse/scene.hpp"
#include "mcse/stft.hpp"
#include "mcse/synth.hpp"
#include "mcse/wpd.hpp"
#include "unit/fixtures.hpp"
#include "unit/oracles.hpp"
#include "unit/test_util.hpp"

using namespace mcse;
using namespace mcse::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string Fmt(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

std::vector<double> Vec(std::span<const double> x) { return {x.begin(), x.end()}; }

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// ---- 1 ----

Outcome StftRoundTrip() {
  Rng rng(101);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    MultiChannelWave x(15, 32000);
    for (std::size_t r = 0; r < 15; ++r)
      for (std::size_t i = 0; i < 32000; ++i) x(r, i) = rng.Uniform(-1.0, 1.0);
    const auto y = Istft(Stft(x));
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < x.Data().size(); ++i) {
      err += (y.Data()[i] - x.Data()[i]) * (y.Data()[i] - x.Data()[i]);
      ref += x.Data()[i] * x.Data()[i];
    }
    worst = std::max(worst, std::sqrt(err / ref));
  }
  return {worst < 1e-10, Fmt("max relative RMS error %.3e over 100 waves (tol 1e-10)", worst)};
}

// ---- 2 ----

Outcome MvdrDistortionless() {
  Rng rng(202);
  const std::size_t channels = 15, frames = 120, bins = 129;
  double worst = 0.0;
  for (int scene = 0; scene < 50; ++scene) {
    const std::size_t ref = static_cast<std::size_t>(scene) % channels;
    auto target = RandomSpec(rng, channels, frames, bins);
    auto noise = RandomSpec(rng, channels, frames, bins);
    std::vector<CVector> steering(bins);
    for (std::size_t f = 0; f < bins; ++f) {
      steering[f] = RandomVector(rng, channels);
      steering[f] /= steering[f](static_cast<Eigen::Index>(ref));
      const CMatrix mixing = RandomPsd(rng, channels, channels / 2 + 1);
      for (std::size_t t = 0; t < frames; ++t) {
        const Complex s = target(0, t, f);
        CVector n(static_cast<Eigen::Index>(channels));
        for (std::size_t r = 0; r < channels; ++r) n(static_cast<Eigen::Index>(r)) = noise(r, t, f);
        const CVector colored = mixing * n;
        for (std::size_t r = 0; r < channels; ++r) {
          target(r, t, f) = steering[f](static_cast<Eigen::Index>(r)) * s;
          noise(r, t, f) = colored(static_cast<Eigen::Index>(r));
        }
      }
    }
    const auto ones = ComplexMask::Constant(frames, bins, 1.0);
    const auto w = MvdrWeights(MaskedPsd(target, ones), MaskedPsd(noise, ones), {ref});
    for (std::size_t f = 0; f < bins; ++f)
      worst = std::max(worst, std::abs(w.values[f].dot(steering[f]) - 1.0));
  }
  return {worst < 1e-8, Fmt("max |w^H g - 1| = %.3e over 50 scenes x 129 bins (tol 1e-8)", worst)};
}

// ---- 3 ----

double BinCost(const Spectrogram& spec, const WpeFilter& w, std::size_t f, int taps, int delay) {
  const auto d = WpeDereverberate(spec, w, taps, delay);
  double cost = 0.0;
  for (std::size_t r = 0; r < spec.NumChannels(); ++r)
    for (std::size_t t = 0; t < spec.NumFrames(); ++t) cost += std::norm(d(r, t, f));
  return cost;
}

Outcome WpeOracle() {
  Rng rng(303);
  WpeConfig cfg;
  cfg.taps = 3;
  cfg.delay = 2;
  cfg.eps = 0.0;
  double worst = 0.0, worst_grad = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto spec = RandomSpec(rng, 2, 64, 8);
    const auto w = WpeFilterUpdate(spec, Eigen::MatrixXd::Ones(64, 8), cfg);
    for (std::size_t f = 0; f < 8; ++f) {
      const CMatrix want = LeastSquaresOracle(spec, f, cfg.taps, cfg.delay);
      worst = std::max(worst, (w.values[f] - want).norm() / want.norm());
      const double h = 1e-6;
      for (Eigen::Index i = 0; i < w.values[f].size(); ++i)
        for (const Complex dir : {Complex(1.0, 0.0), Complex(0.0, 1.0)}) {
          auto plus = w, minus = w;
          plus.values[f].data()[i] += h * dir;
          minus.values[f].data()[i] -= h * dir;
          const double g = (BinCost(spec, plus, f, cfg.taps, cfg.delay) -
                            BinCost(spec, minus, f, cfg.taps, cfg.delay)) / (2.0 * h);
          worst_grad = std::max(worst_grad, std::abs(g));
        }
    }
  }
  return {worst < 1e-8 && worst_grad < 1e-6,
          Fmt("max relative filter deviation %.3e (tol 1e-8), max |gradient| %.3e (tol 1e-6)", worst,
              worst_grad)};
}

// ---- 4 ----

Outcome WpdConstraintAndOptimality() {
  Rng rng(404);
  WpdConfig cfg;
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const std::size_t ref = static_cast<std::size_t>(k) % 6;
    const auto s = MakeRankOne(rng, 6, 60, 9, cfg.taps, cfg.delay, ref);
    const auto w = WpdWeights(s.spec, s.mask_x, s.mask_lambda, cfg, {ref});
    for (std::size_t f = 0; f < 9; ++f) worst = std::max(worst, std::abs(w.values[f].dot(s.padded) - 1.0));
  }

  // Tiny instance; every bin is an independent single-frequency problem.
  WpdConfig tiny;
  tiny.taps = 1;
  tiny.delay = 2;
  tiny.eps = 0.0;
  const auto s = MakeRankOne(rng, 2, 8, 2, tiny.taps, tiny.delay, 0);
  const auto cov = WpdCovariance(s.spec, s.mask_x, s.mask_lambda, tiny);
  const auto w = WpdWeights(s.spec, s.mask_x, s.mask_lambda, tiny, {0});
  int violations = 0;
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < 2; ++f) {
    const CMatrix& phi = cov.power_normalized.matrices[f];
    const double best = WpdWeightedPower(w.values[f], phi);
    for (int k = 0; k < 1000; ++k) {
      CVector d = RandomVector(rng, 4) * std::pow(10.0, rng.Uniform(-4.0, 0.0));
      d -= s.padded * (s.padded.dot(d) / s.padded.squaredNorm());
      const double other = WpdWeightedPower(w.values[f] + d, phi);
      margin = std::min(margin, (other - best) / best);
      if (other < best) ++violations;
    }
  }
  return {worst < 1e-6 && violations == 0,
          Fmt("max |w^H g - 1| = %.3e on 50 scenes (tol 1e-6); %d of 2000 perturbations beat w "
              "(smallest relative excess %.2e)",
              worst, violations, margin)};
}

// ---- 5 ----

Outcome Flooring() {
  Rng rng(505);
  double worst = 0.0;
  int solved = 0, total = 0;
  for (std::size_t dim : {15u, 30u})
    for (std::size_t rank : {std::size_t{1}, dim / 3, dim - 1})
      for (int rep = 0; rep < 4; ++rep) {
        const CMatrix phi = RandomPsd(rng, dim, rank);
        const CMatrix rhs = RandomVector(rng, dim);
        for (int k = 1; k <= 9; ++k) {
          ++total;
          const CMatrix floored = FloorMatrix(phi, std::pow(10.0, -k));
          try {
            const CMatrix x = SolveHermitian(floored, rhs);
            worst = std::max(worst, BackwardError(floored, x, rhs));
            ++solved;
          } catch (const Error&) {
          }
        }
      }
  return {solved == total && worst < 1e-8,
          Fmt("%d/%d solves succeeded, max backward error %.3e (tol 1e-8)", solved, total, worst)};
}

// ---- 6 ----

Outcome SimulatorFidelity() {
  const std::vector<std::string> names{"s0", "s1", "s2", "s3", "s4", "s5", "s6", "s7"};
  double worst_snr = 0.0, worst_sir = 0.0, worst_t60 = 0.0;
  std::array<int, kNumAngleBins> counts{};
  const std::size_t n = 16000;
  for (int k = 0; k < 200; ++k) {
    const auto scene = SampleScene(MixSeed(606, static_cast<std::uint64_t>(k)), names);
    ++counts[static_cast<std::size_t>(scene.angle_bin)];
    const auto index = [&](const std::string& s) {
      return static_cast<std::uint64_t>(std::find(names.begin(), names.end(), s) - names.begin());
    };
    const auto t = MultiChannelWave::Mono(SpeechLikeSource(index(scene.target_source), n, kDefaultSampleRate));
    const auto i = MultiChannelWave::Mono(SpeechLikeSource(index(scene.interferer_source), n, kDefaultSampleRate));
    const auto z = MultiChannelWave::Mono(ColoredNoise(static_cast<std::uint64_t>(k), n, kDefaultSampleRate));
    const auto sim = SimulateMixture(t, i, z, scene);
    std::vector<double> speech(n);
    for (std::size_t j = 0; j < n; ++j) speech[j] = sim.target_reverb(0, j) + sim.interferer(0, j);
    worst_snr = std::max(worst_snr, std::abs(EnergyRatioDb(speech, sim.noise.Channel(0)) - scene.snr_db));
    worst_sir = std::max(worst_sir, std::abs(EnergyRatioDb(sim.target_reverb.Channel(0),
                                                           sim.interferer.Channel(0)) - scene.sir_db));

    const double t60 = k % 2 == 0 ? 0.3 : 0.6;
    const ArrayGeometry ref_mic{{scene.PlacedArray().mics[scene.reference_channel]}};
    const auto rir = ImageMethodRir(scene.room, t60, scene.target, ref_mic);
    worst_t60 = std::max(worst_t60, std::abs(MeasureT60(rir.taps[0], kDefaultSampleRate) / t60 - 1.0));
  }
  const double p = 1.0 / kNumAngleBins;
  const double sigma = std::sqrt(200.0 * p * (1.0 - p));
  double worst_bin = 0.0;
  for (int c : counts) worst_bin = std::max(worst_bin, std::abs(c - 200.0 * p) / sigma);
  const bool pass = worst_snr < 0.01 && worst_sir < 0.01 && worst_t60 <= 0.2 && worst_bin <= 3.0;
  return {pass, Fmt("max SNR error %.2e dB, max SIR error %.2e dB (tol 0.01); max T60 error %.1f%% "
                    "(tol 20%%); angle bins %d/%d/%d/%d, max deviation %.2f sigma (tol 3)",
                    worst_snr, worst_sir, 100.0 * worst_t60, counts[0], counts[1], counts[2],
                    counts[3], worst_bin)};
}

// ---- 7 ----

Outcome OracleEnhancementGains() {
  const int utterances = 50;
  const std::size_t n = 3 * kDefaultSampleRate;
  std::vector<std::string> names;
  for (int k = 0; k < utterances; ++k) names.push_back("speaker" + std::to_string(k));
  const auto index = [&](const std::string& s) {
    return static_cast<std::uint64_t>(std::find(names.begin(), names.end(), s) - names.begin());
  };
  const std::array<DervbKind, 3> kinds{DervbKind::kWpeIterative, DervbKind::kWpeMasked, DervbKind::kSpecM};

  std::vector<double> sisnr_gain, stoi_sep, stoi_d2s, srmr_sep, srmr_d2s;
  // Mean SRMR of input and output per variant: [kind][before/after separation].
  std::array<std::array<std::array<double, 2>, 2>, 3> srmr_io{};
  for (int k = 0; k < utterances; ++k) {
    const auto scene = SampleScene(MixSeed(707, static_cast<std::uint64_t>(k)), names);
    const auto src = [&](const std::string& name) {
      return MultiChannelWave::Mono(SpeechLikeSource(MixSeed(7070, index(name)), n, kDefaultSampleRate));
    };
    const auto noise = MultiChannelWave::Mono(ColoredNoise(MixSeed(7071, static_cast<std::uint64_t>(k)), n, kDefaultSampleRate));
    const auto sim = SimulateMixture(src(scene.target_source), src(scene.interferer_source), noise, scene);
    const auto mix = Stft(sim.mixture);
    const OracleMaskProvider masks(Stft(sim.target_reverb), Stft(sim.target_early), Stft(sim.interferer_late));
    const auto early = Vec(sim.target_early.Channel(0));
    const auto image = Vec(sim.target_reverb.Channel(0));
    const auto raw = Vec(sim.mixture.Channel(0));

    const auto sep = RunSepOnly(mix, masks, PipelineConfig::Defaults(Architecture::kSepOnly));
    const auto sep_wave = Vec(Istft(sep.output).Channel(0));
    const auto d2s = RunDervbThenSep(mix, masks, PipelineConfig::Defaults(Architecture::kDervbThenSep));
    const auto d2s_wave = Vec(Istft(d2s.output).Channel(0));
    sisnr_gain.push_back(Sisnr(sep_wave, image) - Sisnr(raw, image));
    stoi_sep.push_back(Stoi(sep_wave, early, kDefaultSampleRate));
    stoi_d2s.push_back(Stoi(d2s_wave, early, kDefaultSampleRate));
    const double srmr_raw = Srmr(raw, kDefaultSampleRate);
    srmr_sep.push_back(Srmr(sep_wave, kDefaultSampleRate));
    srmr_d2s.push_back(Srmr(d2s_wave, kDefaultSampleRate));

    for (std::size_t v = 0; v < kinds.size(); ++v) {
      const auto before = Dereverberate(mix, masks, PipelineConfig::Defaults(Architecture::kDervbThenSep, kinds[v]), mix, false);
      srmr_io[v][0][0] += srmr_raw / utterances;
      srmr_io[v][0][1] += Srmr(Vec(Istft(before.SelectChannel(0)).Channel(0)), kDefaultSampleRate) / utterances;
      const auto after = Dereverberate(sep.output, masks, PipelineConfig::Defaults(Architecture::kSepThenDervb, kinds[v]), mix, true);
      srmr_io[v][1][0] += srmr_sep.back() / utterances;
      srmr_io[v][1][1] += Srmr(Vec(Istft(after).Channel(0)), kDefaultSampleRate) / utterances;
    }
  }

  bool dervb_ok = true;
  std::string variants;
  for (std::size_t v = 0; v < kinds.size(); ++v)
    for (int pos = 0; pos < 2; ++pos) {
      const auto& io = srmr_io[v][static_cast<std::size_t>(pos)];
      dervb_ok = dervb_ok && io[1] > io[0];
      variants += Fmt("; %s %s %.2f->%.2f", std::string(DervbKindName(kinds[v])).c_str(),
                      pos == 0 ? "on mixture" : "after sep", io[0], io[1]);
    }
  const double gain = Mean(sisnr_gain);
  const bool pass = gain >= 5.0 && Mean(stoi_d2s) > Mean(stoi_sep) && Mean(srmr_d2s) > Mean(srmr_sep) && dervb_ok;
  return {pass, Fmt("SepOnly SISNR gain %.2f dB (min 5); STOI sep %.4f vs dervb>sep %.4f; SRMR sep %.3f "
                    "vs dervb>sep %.3f",
                    gain, Mean(stoi_sep), Mean(stoi_d2s), Mean(srmr_sep), Mean(srmr_d2s)) +
                    variants};
}

// ---- 8 ----

Outcome MetricSanity() {
  bool exact = true;
  double worst_scale = 0.0, worst_stoi = 0.0, worst_gain = 0.0;
  int srmr_order = 0, srmr_total = 0;
  const std::size_t n = 3 * kDefaultSampleRate;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto ref = SpeechLikeSource(seed, n, kDefaultSampleRate);
    auto est = SpeechLikeSource(seed + 1000, n, kDefaultSampleRate);
    for (std::size_t i = 0; i < n; ++i) est[i] = ref[i] + 0.3 * est[i];
    const double base = Sisnr(est, ref);
    for (double a : {0.25, 2.0, 4096.0, -8.0}) {
      std::vector<double> scaled(n);
      for (std::size_t i = 0; i < n; ++i) scaled[i] = a * est[i];
      exact = exact && Sisnr(scaled, ref) == base;
    }
    for (double a : {0.37, 3.3, 1234.5}) {
      std::vector<double> scaled(n);
      for (std::size_t i = 0; i < n; ++i) scaled[i] = a * est[i];
      worst_scale = std::max(worst_scale, std::abs(Sisnr(scaled, ref) - base));
    }
    worst_stoi = std::max(worst_stoi, std::abs(Stoi(ref, ref, kDefaultSampleRate) - 1.0));

    const double clean = Srmr(ref, kDefaultSampleRate);
    for (double g : {0.05, 7.0}) {
      std::vector<double> y(n);
      for (std::size_t i = 0; i < n; ++i) y[i] = g * ref[i];
      worst_gain = std::max(worst_gain, std::abs(Srmr(y, kDefaultSampleRate) - clean));
    }
    const double t60 = seed % 2 == 0 ? 0.6 : 0.9;
    const auto scene = FixtureScene(t60);
    const auto rir = ImageMethodRir(scene.room, t60, scene.target, scene.PlacedArray());
    auto rev = FftConvolve(ref, rir.taps[0]);
    rev.resize(n);
    ++srmr_total;
    if (clean > Srmr(rev, kDefaultSampleRate)) ++srmr_order;
  }
  const bool pass = exact && worst_scale < 1e-9 && worst_stoi < 1e-6 && worst_gain < 1e-8 &&
                    srmr_order == srmr_total;
  return {pass, Fmt("SISNR bit-identical under power-of-two scaling: %s, max drift under other scales "
                    "%.1e dB; max |STOI(ref,ref)-1| %.1e; max SRMR gain drift %.1e; clean > "
                    "reverberant SRMR on %d/%d",
                    exact ? "yes" : "no", worst_scale, worst_stoi, worst_gain, srmr_order, srmr_total)};
}

// ---- 9 ----

int Shell(const std::string& cmd) {
  const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome Determinism(const std::string& cli, const fs::path& work) {
  const fs::path root = work / "determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const auto q = [](const fs::path& p) { return "\"" + p.string() + "\""; };
  const std::string exe = q(cli);
  if (Shell(exe + " synth --out " + q(root / "src") + " --count 6 --noise-count 2 --duration 2 --seed 42") != 0)
    return {false, "synth failed"};
  std::vector<std::string> reports;
  for (int workers : {1, 8}) {
    const fs::path run = root / ("workers" + std::to_string(workers));
    const std::string w = " --workers " + std::to_string(workers);
    if (Shell(exe + " simulate --speech " + q(root / "src" / "speech.txt") + " --noise " +
              q(root / "src" / "noise.txt") + " --count 8 --seed 42" + w + " --out " + q(run / "sim")) != 0)
      return {false, "simulate failed with" + w};
    if (Shell(exe + " enhance --manifest " + q(run / "sim" / "manifest.jsonl") + " --arch dervb_then_sep" + w +
              " --out " + q(run / "enh")) != 0)
      return {false, "enhance failed with" + w};
    if (Shell(exe + " evaluate --manifest " + q(run / "enh" / "manifest.jsonl") + w + " --out " +
              q(run / "report.jsonl")) != 0)
      return {false, "evaluate failed with" + w};
    reports.push_back(Slurp(run / "report.jsonl"));
  }
  const bool same = !reports[0].empty() && reports[0] == reports[1];
  return {same, Fmt("reports for workers 1 and 8 are %s (%zu bytes)", same ? "byte-identical" : "different",
                    reports[0].size())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string work = (fs::temp_directory_path() / "mcse_acceptance").string();
  std::string cli = MCSE_CLI_PATH;
  std::vector<int> only;
  app.add_option("--work", work, "Scratch directory");
  app.add_option("--cli", cli, "Command-line tool to drive");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "STFT round trip", 5.0, StftRoundTrip},
      {2, "MVDR distortionless", 10.0, MvdrDistortionless},
      {3, "WPE least-squares oracle", 30.0, WpeOracle},
      {4, "WPD constraint and optimality", 10.0, WpdConstraintAndOptimality},
      {5, "Flooring robustness", 5.0, Flooring},
      {6, "Simulator fidelity", 180.0, SimulatorFidelity},
      {7, "Oracle-mask enhancement gains", 600.0, OracleEnhancementGains},
      {8, "Metric sanity", 120.0, MetricSanity},
      {9, "End-to-end determinism", 300.0, [&] { return Determinism(cli, work); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = out.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s criterion %d (%s): %s [%.2f s, budget %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                out.detail.c_str(), secs, c.budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
