// mcse: simulate cocktail-party corpora, enhance them and score the results.
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mcse/mcse.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitGate = 3;

constexpr const char* kMaskRoles[] = {"sep_target", "sep_noise", "dervb",
                                      "specm",      "wpd_target", "wpd_power"};

void Check(mcse_status status, const std::string& what) {
  if (status != MCSE_OK) {
    throw std::runtime_error(what + ": " + mcse_status_name(status) + ": " + mcse_last_error());
  }
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Wave = std::unique_ptr<mcse_wave, Deleter<mcse_wave, mcse_wave_free>>;
using Spec = std::unique_ptr<mcse_spec, Deleter<mcse_spec, mcse_spec_free>>;
using Mask = std::unique_ptr<mcse_mask, Deleter<mcse_mask, mcse_mask_free>>;
using MaskSet = std::unique_ptr<mcse_mask_set, Deleter<mcse_mask_set, mcse_mask_set_free>>;
using Scene = std::unique_ptr<mcse_scene, Deleter<mcse_scene, mcse_scene_free>>;
using Mixture = std::unique_ptr<mcse_mixture, Deleter<mcse_mixture, mcse_mixture_free>>;

Wave ReadWave(const fs::path& path) {
  mcse_wave* w = nullptr;
  Check(mcse_wave_read(path.c_str(), &w), "reading " + path.string());
  return Wave(w);
}

void WriteWave(const fs::path& path, const mcse_wave* w) {
  Check(mcse_wave_write(path.c_str(), w, 0), "writing " + path.string());
}

Wave FromData(const std::vector<double>& data, std::size_t channels, int rate) {
  mcse_wave* w = nullptr;
  Check(mcse_wave_from_data(data.data(), channels, data.size() / channels, rate, &w),
        "building wave");
  return Wave(w);
}

Wave Channel(const mcse_wave* w, std::size_t channel) {
  mcse_wave* out = nullptr;
  Check(mcse_wave_select_channel(w, channel, &out), "selecting channel");
  return Wave(out);
}

std::vector<double> Samples(const mcse_wave* w) {
  const double* d = mcse_wave_data(w);
  return {d, d + mcse_wave_channels(w) * mcse_wave_samples(w)};
}

Spec Stft(const mcse_wave* w) {
  mcse_spec* s = nullptr;
  Check(mcse_stft(w, &s), "stft");
  return Spec(s);
}

double Energy(const std::vector<double>& x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

double RatioDb(double num, double den) { return 10.0 * std::log10(num / den); }

// One path per line; blank lines and '#' comments are skipped. Relative
// paths are taken relative to the manifest's directory.
std::vector<std::string> ReadPathList(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw std::runtime_error("cannot open manifest " + manifest.string());
  std::vector<std::string> paths;
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    fs::path p = line.substr(b, e - b + 1);
    if (p.is_relative()) p = manifest.parent_path() / p;
    paths.push_back(p.lexically_normal().string());
  }
  return paths;
}

std::vector<json> ReadJsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<json> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    records.push_back(json::parse(line));
  }
  return records;
}

void WriteJsonl(const fs::path& path, const std::vector<json>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const json& r : records) out << r.dump() << '\n';
}

fs::path Resolve(const fs::path& base, const std::string& p) {
  fs::path path = p;
  return path.is_relative() ? (base / path).lexically_normal() : path;
}

// `path` expressed relative to directory `dir`.
std::string RelativeTo(const fs::path& path, const fs::path& dir) {
  return fs::absolute(path).lexically_normal().lexically_relative(
      fs::absolute(dir).lexically_normal()).string();
}

json LoadConfig(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  return json::parse(in);
}

// Flag when given, else the config value at `key`, else `fallback`.
template <typename T>
T Pick(const CLI::Option* flag, const T& flag_value, const json& cfg, const char* key,
       const T& fallback) {
  if (flag != nullptr && flag->count() > 0) return flag_value;
  if (cfg.contains(key)) return cfg.at(key).get<T>();
  return fallback;
}

// Runs fn(i) for every i in [0, n) on `workers` threads. Results are stored
// by index so scheduling never changes the output order.
template <typename Fn>
void ParallelFor(std::size_t n, int workers, Fn fn) {
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  std::vector<std::thread> pool;
  const auto extra = static_cast<std::size_t>(std::max(1, workers)) - 1;
  for (std::size_t k = 0; k < std::min(extra, n); ++k) pool.emplace_back(loop);
  loop();
  for (auto& t : pool) t.join();
}

std::string UttId(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "utt%05zu", i);
  return buf;
}

// ---- synth ----

struct SynthArgs {
  std::string out;
  std::size_t count = 10;
  std::size_t noise_count = 2;
  std::uint64_t seed = 0;
  double duration = 3.0;
  int rate = 16000;
};

int RunSynth(const SynthArgs& a) {
  const fs::path out = a.out;
  fs::create_directories(out / "speech");
  fs::create_directories(out / "noise");
  const auto samples = static_cast<std::size_t>(std::llround(a.duration * a.rate));
  std::ofstream speech_list(out / "speech.txt");
  for (std::size_t i = 0; i < a.count; ++i) {
    mcse_wave* w = nullptr;
    Check(mcse_synth_speech(mcse_derive_seed(a.seed, 2 * i), samples, a.rate, &w), "synth speech");
    Wave wave(w);
    const std::string name = "speech/s" + std::to_string(i) + ".wav";
    WriteWave(out / name, wave.get());
    speech_list << name << '\n';
  }
  std::ofstream noise_list(out / "noise.txt");
  for (std::size_t i = 0; i < a.noise_count; ++i) {
    mcse_wave* w = nullptr;
    Check(mcse_synth_noise(mcse_derive_seed(a.seed, 2 * i + 1), samples, a.rate, 1.0, &w),
          "synth noise");
    Wave wave(w);
    const std::string name = "noise/n" + std::to_string(i) + ".wav";
    WriteWave(out / name, wave.get());
    noise_list << name << '\n';
  }
  std::cout << "synth: " << a.count << " speech and " << a.noise_count << " noise files in "
            << out.string() << '\n';
  return 0;
}

// ---- simulate ----

struct SimulateArgs {
  std::string config;
  std::string speech;
  std::string noise;
  std::string out;
  std::size_t count = 10;
  std::uint64_t seed = 0;
  int workers = 1;
  std::size_t max_failures = 0;
  bool write_masks = false;
  const CLI::Option* count_opt = nullptr;
  const CLI::Option* seed_opt = nullptr;
  const CLI::Option* workers_opt = nullptr;
};

Wave MonoSource(const std::string& path) {
  Wave w = ReadWave(path);
  if (mcse_wave_channels(w.get()) == 1) return w;
  return Channel(w.get(), 0);
}

Wave GetSignal(const mcse_mixture* m, const char* which) {
  mcse_wave* w = nullptr;
  Check(mcse_mixture_get(m, which, &w), std::string("mixture signal ") + which);
  return Wave(w);
}

std::vector<double> Sub(std::vector<double> a, const std::vector<double>& b, double sign = 1.0) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= sign * b[i];
  return a;
}

void SaveMask(const fs::path& path, const mcse_spec* target, const mcse_spec* mixture) {
  mcse_mask* m = nullptr;
  Check(mcse_mask_oracle(target, mixture, 0, &m), "oracle mask");
  Mask mask(m);
  Check(mcse_mask_save(path.c_str(), mask.get()), "writing " + path.string());
}

// Mixture-domain oracle masks for every role, as read back by --masks <dir>.
void WriteMasks(const fs::path& dir, const mcse_wave* mixture, const mcse_wave* reverb,
                const mcse_wave* early, const mcse_wave* interferer_late) {
  fs::create_directories(dir);
  const int rate = mcse_wave_sample_rate(mixture);
  const Wave ref = Channel(mixture, 0);
  const std::vector<double> y = Samples(ref.get());
  const std::vector<double> img = Samples(reverb);
  const std::vector<double> des = Samples(early);
  const std::vector<double> late_i = Samples(interferer_late);
  const Spec mix = Stft(mixture);
  const Spec s_img = Stft(reverb);
  const Spec s_des = Stft(early);
  const Spec s_noise = Stft(FromData(Sub(y, img), 1, rate).get());
  const Spec s_dervb = Stft(FromData(Sub(Sub(Sub(y, img), des, -1.0), late_i), 1, rate).get());
  SaveMask(dir / "sep_target.cfmk", s_img.get(), mix.get());
  SaveMask(dir / "sep_noise.cfmk", s_noise.get(), mix.get());
  SaveMask(dir / "dervb.cfmk", s_dervb.get(), mix.get());
  SaveMask(dir / "specm.cfmk", s_dervb.get(), mix.get());
  SaveMask(dir / "wpd_target.cfmk", s_des.get(), mix.get());
  SaveMask(dir / "wpd_power.cfmk", s_des.get(), mix.get());
}

struct SimResult {
  json record;
  std::string error;
  double t60 = 0.0, snr = 0.0, sir = 0.0;
};

SimResult SimulateOne(const SimulateArgs& a, std::uint64_t seed, std::size_t index,
                      const std::vector<const char*>& speech,
                      const std::vector<const char*>& noise) {
  SimResult res;
  const std::string id = UttId(index);
  const fs::path out = a.out;
  try {
    const std::uint64_t scene_seed = mcse_derive_seed(seed, index);
    mcse_scene* sc = nullptr;
    Check(mcse_scene_sample(scene_seed, speech.data(), speech.size(),
                            noise.empty() ? nullptr : noise.data(), noise.size(), &sc),
          "sampling scene");
    Scene scene(sc);
    const Wave target = MonoSource(mcse_scene_target_source(scene.get()));
    const Wave interferer = MonoSource(mcse_scene_interferer_source(scene.get()));
    const std::string noise_path = mcse_scene_noise_source(scene.get());
    Wave noise_wave;
    if (noise_path.empty()) {
      mcse_wave* w = nullptr;
      Check(mcse_synth_noise(mcse_derive_seed(scene_seed, 3), mcse_wave_samples(target.get()),
                             mcse_wave_sample_rate(target.get()), 1.0, &w),
            "synthetic noise");
      noise_wave.reset(w);
    } else {
      noise_wave = MonoSource(noise_path);
    }
    mcse_mixture* mx = nullptr;
    Check(mcse_simulate(target.get(), interferer.get(), noise_wave.get(), scene.get(), &mx),
          "simulating");
    Mixture mixture(mx);

    const fs::path dir = out / id;
    fs::create_directories(dir);
    json rec;
    rec["id"] = id;
    for (const char* which : {"mixture", "target_reverb", "target_early", "target_dry",
                              "interferer_late"}) {
      const Wave w = GetSignal(mixture.get(), which);
      WriteWave(dir / (std::string(which) + ".wav"), w.get());
      rec[which] = id + "/" + which + ".wav";
    }
    const std::vector<double> t = Samples(GetSignal(mixture.get(), "target_reverb").get());
    const std::vector<double> i = Samples(GetSignal(mixture.get(), "interferer").get());
    const std::vector<double> n = Samples(GetSignal(mixture.get(), "noise").get());
    std::vector<double> speech_sum = t;
    for (std::size_t k = 0; k < t.size(); ++k) speech_sum[k] += i[k];
    res.snr = RatioDb(Energy(speech_sum), Energy(n));
    res.sir = RatioDb(Energy(t), Energy(i));
    res.t60 = mcse_scene_t60(scene.get());

    char* text = nullptr;
    Check(mcse_scene_to_json(scene.get(), &text), "serializing scene");
    rec["scene"] = json::parse(text);
    mcse_string_free(text);
    rec["measured_snr_db"] = res.snr;
    rec["measured_sir_db"] = res.sir;
    if (a.write_masks) {
      const Wave mix = GetSignal(mixture.get(), "mixture");
      WriteMasks(out / "masks" / id, mix.get(),
                 GetSignal(mixture.get(), "target_reverb").get(),
                 GetSignal(mixture.get(), "target_early").get(),
                 GetSignal(mixture.get(), "interferer_late").get());
    }
    res.record = std::move(rec);
  } catch (const std::exception& e) {
    res.error = e.what();
  }
  return res;
}

int RunSimulate(SimulateArgs a) {
  const json cfg = LoadConfig(a.config);
  a.count = Pick(a.count_opt, a.count, cfg, "count", a.count);
  a.seed = Pick(a.seed_opt, a.seed, cfg, "seed", a.seed);
  a.workers = Pick(a.workers_opt, a.workers, cfg, "workers", a.workers);
  const std::vector<std::string> speech_paths = ReadPathList(a.speech);
  if (speech_paths.empty()) {
    std::cerr << "simulate: speech manifest " << a.speech << " lists no files\n";
    return kExitFailure;
  }
  const std::vector<std::string> noise_paths =
      a.noise.empty() ? std::vector<std::string>{} : ReadPathList(a.noise);
  std::vector<const char*> speech, noise;
  for (const auto& p : speech_paths) speech.push_back(p.c_str());
  for (const auto& p : noise_paths) noise.push_back(p.c_str());

  fs::create_directories(a.out);
  std::vector<SimResult> results(a.count);
  ParallelFor(a.count, a.workers, [&](std::size_t i) {
    results[i] = SimulateOne(a, a.seed, i, speech, noise);
  });

  std::vector<json> manifest, scenes;
  std::size_t failures = 0;
  double t60 = 0.0, snr = 0.0, sir = 0.0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].error.empty()) {
      ++failures;
      std::cerr << "simulate " << UttId(i) << ": " << results[i].error << '\n';
      continue;
    }
    t60 += results[i].t60;
    snr += results[i].snr;
    sir += results[i].sir;
    scenes.push_back(results[i].record.at("scene"));
    manifest.push_back(std::move(results[i].record));
  }
  WriteJsonl(fs::path(a.out) / "manifest.jsonl", manifest);
  WriteJsonl(fs::path(a.out) / "scenes.jsonl", scenes);
  const double ok = std::max<double>(1.0, static_cast<double>(manifest.size()));
  std::printf("simulate: %zu scenes, %zu failed, mean T60 %.3f s, mean SNR %.2f dB, mean SIR %.2f dB\n",
              manifest.size(), failures, t60 / ok, snr / ok, sir / ok);
  return failures > a.max_failures ? kExitFailure : 0;
}

// ---- enhance ----

struct EnhanceArgs {
  std::string config;
  std::string manifest;
  std::string out;
  std::string arch = "dervb_then_sep";
  std::string dervb = "wpe_masked";
  int taps = 0;
  int delay = 0;
  double eps = 0.0;
  std::string masks = "oracle";
  int workers = 1;
  const CLI::Option* arch_opt = nullptr;
  const CLI::Option* dervb_opt = nullptr;
  const CLI::Option* taps_opt = nullptr;
  const CLI::Option* delay_opt = nullptr;
  const CLI::Option* eps_opt = nullptr;
  const CLI::Option* masks_opt = nullptr;
  const CLI::Option* workers_opt = nullptr;
};

void CopyName(char (&dst)[32], const std::string& s) {
  if (s.size() >= sizeof dst) throw std::runtime_error("name too long: " + s);
  std::copy(s.begin(), s.end(), dst);
  dst[s.size()] = '\0';
}

// Defaults for the architecture, then the config file's "pipeline" section,
// then command-line flags. --taps/--delay/--eps address the architecture's
// main filter: MVDR for sep_only, WPE for the pipelined ones, WPD for joint.
mcse_pipeline_config BuildConfig(const EnhanceArgs& a, const json& file) {
  const json p = file.value("pipeline", json::object());
  const std::string arch = Pick(a.arch_opt, a.arch, p, "architecture", a.arch);
  const std::string kind = Pick(a.dervb_opt, a.dervb, p, "dervb_kind", a.dervb);
  mcse_pipeline_config c{};
  Check(mcse_pipeline_defaults(arch.c_str(), kind.c_str(), &c), "pipeline defaults");
  c.reference_channel = p.value("reference_channel", c.reference_channel);
  c.reestimate_masks = p.value("reestimate_masks", c.reestimate_masks != 0) ? 1 : 0;
  if (p.contains("mvdr")) c.mvdr_eps = p["mvdr"].value("eps", c.mvdr_eps);
  if (p.contains("wpe")) {
    const json& w = p["wpe"];
    c.wpe_taps = w.value("taps", c.wpe_taps);
    c.wpe_delay = w.value("delay", c.wpe_delay);
    c.wpe_iterations = w.value("iterations", c.wpe_iterations);
    c.wpe_eps = w.value("eps", c.wpe_eps);
    c.wpe_lambda_floor = w.value("lambda_floor", c.wpe_lambda_floor);
  }
  if (p.contains("wpd")) {
    const json& w = p["wpd"];
    c.wpd_taps = w.value("taps", c.wpd_taps);
    c.wpd_delay = w.value("delay", c.wpd_delay);
    c.wpd_eps = w.value("eps", c.wpd_eps);
    c.wpd_lambda_floor = w.value("lambda_floor", c.wpd_lambda_floor);
  }
  const bool wpd = arch == "joint_wpd";
  const bool mvdr = arch == "sep_only";
  if (a.taps_opt->count() > 0) (wpd ? c.wpd_taps : c.wpe_taps) = a.taps;
  if (a.delay_opt->count() > 0) (wpd ? c.wpd_delay : c.wpe_delay) = a.delay;
  if (a.eps_opt->count() > 0) (mvdr ? c.mvdr_eps : wpd ? c.wpd_eps : c.wpe_eps) = a.eps;
  CopyName(c.architecture, arch);
  CopyName(c.dervb_kind, kind);
  return c;
}

json ConfigJson(const mcse_pipeline_config& c) {
  return {{"architecture", c.architecture},
          {"dervb_kind", c.dervb_kind},
          {"reference_channel", c.reference_channel},
          {"reestimate_masks", c.reestimate_masks != 0},
          {"mvdr", {{"eps", c.mvdr_eps}}},
          {"wpe",
           {{"taps", c.wpe_taps},
            {"delay", c.wpe_delay},
            {"iterations", c.wpe_iterations},
            {"eps", c.wpe_eps},
            {"lambda_floor", c.wpe_lambda_floor}}},
          {"wpd",
           {{"taps", c.wpd_taps},
            {"delay", c.wpd_delay},
            {"eps", c.wpd_eps},
            {"lambda_floor", c.wpd_lambda_floor}}}};
}

struct EnhanceResult {
  json record;
  std::string error;
  std::size_t degenerate = 0;
};

EnhanceResult EnhanceOne(const json& rec, const fs::path& base, const fs::path& out,
                         const std::string& masks, const mcse_pipeline_config& cfg) {
  EnhanceResult res;
  try {
    const std::string id = rec.at("id").get<std::string>();
    const Wave mixture = ReadWave(Resolve(base, rec.at("mixture").get<std::string>()));
    mcse_wave* est = nullptr;
    if (masks == "oracle") {
      const Wave reverb = ReadWave(Resolve(base, rec.at("target_reverb").get<std::string>()));
      const Wave early = ReadWave(Resolve(base, rec.at("target_early").get<std::string>()));
      Wave late;
      if (rec.contains("interferer_late")) {
        late = ReadWave(Resolve(base, rec["interferer_late"].get<std::string>()));
      }
      Check(mcse_enhance_oracle(mixture.get(), reverb.get(), early.get(), late.get(), &cfg, &est,
                                &res.degenerate),
            "enhancing " + id);
    } else {
      mcse_mask_set* ms = nullptr;
      Check(mcse_mask_set_create(&ms), "mask set");
      MaskSet set(ms);
      for (const char* role : kMaskRoles) {
        const fs::path p = fs::path(masks) / id / (std::string(role) + ".cfmk");
        if (!fs::exists(p)) continue;
        mcse_mask* m = nullptr;
        Check(mcse_mask_load(p.c_str(), &m), "reading " + p.string());
        Mask mask(m);
        Check(mcse_mask_set_put(set.get(), role, mask.get()), "mask set");
      }
      Check(mcse_enhance_masks(mixture.get(), set.get(), &cfg, &est, &res.degenerate),
            "enhancing " + id);
    }
    Wave estimate(est);
    WriteWave(out / (id + ".wav"), estimate.get());
    json r;
    r["id"] = id;
    r["estimate"] = id + ".wav";
    r["mixture"] = RelativeTo(Resolve(base, rec.at("mixture").get<std::string>()), out);
    if (rec.contains("target_early")) {
      r["reference"] = RelativeTo(Resolve(base, rec["target_early"].get<std::string>()), out);
    }
    r["degenerate_bins"] = res.degenerate;
    res.record = std::move(r);
  } catch (const std::exception& e) {
    res.error = e.what();
  }
  return res;
}

int RunEnhance(EnhanceArgs a) {
  const json file = LoadConfig(a.config);
  const mcse_pipeline_config cfg = BuildConfig(a, file);
  a.masks = Pick(a.masks_opt, a.masks, file, "masks", a.masks);
  a.workers = Pick(a.workers_opt, a.workers, file, "workers", a.workers);
  if (mcse_pipeline_validate(&cfg) != MCSE_OK) {
    std::cerr << "enhance: invalid configuration: " << mcse_last_error() << '\n';
    return kExitFailure;
  }
  const fs::path manifest_path = a.manifest;
  const std::vector<json> records = ReadJsonl(manifest_path);
  const fs::path base = manifest_path.parent_path();
  const fs::path out = a.out;
  fs::create_directories(out);

  std::vector<EnhanceResult> results(records.size());
  ParallelFor(records.size(), a.workers, [&](std::size_t i) {
    results[i] = EnhanceOne(records[i], base, out, a.masks, cfg);
  });

  const std::string arch = cfg.architecture;
  const int taps = arch == "joint_wpd" ? cfg.wpd_taps : arch == "sep_only" ? 0 : cfg.wpe_taps;
  const double eps = arch == "joint_wpd" ? cfg.wpd_eps
                     : arch == "sep_only" ? cfg.mvdr_eps
                                          : cfg.wpe_eps;
  std::vector<json> manifest;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const std::string id = records[i].value("id", UttId(i));
    if (!results[i].error.empty()) {
      ++failures;
      std::cerr << "enhance " << id << ": " << results[i].error << '\n';
      continue;
    }
    std::cout << "enhance " << id << " arch=" << cfg.architecture << " dervb=" << cfg.dervb_kind
              << " taps=" << taps << " eps=" << eps
              << " degenerate_bins=" << results[i].degenerate << '\n';
    manifest.push_back(std::move(results[i].record));
  }
  WriteJsonl(out / "manifest.jsonl", manifest);
  std::ofstream(out / "config.json") << ConfigJson(cfg).dump(2) << '\n';
  std::printf("enhance: %zu utterances, %zu failed\n", manifest.size(), failures);
  return failures > 0 ? kExitFailure : 0;
}

// ---- evaluate ----

struct EvaluateArgs {
  std::string config;
  std::string manifest;
  std::string out;
  int workers = 1;
  std::size_t channel = 0;
  double min_stoi = 0.0, min_sisnr = 0.0, min_srmr = 0.0;
  const CLI::Option* workers_opt = nullptr;
  const CLI::Option* min_stoi_opt = nullptr;
  const CLI::Option* min_sisnr_opt = nullptr;
  const CLI::Option* min_srmr_opt = nullptr;
};

struct Scores {
  std::string error;
  std::string warning;
  double sisnr = 0.0, stoi = 0.0, srmr = 0.0;
};

Scores EvaluateOne(const json& rec, const fs::path& base, std::size_t channel) {
  Scores s;
  try {
    const Wave est_all = ReadWave(Resolve(base, rec.at("estimate").get<std::string>()));
    const Wave ref_all = ReadWave(Resolve(base, rec.at("reference").get<std::string>()));
    const Wave est = Channel(est_all.get(), mcse_wave_channels(est_all.get()) > 1 ? channel : 0);
    const Wave ref = Channel(ref_all.get(), 0);
    const int rate = mcse_wave_sample_rate(est.get());
    if (rate != mcse_wave_sample_rate(ref.get())) throw std::runtime_error("sample rates differ");
    const std::size_t ne = mcse_wave_samples(est.get());
    const std::size_t nr = mcse_wave_samples(ref.get());
    const std::size_t n = std::min(ne, nr);
    if (ne != nr) {
      s.warning = "length mismatch " + std::to_string(ne) + " vs " + std::to_string(nr) +
                  ", trimmed to " + std::to_string(n);
    }
    const double* e = mcse_wave_data(est.get());
    const double* r = mcse_wave_data(ref.get());
    Check(mcse_sisnr(e, r, n, &s.sisnr), "sisnr");
    Check(mcse_stoi(e, r, n, rate, &s.stoi), "stoi");
    Check(mcse_srmr(e, n, rate, &s.srmr), "srmr");
  } catch (const std::exception& ex) {
    s.error = ex.what();
  }
  return s;
}

int RunEvaluate(EvaluateArgs a) {
  const json file = LoadConfig(a.config);
  const json gates = file.value("gates", json::object());
  a.workers = Pick(a.workers_opt, a.workers, file, "workers", a.workers);
  const auto gate = [&](const CLI::Option* opt, double v, const char* key) -> std::optional<double> {
    if (opt->count() > 0) return v;
    if (gates.contains(key)) return gates[key].get<double>();
    return std::nullopt;
  };
  const auto g_stoi = gate(a.min_stoi_opt, a.min_stoi, "min_stoi");
  const auto g_sisnr = gate(a.min_sisnr_opt, a.min_sisnr, "min_sisnr");
  const auto g_srmr = gate(a.min_srmr_opt, a.min_srmr, "min_srmr");

  const fs::path manifest_path = a.manifest;
  const std::vector<json> records = ReadJsonl(manifest_path);
  const fs::path base = manifest_path.parent_path();
  std::vector<Scores> scores(records.size());
  ParallelFor(records.size(), a.workers, [&](std::size_t i) {
    scores[i] = EvaluateOne(records[i], base, a.channel);
  });

  std::vector<json> report;
  std::size_t failures = 0, count = 0;
  double sisnr = 0.0, stoi = 0.0, srmr = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string id = records[i].value("id", UttId(i));
    if (!scores[i].warning.empty()) std::cerr << "evaluate " << id << ": " << scores[i].warning << '\n';
    if (!scores[i].error.empty()) {
      ++failures;
      std::cerr << "evaluate " << id << ": " << scores[i].error << '\n';
      continue;
    }
    report.push_back({{"id", id},
                      {"sisnr_db", scores[i].sisnr},
                      {"stoi", scores[i].stoi},
                      {"srmr", scores[i].srmr}});
    sisnr += scores[i].sisnr;
    stoi += scores[i].stoi;
    srmr += scores[i].srmr;
    ++count;
  }
  const double n = std::max<double>(1.0, static_cast<double>(count));
  sisnr /= n;
  stoi /= n;
  srmr /= n;
  report.push_back({{"aggregate", {{"count", count}, {"sisnr_db", sisnr}, {"stoi", stoi}, {"srmr", srmr}}}});
  if (!a.out.empty()) WriteJsonl(a.out, report);

  std::printf("%-10s %10s %10s %10s\n", "", "SISNR(dB)", "STOI(x100)", "SRMR");
  for (std::size_t i = 0; i + 1 < report.size(); ++i) {
    const json& r = report[i];
    std::printf("%-10s %10.2f %10.2f %10.2f\n", r["id"].get<std::string>().c_str(),
                r["sisnr_db"].get<double>(), 100.0 * r["stoi"].get<double>(),
                r["srmr"].get<double>());
  }
  std::printf("%-10s %10.2f %10.2f %10.2f\n", "mean", sisnr, 100.0 * stoi, srmr);
  if (failures > 0) std::printf("evaluate: %zu utterances failed\n", failures);

  bool gated = false;
  auto check = [&](const std::optional<double>& g, double v, const char* name) {
    if (g && v < *g) {
      std::printf("gate: mean %s %.4f below %.4f\n", name, v, *g);
      gated = true;
    }
  };
  check(g_stoi, stoi, "STOI");
  check(g_sisnr, sisnr, "SISNR");
  check(g_srmr, srmr, "SRMR");
  if (failures > 0) return kExitFailure;
  return gated ? kExitGate : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-channel speech enhancement: simulation, MVDR/WPE/WPD enhancement, metrics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mcse_version()));

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Write synthetic speech-like and noise sources");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--count", synth.count, "Number of speech files");
  s->add_option("--noise-count", synth.noise_count, "Number of noise files");
  s->add_option("--seed", synth.seed, "Random seed");
  s->add_option("--duration", synth.duration, "Length in seconds")->check(CLI::PositiveNumber);
  s->add_option("--rate", synth.rate, "Sample rate")->check(CLI::PositiveNumber);

  SimulateArgs sim;
  auto* m = app.add_subcommand("simulate", "Simulate reverberant multi-speaker mixtures");
  m->add_option("--config", sim.config, "JSON config file")->check(CLI::ExistingFile);
  m->add_option("--speech", sim.speech, "Speech manifest (one WAV path per line)")
      ->required()
      ->check(CLI::ExistingFile);
  m->add_option("--noise", sim.noise, "Noise manifest; synthetic noise when absent")
      ->check(CLI::ExistingFile);
  m->add_option("--out", sim.out, "Output directory")->required();
  sim.count_opt = m->add_option("--count", sim.count, "Number of mixtures");
  sim.seed_opt = m->add_option("--seed", sim.seed, "Random seed");
  sim.workers_opt = m->add_option("--workers", sim.workers, "Worker threads")->check(CLI::PositiveNumber);
  m->add_option("--max-failures", sim.max_failures, "Tolerated failed scenes");
  m->add_flag("--write-masks", sim.write_masks, "Also write mixture-domain oracle masks");

  EnhanceArgs enh;
  auto* e = app.add_subcommand("enhance", "Enhance mixtures listed in a manifest");
  e->add_option("--config", enh.config, "JSON config file")->check(CLI::ExistingFile);
  e->add_option("--manifest", enh.manifest, "Mixture manifest (JSONL)")
      ->required()
      ->check(CLI::ExistingFile);
  e->add_option("--out", enh.out, "Output directory")->required();
  const std::vector<std::string> archs = {"sep_only", "sep_then_dervb", "dervb_then_sep", "joint_wpd"};
  enh.arch_opt = e->add_option("--arch", enh.arch, "Architecture")->check(CLI::IsMember(archs));
  enh.dervb_opt = e->add_option("--dervb", enh.dervb, "Dereverberation kind")
                      ->check(CLI::IsMember({"wpe_iterative", "wpe_masked", "specm"}));
  enh.taps_opt = e->add_option("--taps", enh.taps, "Filter taps of the main stage");
  enh.delay_opt = e->add_option("--delay", enh.delay, "Prediction delay in frames");
  enh.eps_opt = e->add_option("--eps", enh.eps, "Diagonal flooring of the main stage");
  enh.masks_opt = e->add_option("--masks", enh.masks, "\"oracle\" or a mask directory");
  enh.workers_opt = e->add_option("--workers", enh.workers, "Worker threads")->check(CLI::PositiveNumber);

  EvaluateArgs ev;
  auto* v = app.add_subcommand("evaluate", "Score estimates against references");
  v->add_option("--config", ev.config, "JSON config file")->check(CLI::ExistingFile);
  v->add_option("--manifest", ev.manifest, "Estimate/reference manifest (JSONL)")
      ->required()
      ->check(CLI::ExistingFile);
  v->add_option("--out", ev.out, "Report file (JSONL)");
  v->add_option("--channel", ev.channel, "Channel of multi-channel estimates");
  ev.workers_opt = v->add_option("--workers", ev.workers, "Worker threads")->check(CLI::PositiveNumber);
  ev.min_stoi_opt = v->add_option("--min-stoi", ev.min_stoi, "Fail when mean STOI is lower");
  ev.min_sisnr_opt = v->add_option("--min-sisnr", ev.min_sisnr, "Fail when mean SISNR is lower");
  ev.min_srmr_opt = v->add_option("--min-srmr", ev.min_srmr, "Fail when mean SRMR is lower");

  CLI11_PARSE(app, argc, argv);
  try {
    if (s->parsed()) return RunSynth(synth);
    if (m->parsed()) return RunSimulate(sim);
    if (e->parsed()) return RunEnhance(enh);
    if (v->parsed()) return RunEvaluate(ev);
  } catch (const std::exception& ex) {
    std::cerr << "mcse: " << ex.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
