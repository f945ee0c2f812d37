#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "mcse/mcse.h"

namespace {

struct WaveGuard {
  mcse_wave* p = nullptr;
  ~WaveGuard() { mcse_wave_free(p); }
};

std::vector<double> Samples(const mcse_wave* w) {
  const double* d = mcse_wave_data(w);
  return {d, d + mcse_wave_channels(w) * mcse_wave_samples(w)};
}

}  // namespace

TEST_SUITE("capi") {

TEST_CASE("status names and errors") {
  CHECK(std::string(mcse_status_name(MCSE_OK)) == "ok");
  CHECK(std::strlen(mcse_version()) > 0);
  mcse_wave* w = nullptr;
  CHECK(mcse_wave_read("/nonexistent/x.wav", &w) == MCSE_ERR_IO);
  CHECK(w == nullptr);
  CHECK(std::strlen(mcse_last_error()) > 0);
  CHECK(mcse_wave_from_data(nullptr, 1, 10, 16000, &w) == MCSE_ERR_INVALID_ARGUMENT);
  const double bad[2] = {0.0, NAN};
  CHECK(mcse_wave_from_data(bad, 1, 2, 16000, &w) == MCSE_ERR_NUMERIC);
  mcse_wave_free(nullptr);
  CHECK(mcse_derive_seed(42, 0) != mcse_derive_seed(42, 1));
}

TEST_CASE("stft round trip through handles") {
  std::vector<double> data(2 * 5000);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = std::sin(0.01 * static_cast<double>(i * i % 977));
  WaveGuard w;
  REQUIRE(mcse_wave_from_data(data.data(), 2, 5000, 16000, &w.p) == MCSE_OK);
  mcse_spec* s = nullptr;
  REQUIRE(mcse_stft(w.p, &s) == MCSE_OK);
  CHECK(mcse_spec_channels(s) == 2);
  CHECK(mcse_spec_bins(s) == 257);
  CHECK(mcse_spec_frames(s) == (5000 + 256 + 255) / 256);
  WaveGuard back;
  REQUIRE(mcse_istft(s, &back.p) == MCSE_OK);
  mcse_spec_free(s);
  const auto x = Samples(back.p);
  double err = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) err = std::max(err, std::abs(x[i] - data[i]));
  CHECK(err < 1e-10);
}

TEST_CASE("pipeline config") {
  mcse_pipeline_config cfg;
  REQUIRE(mcse_pipeline_defaults("dervb_then_sep", nullptr, &cfg) == MCSE_OK);
  CHECK(std::string(cfg.dervb_kind) == "wpe_masked");
  CHECK(cfg.wpe_taps == 2);
  CHECK(cfg.wpe_eps == 1e-6);
  CHECK(mcse_pipeline_validate(&cfg) == MCSE_OK);
  REQUIRE(mcse_pipeline_defaults("sep_then_dervb", "specm", &cfg) == MCSE_OK);
  CHECK(cfg.wpe_taps == 18);
  CHECK(mcse_pipeline_defaults("nope", nullptr, &cfg) == MCSE_ERR_INVALID_ARGUMENT);
  std::strcpy(cfg.architecture, "bogus");
  CHECK(mcse_pipeline_validate(&cfg) == MCSE_ERR_INVALID_ARGUMENT);
  REQUIRE(mcse_pipeline_defaults("joint_wpd", nullptr, &cfg) == MCSE_OK);
  cfg.wpd_delay = 0;
  CHECK(mcse_pipeline_validate(&cfg) == MCSE_ERR_INVALID_ARGUMENT);
}

TEST_CASE("simulate and enhance") {
  const char* speech[] = {"a.wav", "b.wav"};
  mcse_scene* scene = nullptr;
  REQUIRE(mcse_scene_sample(42, speech, 2, nullptr, 0, &scene) == MCSE_OK);
  char* json = nullptr;
  REQUIRE(mcse_scene_to_json(scene, &json) == MCSE_OK);
  mcse_scene* copy = nullptr;
  REQUIRE(mcse_scene_from_json(json, &copy) == MCSE_OK);
  CHECK(mcse_scene_t60(copy) == mcse_scene_t60(scene));
  CHECK(mcse_scene_seed(copy) == 42);
  CHECK(std::string(mcse_scene_noise_source(scene)).empty());
  mcse_string_free(json);
  mcse_scene_free(copy);

  WaveGuard t, i, n;
  REQUIRE(mcse_synth_speech(1, 24000, 16000, &t.p) == MCSE_OK);
  REQUIRE(mcse_synth_speech(2, 24000, 16000, &i.p) == MCSE_OK);
  REQUIRE(mcse_synth_noise(3, 24000, 16000, 1.0, &n.p) == MCSE_OK);
  mcse_mixture* mix = nullptr;
  REQUIRE(mcse_simulate(t.p, i.p, n.p, scene, &mix) == MCSE_OK);
  mcse_scene_free(scene);
  WaveGuard m, rev, early, late;
  REQUIRE(mcse_mixture_get(mix, "mixture", &m.p) == MCSE_OK);
  {
    WaveGuard a, b, c;
    REQUIRE(mcse_mixture_get(mix, "target_reverb", &a.p) == MCSE_OK);
    REQUIRE(mcse_mixture_get(mix, "target_early", &b.p) == MCSE_OK);
    REQUIRE(mcse_mixture_get(mix, "interferer_late", &c.p) == MCSE_OK);
    REQUIRE(mcse_wave_select_channel(a.p, 0, &rev.p) == MCSE_OK);
    REQUIRE(mcse_wave_select_channel(b.p, 0, &early.p) == MCSE_OK);
    REQUIRE(mcse_wave_select_channel(c.p, 0, &late.p) == MCSE_OK);
  }
  mcse_wave* none = nullptr;
  CHECK(mcse_mixture_get(mix, "bogus", &none) == MCSE_ERR_INVALID_ARGUMENT);
  mcse_mixture_free(mix);
  CHECK(mcse_wave_channels(m.p) == 15);

  mcse_pipeline_config cfg;
  REQUIRE(mcse_pipeline_defaults("sep_only", nullptr, &cfg) == MCSE_OK);
  WaveGuard out;
  std::size_t degenerate = 99;
  REQUIRE(mcse_enhance_oracle(m.p, rev.p, early.p, late.p, &cfg, &out.p, &degenerate) == MCSE_OK);
  CHECK(mcse_wave_channels(out.p) == 1);
  CHECK(mcse_wave_samples(out.p) == 24000);
  double raw = 0.0, enhanced = 0.0;
  WaveGuard ref;
  REQUIRE(mcse_wave_select_channel(m.p, 0, &ref.p) == MCSE_OK);
  REQUIRE(mcse_sisnr(mcse_wave_data(ref.p), mcse_wave_data(rev.p), 24000, &raw) == MCSE_OK);
  REQUIRE(mcse_sisnr(mcse_wave_data(out.p), mcse_wave_data(rev.p), 24000, &enhanced) == MCSE_OK);
  CHECK(enhanced > raw);

  // The same masks supplied explicitly reproduce the oracle run.
  mcse_spec *ms = nullptr, *ts = nullptr, *ns = nullptr;
  REQUIRE(mcse_stft(m.p, &ms) == MCSE_OK);
  REQUIRE(mcse_stft(rev.p, &ts) == MCSE_OK);
  std::vector<double> resid(Samples(ref.p));
  const auto target = Samples(rev.p);
  for (std::size_t k = 0; k < resid.size(); ++k) resid[k] -= target[k];
  WaveGuard rw;
  REQUIRE(mcse_wave_from_data(resid.data(), 1, resid.size(), 16000, &rw.p) == MCSE_OK);
  REQUIRE(mcse_stft(rw.p, &ns) == MCSE_OK);
  mcse_mask *mx = nullptr, *mn = nullptr;
  REQUIRE(mcse_mask_oracle(ts, ms, 0, &mx) == MCSE_OK);
  REQUIRE(mcse_mask_oracle(ns, ms, 0, &mn) == MCSE_OK);
  mcse_mask_set* set = nullptr;
  REQUIRE(mcse_mask_set_create(&set) == MCSE_OK);
  REQUIRE(mcse_mask_set_put(set, "sep_target", mx) == MCSE_OK);
  CHECK(mcse_mask_set_put(set, "bogus", mx) == MCSE_ERR_INVALID_ARGUMENT);
  WaveGuard partial;
  CHECK(mcse_enhance_masks(m.p, set, &cfg, &partial.p, nullptr) == MCSE_ERR_INVALID_ARGUMENT);
  REQUIRE(mcse_mask_set_put(set, "sep_noise", mn) == MCSE_OK);
  WaveGuard again;
  REQUIRE(mcse_enhance_masks(m.p, set, &cfg, &again.p, nullptr) == MCSE_OK);
  const auto a = Samples(out.p), b = Samples(again.p);
  double diff = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) diff = std::max(diff, std::abs(a[k] - b[k]));
  CHECK(diff < 1e-9);

  const auto path = (std::filesystem::temp_directory_path() / "mcse_capi_mask.cfmk").string();
  REQUIRE(mcse_mask_save(path.c_str(), mx) == MCSE_OK);
  mcse_mask* loaded = nullptr;
  REQUIRE(mcse_mask_load(path.c_str(), &loaded) == MCSE_OK);
  CHECK(mcse_mask_frames(loaded) == mcse_spec_frames(ms));
  CHECK(mcse_mask_bins(loaded) == 257);
  std::filesystem::remove(path);

  mcse_mask_free(loaded);
  mcse_mask_free(mx);
  mcse_mask_free(mn);
  mcse_mask_set_free(set);
  mcse_spec_free(ms);
  mcse_spec_free(ts);
  mcse_spec_free(ns);
}

TEST_CASE("metrics") {
  WaveGuard s;
  REQUIRE(mcse_synth_speech(5, 32000, 16000, &s.p) == MCSE_OK);
  const double* x = mcse_wave_data(s.p);
  double v = 0.0;
  REQUIRE(mcse_stoi(x, x, 32000, 16000, &v) == MCSE_OK);
  CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
  REQUIRE(mcse_srmr(x, 32000, 16000, &v) == MCSE_OK);
  CHECK(v > 0.0);
  std::vector<double> zeros(32000, 0.0);
  CHECK(mcse_sisnr(x, zeros.data(), 32000, &v) != MCSE_OK);
}

}
