#include "mcse/mcse.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <new>
#include <optional>
#include <string>
#include <utility>

#include "mcse/audio.hpp"
#include "mcse/error.hpp"
#include "mcse/masks.hpp"
#include "mcse/metrics.hpp"
#include "mcse/pipeline.hpp"
#include "mcse/random.hpp"
#include "mcse/scene.hpp"
#include "mcse/stft.hpp"
#include "mcse/synth.hpp"

struct mcse_wave {
  mcse::MultiChannelWave value;
};
struct mcse_spec {
  mcse::Spectrogram value;
};
struct mcse_mask {
  mcse::ComplexMask value;
};
struct mcse_mask_set {
  mcse::FixedMaskProvider value;
};
struct mcse_scene {
  mcse::RoomScene value;
};
struct mcse_mixture {
  mcse::SimulatedMixture value;
};

namespace {

thread_local std::string g_last_error;

mcse_status StatusFor(mcse::ErrorCode code) {
  switch (code) {
    case mcse::ErrorCode::kInvalidArgument: return MCSE_ERR_INVALID_ARGUMENT;
    case mcse::ErrorCode::kDimensionMismatch: return MCSE_ERR_DIMENSION_MISMATCH;
    case mcse::ErrorCode::kIo: return MCSE_ERR_IO;
    case mcse::ErrorCode::kNumeric: return MCSE_ERR_NUMERIC;
    case mcse::ErrorCode::kDegenerate: return MCSE_ERR_DEGENERATE;
    case mcse::ErrorCode::kOutOfRange: return MCSE_ERR_OUT_OF_RANGE;
    case mcse::ErrorCode::kRejectionBudget: return MCSE_ERR_REJECTION_BUDGET;
  }
  return MCSE_ERR_INTERNAL;
}

template <typename F>
mcse_status Guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return MCSE_OK;
  } catch (const mcse::Error& e) {
    g_last_error = e.what();
    return StatusFor(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return MCSE_ERR_INTERNAL;
}

void NotNull(const void* p, const char* what) {
  mcse::Require(p != nullptr, mcse::ErrorCode::kInvalidArgument,
                std::string(what) + " must not be null");
}

void CopyName(char (&dst)[32], std::string_view src) {
  std::memset(dst, 0, sizeof(dst));
  std::memcpy(dst, src.data(), std::min(src.size(), sizeof(dst) - 1));
}

mcse::PipelineConfig ToConfig(const mcse_pipeline_config* c) {
  NotNull(c, "pipeline config");
  const auto arch = mcse::ParseArchitecture(c->architecture);
  mcse::Require(arch.has_value(), mcse::ErrorCode::kInvalidArgument,
                std::string("unknown architecture: ") + c->architecture);
  const auto kind = mcse::ParseDervbKind(c->dervb_kind);
  mcse::Require(kind.has_value(), mcse::ErrorCode::kInvalidArgument,
                std::string("unknown dereverberation kind: ") + c->dervb_kind);
  mcse::PipelineConfig cfg;
  cfg.architecture = *arch;
  cfg.dervb_kind = *kind;
  cfg.ref.index = c->reference_channel;
  cfg.mvdr_eps = c->mvdr_eps;
  cfg.wpe.taps = c->wpe_taps;
  cfg.wpe.delay = c->wpe_delay;
  cfg.wpe.iterations = c->wpe_iterations;
  cfg.wpe.eps = c->wpe_eps;
  cfg.wpe.lambda_floor_ratio = c->wpe_lambda_floor;
  cfg.wpd.taps = c->wpd_taps;
  cfg.wpd.delay = c->wpd_delay;
  cfg.wpd.eps = c->wpd_eps;
  cfg.wpd.lambda_floor_ratio = c->wpd_lambda_floor;
  cfg.reestimate_masks = c->reestimate_masks != 0;
  mcse::Require(cfg.wpe.taps >= 0 && cfg.mvdr_eps >= 0.0, mcse::ErrorCode::kInvalidArgument,
                "pipeline config: negative taps or eps");
  if (cfg.wpe.taps > 0) cfg.wpe.Validate();
  cfg.wpd.Validate();
  return cfg;
}

std::optional<mcse::MaskRole> ParseRole(std::string_view name) {
  for (std::size_t i = 0; i < mcse::kNumMaskRoles; ++i) {
    const auto role = static_cast<mcse::MaskRole>(i);
    if (mcse::MaskRoleName(role) == name) return role;
  }
  return std::nullopt;
}

mcse_wave* NewWave(mcse::MultiChannelWave w) { return new mcse_wave{std::move(w)}; }

mcse::MultiChannelWave MonoOf(const mcse_wave* w, const char* what) {
  NotNull(w, what);
  mcse::Require(w->value.NumChannels() == 1, mcse::ErrorCode::kInvalidArgument,
                std::string(what) + " must be mono");
  return w->value;
}

mcse_wave* Enhance(const mcse::MultiChannelWave& mixture,
                   const mcse::MaskProvider& masks, const mcse::PipelineConfig& cfg,
                   size_t* degenerate) {
  const mcse::Spectrogram y = mcse::Stft(mixture);
  mcse::PipelineResult res = mcse::RunPipeline(y, masks, cfg);
  if (degenerate != nullptr) *degenerate = res.degenerate_bins;
  return NewWave(mcse::Istft(res.output));
}

}  // namespace

extern "C" {

const char* mcse_last_error(void) { return g_last_error.c_str(); }

const char* mcse_version(void) { return "0.1.0"; }

const char* mcse_status_name(mcse_status status) {
  switch (status) {
    case MCSE_OK: return "ok";
    case MCSE_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MCSE_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case MCSE_ERR_IO: return "i/o error";
    case MCSE_ERR_NUMERIC: return "numerical failure";
    case MCSE_ERR_DEGENERATE: return "degenerate input";
    case MCSE_ERR_OUT_OF_RANGE: return "out of range";
    case MCSE_ERR_REJECTION_BUDGET: return "rejection budget exhausted";
    case MCSE_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

uint64_t mcse_derive_seed(uint64_t seed, uint64_t stream) {
  return mcse::MixSeed(seed, stream);
}

mcse_status mcse_wave_from_data(const double* data, size_t channels, size_t samples,
                                int sample_rate, mcse_wave** out) {
  return Guard([&] {
    NotNull(out, "out");
    mcse::Require(channels > 0 && (data != nullptr || samples == 0),
                  mcse::ErrorCode::kInvalidArgument, "wave: bad data pointer or channel count");
    mcse::MultiChannelWave w(channels, samples, sample_rate);
    for (size_t r = 0; r < channels; ++r) {
      for (size_t n = 0; n < samples; ++n) w(r, n) = data[r * samples + n];
    }
    w.Validate();
    *out = NewWave(std::move(w));
  });
}

mcse_status mcse_wave_read(const char* path, mcse_wave** out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    *out = NewWave(mcse::ReadWav(path));
  });
}

mcse_status mcse_wave_write(const char* path, const mcse_wave* wave, int pcm16) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(wave, "wave");
    mcse::WriteWav(path, wave->value,
                   pcm16 ? mcse::WavEncoding::kPcm16 : mcse::WavEncoding::kFloat32);
  });
}

mcse_status mcse_wave_select_channel(const mcse_wave* wave, size_t channel,
                                     mcse_wave** out) {
  return Guard([&] {
    NotNull(wave, "wave");
    NotNull(out, "out");
    mcse::Require(channel < wave->value.NumChannels(), mcse::ErrorCode::kOutOfRange,
                  "channel out of range");
    *out = NewWave(wave->value.SelectChannel(channel));
  });
}

size_t mcse_wave_channels(const mcse_wave* w) { return w ? w->value.NumChannels() : 0; }
size_t mcse_wave_samples(const mcse_wave* w) { return w ? w->value.NumSamples() : 0; }
int mcse_wave_sample_rate(const mcse_wave* w) { return w ? w->value.SampleRate() : 0; }
const double* mcse_wave_data(const mcse_wave* w) {
  return w ? w->value.Data().data() : nullptr;
}
void mcse_wave_free(mcse_wave* w) { delete w; }

mcse_status mcse_stft(const mcse_wave* wave, mcse_spec** out) {
  return Guard([&] {
    NotNull(wave, "wave");
    NotNull(out, "out");
    *out = new mcse_spec{mcse::Stft(wave->value)};
  });
}

mcse_status mcse_istft(const mcse_spec* spec, mcse_wave** out) {
  return Guard([&] {
    NotNull(spec, "spec");
    NotNull(out, "out");
    *out = NewWave(mcse::Istft(spec->value));
  });
}

size_t mcse_spec_channels(const mcse_spec* s) { return s ? s->value.NumChannels() : 0; }
size_t mcse_spec_frames(const mcse_spec* s) { return s ? s->value.NumFrames() : 0; }
size_t mcse_spec_bins(const mcse_spec* s) { return s ? s->value.NumBins() : 0; }
void mcse_spec_free(mcse_spec* s) { delete s; }

mcse_status mcse_mask_load(const char* path, mcse_mask** out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    *out = new mcse_mask{mcse::LoadMask(path)};
  });
}

mcse_status mcse_mask_save(const char* path, const mcse_mask* mask) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(mask, "mask");
    mcse::SaveMask(path, mask->value);
  });
}

mcse_status mcse_mask_oracle(const mcse_spec* target, const mcse_spec* mixture,
                             size_t channel, mcse_mask** out) {
  return Guard([&] {
    NotNull(target, "target");
    NotNull(mixture, "mixture");
    NotNull(out, "out");
    *out = new mcse_mask{mcse::OracleComplexMask(target->value, mixture->value, channel)};
  });
}

size_t mcse_mask_frames(const mcse_mask* m) { return m ? m->value.NumFrames() : 0; }
size_t mcse_mask_bins(const mcse_mask* m) { return m ? m->value.NumBins() : 0; }
void mcse_mask_free(mcse_mask* m) { delete m; }

mcse_status mcse_pipeline_defaults(const char* architecture, const char* dervb_kind,
                                   mcse_pipeline_config* out) {
  return Guard([&] {
    NotNull(architecture, "architecture");
    NotNull(out, "out");
    const auto arch = mcse::ParseArchitecture(architecture);
    mcse::Require(arch.has_value(), mcse::ErrorCode::kInvalidArgument,
                  std::string("unknown architecture: ") + architecture);
    auto kind = mcse::DervbKind::kWpeMasked;
    if (dervb_kind != nullptr) {
      const auto k = mcse::ParseDervbKind(dervb_kind);
      mcse::Require(k.has_value(), mcse::ErrorCode::kInvalidArgument,
                    std::string("unknown dereverberation kind: ") + dervb_kind);
      kind = *k;
    }
    const mcse::PipelineConfig cfg = mcse::PipelineConfig::Defaults(*arch, kind);
    CopyName(out->architecture, mcse::ArchitectureName(cfg.architecture));
    CopyName(out->dervb_kind, mcse::DervbKindName(cfg.dervb_kind));
    out->reference_channel = cfg.ref.index;
    out->mvdr_eps = cfg.mvdr_eps;
    out->wpe_taps = cfg.wpe.taps;
    out->wpe_delay = cfg.wpe.delay;
    out->wpe_iterations = cfg.wpe.iterations;
    out->wpe_eps = cfg.wpe.eps;
    out->wpe_lambda_floor = cfg.wpe.lambda_floor_ratio;
    out->wpd_taps = cfg.wpd.taps;
    out->wpd_delay = cfg.wpd.delay;
    out->wpd_eps = cfg.wpd.eps;
    out->wpd_lambda_floor = cfg.wpd.lambda_floor_ratio;
    out->reestimate_masks = cfg.reestimate_masks ? 1 : 0;
  });
}

mcse_status mcse_pipeline_validate(const mcse_pipeline_config* config) {
  return Guard([&] { ToConfig(config); });
}

mcse_status mcse_enhance_oracle(const mcse_wave* mixture, const mcse_wave* target_reverb,
                                const mcse_wave* target_early,
                                const mcse_wave* interferer_late,
                                const mcse_pipeline_config* config, mcse_wave** out,
                                size_t* degenerate_bins) {
  return Guard([&] {
    NotNull(mixture, "mixture");
    NotNull(out, "out");
    const mcse::PipelineConfig cfg = ToConfig(config);
    const mcse::MultiChannelWave reverb = MonoOf(target_reverb, "target_reverb");
    const mcse::MultiChannelWave early = MonoOf(target_early, "target_early");
    const std::size_t n = mixture->value.NumSamples();
    mcse::Require(reverb.NumSamples() == n && early.NumSamples() == n,
                  mcse::ErrorCode::kDimensionMismatch,
                  "oracle references must match the mixture length");
    std::optional<mcse::Spectrogram> late;
    if (interferer_late != nullptr) {
      const mcse::MultiChannelWave w = MonoOf(interferer_late, "interferer_late");
      mcse::Require(w.NumSamples() == n, mcse::ErrorCode::kDimensionMismatch,
                    "oracle references must match the mixture length");
      late = mcse::Stft(w);
    }
    const mcse::OracleMaskProvider masks(mcse::Stft(reverb), mcse::Stft(early), std::move(late));
    *out = Enhance(mixture->value, masks, cfg, degenerate_bins);
  });
}

mcse_status mcse_mask_set_create(mcse_mask_set** out) {
  return Guard([&] {
    NotNull(out, "out");
    *out = new mcse_mask_set{};
  });
}

mcse_status mcse_mask_set_put(mcse_mask_set* set, const char* role, const mcse_mask* mask) {
  return Guard([&] {
    NotNull(set, "mask set");
    NotNull(role, "role");
    NotNull(mask, "mask");
    const auto r = ParseRole(role);
    mcse::Require(r.has_value(), mcse::ErrorCode::kInvalidArgument,
                  std::string("unknown mask role: ") + role);
    set->value.Set(*r, mask->value);
  });
}

void mcse_mask_set_free(mcse_mask_set* set) { delete set; }

mcse_status mcse_enhance_masks(const mcse_wave* mixture, const mcse_mask_set* masks,
                               const mcse_pipeline_config* config, mcse_wave** out,
                               size_t* degenerate_bins) {
  return Guard([&] {
    NotNull(mixture, "mixture");
    NotNull(masks, "masks");
    NotNull(out, "out");
    *out = Enhance(mixture->value, masks->value, ToConfig(config), degenerate_bins);
  });
}

mcse_status mcse_scene_sample(uint64_t seed, const char* const* speech, size_t num_speech,
                              const char* const* noise, size_t num_noise,
                              mcse_scene** out) {
  return Guard([&] {
    NotNull(out, "out");
    mcse::Require(num_speech == 0 || speech != nullptr, mcse::ErrorCode::kInvalidArgument,
                  "speech manifest pointer is null");
    mcse::Require(num_noise == 0 || noise != nullptr, mcse::ErrorCode::kInvalidArgument,
                  "noise manifest pointer is null");
    std::vector<std::string> sp(speech, speech + num_speech);
    std::vector<std::string> ns(noise, noise + num_noise);
    *out = new mcse_scene{mcse::SampleScene(seed, sp, ns)};
  });
}

mcse_status mcse_scene_from_json(const char* json, mcse_scene** out) {
  return Guard([&] {
    NotNull(json, "json");
    NotNull(out, "out");
    mcse::RoomScene sc = mcse::SceneFromJson(json);
    sc.Validate();
    *out = new mcse_scene{std::move(sc)};
  });
}

mcse_status mcse_scene_to_json(const mcse_scene* scene, char** out) {
  return Guard([&] {
    NotNull(scene, "scene");
    NotNull(out, "out");
    const std::string s = mcse::SceneToJson(scene->value);
    char* buf = new char[s.size() + 1];
    std::memcpy(buf, s.c_str(), s.size() + 1);
    *out = buf;
  });
}

double mcse_scene_t60(const mcse_scene* s) { return s ? s->value.t60 : 0.0; }
double mcse_scene_snr_db(const mcse_scene* s) { return s ? s->value.snr_db : 0.0; }
double mcse_scene_sir_db(const mcse_scene* s) { return s ? s->value.sir_db : 0.0; }
uint64_t mcse_scene_seed(const mcse_scene* s) { return s ? s->value.seed : 0; }
const char* mcse_scene_target_source(const mcse_scene* s) {
  return s ? s->value.target_source.c_str() : "";
}
const char* mcse_scene_interferer_source(const mcse_scene* s) {
  return s ? s->value.interferer_source.c_str() : "";
}
const char* mcse_scene_noise_source(const mcse_scene* s) {
  return s ? s->value.noise_source.c_str() : "";
}
void mcse_scene_set_interferer_offset(mcse_scene* s, size_t samples) {
  if (s) s->value.interferer_offset = samples;
}
void mcse_scene_free(mcse_scene* s) { delete s; }
void mcse_string_free(char* s) { delete[] s; }

mcse_status mcse_simulate(const mcse_wave* target, const mcse_wave* interferer,
                          const mcse_wave* noise, const mcse_scene* scene,
                          mcse_mixture** out) {
  return Guard([&] {
    NotNull(target, "target");
    NotNull(interferer, "interferer");
    NotNull(noise, "noise");
    NotNull(scene, "scene");
    NotNull(out, "out");
    *out = new mcse_mixture{
        mcse::SimulateMixture(target->value, interferer->value, noise->value, scene->value)};
  });
}

mcse_status mcse_mixture_get(const mcse_mixture* m, const char* which, mcse_wave** out) {
  return Guard([&] {
    NotNull(m, "mixture");
    NotNull(which, "which");
    NotNull(out, "out");
    const std::string_view w(which);
    const mcse::SimulatedMixture& v = m->value;
    const mcse::MultiChannelWave* src = nullptr;
    if (w == "mixture") src = &v.mixture;
    else if (w == "target_reverb") src = &v.target_reverb;
    else if (w == "target_early") src = &v.target_early;
    else if (w == "target_dry") src = &v.target_dry;
    else if (w == "interferer") src = &v.interferer;
    else if (w == "interferer_late") src = &v.interferer_late;
    else if (w == "noise") src = &v.noise;
    mcse::Require(src != nullptr, mcse::ErrorCode::kInvalidArgument,
                  std::string("unknown mixture signal: ") + which);
    *out = NewWave(*src);
  });
}

void mcse_mixture_free(mcse_mixture* m) { delete m; }

mcse_status mcse_sisnr(const double* estimate, const double* reference, size_t n,
                       double* out) {
  return Guard([&] {
    NotNull(estimate, "estimate");
    NotNull(reference, "reference");
    NotNull(out, "out");
    *out = mcse::Sisnr({estimate, n}, {reference, n});
  });
}

mcse_status mcse_stoi(const double* estimate, const double* reference, size_t n,
                      int sample_rate, double* out) {
  return Guard([&] {
    NotNull(estimate, "estimate");
    NotNull(reference, "reference");
    NotNull(out, "out");
    *out = mcse::Stoi({estimate, n}, {reference, n}, sample_rate);
  });
}

mcse_status mcse_srmr(const double* wave, size_t n, int sample_rate, double* out) {
  return Guard([&] {
    NotNull(wave, "wave");
    NotNull(out, "out");
    *out = mcse::Srmr({wave, n}, sample_rate);
  });
}

mcse_status mcse_synth_speech(uint64_t seed, size_t samples, int sample_rate,
                              mcse_wave** out) {
  return Guard([&] {
    NotNull(out, "out");
    const auto x = mcse::SpeechLikeSource(seed, samples, sample_rate);
    *out = NewWave(mcse::MultiChannelWave::Mono(x, sample_rate));
  });
}

mcse_status mcse_synth_noise(uint64_t seed, size_t samples, int sample_rate,
                             double exponent, mcse_wave** out) {
  return Guard([&] {
    NotNull(out, "out");
    const auto x = mcse::ColoredNoise(seed, samples, sample_rate, exponent);
    *out = NewWave(mcse::MultiChannelWave::Mono(x, sample_rate));
  });
}

}  // extern "C"
