/* C interface to the mcse speech enhancement library.
 *
 * Objects are opaque handles created by the library and released with the
 * matching *_free function. Every fallible call returns an mcse_status; on
 * failure mcse_last_error() describes the problem (per thread). Waves are
 * stored channel-major: sample n of channel r is data[r * samples + n].
 */
#ifndef MCSE_MCSE_H_
#define MCSE_MCSE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(MCSE_BUILDING_LIBRARY)
#define MCSE_API __attribute__((visibility("default")))
#else
#define MCSE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mcse_status {
  MCSE_OK = 0,
  MCSE_ERR_INVALID_ARGUMENT = 1,
  MCSE_ERR_DIMENSION_MISMATCH = 2,
  MCSE_ERR_IO = 3,
  MCSE_ERR_NUMERIC = 4,
  MCSE_ERR_DEGENERATE = 5,
  MCSE_ERR_OUT_OF_RANGE = 6,
  MCSE_ERR_REJECTION_BUDGET = 7,
  MCSE_ERR_INTERNAL = 100
} mcse_status;

MCSE_API const char* mcse_last_error(void);
MCSE_API const char* mcse_version(void);
MCSE_API const char* mcse_status_name(mcse_status status);

/* Independent per-item seed derived from a global seed. */
MCSE_API uint64_t mcse_derive_seed(uint64_t seed, uint64_t stream);

/* ---- waves ---- */
typedef struct mcse_wave mcse_wave;

MCSE_API mcse_status mcse_wave_from_data(const double* data, size_t channels,
                                         size_t samples, int sample_rate,
                                         mcse_wave** out);
MCSE_API mcse_status mcse_wave_read(const char* path, mcse_wave** out);
/* pcm16 != 0 writes 16-bit PCM, otherwise float32. */
MCSE_API mcse_status mcse_wave_write(const char* path, const mcse_wave* wave,
                                     int pcm16);
MCSE_API mcse_status mcse_wave_select_channel(const mcse_wave* wave,
                                              size_t channel, mcse_wave** out);
MCSE_API size_t mcse_wave_channels(const mcse_wave* wave);
MCSE_API size_t mcse_wave_samples(const mcse_wave* wave);
MCSE_API int mcse_wave_sample_rate(const mcse_wave* wave);
MCSE_API const double* mcse_wave_data(const mcse_wave* wave);
MCSE_API void mcse_wave_free(mcse_wave* wave);

/* ---- spectrograms (512-point STFT, hop 256, sqrt-Hann) ---- */
typedef struct mcse_spec mcse_spec;

MCSE_API mcse_status mcse_stft(const mcse_wave* wave, mcse_spec** out);
MCSE_API mcse_status mcse_istft(const mcse_spec* spec, mcse_wave** out);
MCSE_API size_t mcse_spec_channels(const mcse_spec* spec);
MCSE_API size_t mcse_spec_frames(const mcse_spec* spec);
MCSE_API size_t mcse_spec_bins(const mcse_spec* spec);
MCSE_API void mcse_spec_free(mcse_spec* spec);

/* ---- masks ---- */
typedef struct mcse_mask mcse_mask;

MCSE_API mcse_status mcse_mask_load(const char* path, mcse_mask** out);
MCSE_API mcse_status mcse_mask_save(const char* path, const mcse_mask* mask);
/* target / mixture on `channel`, magnitude clipped at 10. */
MCSE_API mcse_status mcse_mask_oracle(const mcse_spec* target,
                                      const mcse_spec* mixture, size_t channel,
                                      mcse_mask** out);
MCSE_API size_t mcse_mask_frames(const mcse_mask* mask);
MCSE_API size_t mcse_mask_bins(const mcse_mask* mask);
MCSE_API void mcse_mask_free(mcse_mask* mask);

/* ---- enhancement pipelines ---- */

/* Architectures: "sep_only", "sep_then_dervb", "dervb_then_sep", "joint_wpd".
 * Dereverberation kinds: "wpe_iterative", "wpe_masked", "specm". */
typedef struct mcse_pipeline_config {
  char architecture[32];
  char dervb_kind[32];
  size_t reference_channel;
  double mvdr_eps;
  int wpe_taps; /* 0 disables the WPE stage */
  int wpe_delay;
  int wpe_iterations;
  double wpe_eps;
  double wpe_lambda_floor; /* ratio to the mean input power */
  int wpd_taps;
  int wpd_delay;
  double wpd_eps;
  double wpd_lambda_floor;
  int reestimate_masks;
} mcse_pipeline_config;

/* Fills `out` with the stage defaults for an architecture. A null
 * dervb_kind selects "wpe_masked". */
MCSE_API mcse_status mcse_pipeline_defaults(const char* architecture,
                                            const char* dervb_kind,
                                            mcse_pipeline_config* out);

/* Checks names and stage parameters without running anything. */
MCSE_API mcse_status mcse_pipeline_validate(const mcse_pipeline_config* config);

/* Oracle masks from the reference-channel reverberant target image, its
 * direct+early part and (optional, may be null) the interferer's late
 * reverberation; all mono, mixture length. Returns a mono estimate. */
MCSE_API mcse_status mcse_enhance_oracle(const mcse_wave* mixture,
                                         const mcse_wave* target_reverb,
                                         const mcse_wave* target_early,
                                         const mcse_wave* interferer_late,
                                         const mcse_pipeline_config* config,
                                         mcse_wave** out,
                                         size_t* degenerate_bins);

/* Externally estimated masks by role: "sep_target", "sep_noise", "dervb", "specm",
 * "wpd_target", "wpd_power". */
typedef struct mcse_mask_set mcse_mask_set;

MCSE_API mcse_status mcse_mask_set_create(mcse_mask_set** out);
/* Copies the mask. */
MCSE_API mcse_status mcse_mask_set_put(mcse_mask_set* set, const char* role,
                                       const mcse_mask* mask);
MCSE_API void mcse_mask_set_free(mcse_mask_set* set);
MCSE_API mcse_status mcse_enhance_masks(const mcse_wave* mixture,
                                        const mcse_mask_set* masks,
                                        const mcse_pipeline_config* config,
                                        mcse_wave** out,
                                        size_t* degenerate_bins);

/* ---- scenes and simulation ---- */
typedef struct mcse_scene mcse_scene;

MCSE_API mcse_status mcse_scene_sample(uint64_t seed,
                                       const char* const* speech,
                                       size_t num_speech,
                                       const char* const* noise,
                                       size_t num_noise, mcse_scene** out);
MCSE_API mcse_status mcse_scene_from_json(const char* json, mcse_scene** out);
/* Caller releases the string with mcse_string_free. */
MCSE_API mcse_status mcse_scene_to_json(const mcse_scene* scene, char** out);
MCSE_API double mcse_scene_t60(const mcse_scene* scene);
MCSE_API double mcse_scene_snr_db(const mcse_scene* scene);
MCSE_API double mcse_scene_sir_db(const mcse_scene* scene);
MCSE_API uint64_t mcse_scene_seed(const mcse_scene* scene);
MCSE_API const char* mcse_scene_target_source(const mcse_scene* scene);
MCSE_API const char* mcse_scene_interferer_source(const mcse_scene* scene);
/* Empty string when the scene uses synthetic noise. */
MCSE_API const char* mcse_scene_noise_source(const mcse_scene* scene);
MCSE_API void mcse_scene_set_interferer_offset(mcse_scene* scene,
                                               size_t samples);
MCSE_API void mcse_scene_free(mcse_scene* scene);
MCSE_API void mcse_string_free(char* s);

typedef struct mcse_mixture mcse_mixture;

MCSE_API mcse_status mcse_simulate(const mcse_wave* target,
                                   const mcse_wave* interferer,
                                   const mcse_wave* noise,
                                   const mcse_scene* scene,
                                   mcse_mixture** out);
/* Copies one signal out: "mixture", "target_reverb", "target_early",
 * "target_dry", "interferer", "interferer_late", "noise". */
MCSE_API mcse_status mcse_mixture_get(const mcse_mixture* mixture,
                                      const char* which, mcse_wave** out);
MCSE_API void mcse_mixture_free(mcse_mixture* mixture);

/* ---- metrics (mono sample arrays) ---- */
MCSE_API mcse_status mcse_sisnr(const double* estimate, const double* reference,
                                size_t n, double* out);
MCSE_API mcse_status mcse_stoi(const double* estimate, const double* reference,
                               size_t n, int sample_rate, double* out);
MCSE_API mcse_status mcse_srmr(const double* wave, size_t n, int sample_rate,
                               double* out);

/* ---- synthetic sources ---- */
MCSE_API mcse_status mcse_synth_speech(uint64_t seed, size_t samples,
                                       int sample_rate, mcse_wave** out);
MCSE_API mcse_status mcse_synth_noise(uint64_t seed, size_t samples,
                                      int sample_rate, double exponent,
                                      mcse_wave** out);

#ifdef __cplusplus
}
#endif

#endif /* MCSE_MCSE_H_ */
