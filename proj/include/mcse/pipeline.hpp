#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "mcse/dereverb.hpp"
#include "mcse/masks.hpp"
#include "mcse/mvdr.hpp"
#include "mcse/stft.hpp"
#include "mcse/wpd.hpp"

namespace mcse {

enum class Architecture { kSepOnly, kSepThenDervb, kDervbThenSep, kJointWpd };
enum class DervbKind { kWpeIterative, kWpeMasked, kSpecM };

std::string_view ArchitectureName(Architecture a);
std::string_view DervbKindName(DervbKind k);
// Accepts the names above ("sep_only", "sep_then_dervb", "dervb_then_sep",
// "joint_wpd"; "wpe_iterative", "wpe_masked", "specm").
std::optional<Architecture> ParseArchitecture(std::string_view name);
std::optional<DervbKind> ParseDervbKind(std::string_view name);

struct PipelineConfig {
  Architecture architecture = Architecture::kSepOnly;
  DervbKind dervb_kind = DervbKind::kWpeMasked;
  ReferenceChannel ref;
  double mvdr_eps = kMvdrFloorEps;
  // Dereverberation stage; taps == 0 disables the stage.
  WpeConfig wpe;
  WpdConfig wpd;
  // Recompute oracle masks on each stage's own input instead of reusing
  // mixture-domain masks.
  bool reestimate_masks = true;

  // Stage defaults for an architecture: single-channel WPE L=18 eps=1e-5
  // after separation, multi-channel WPE L=2 eps=1e-6 before separation,
  // WPD L=1 eps=1e-4, MVDR eps=1e-5, D=2 throughout.
  static PipelineConfig Defaults(Architecture arch,
                                 DervbKind kind = DervbKind::kWpeMasked);
};

enum class MaskRole {
  kSeparationTarget,
  kSeparationNoise,
  kDereverb,  // WPE signal power mask
  kSpecM,
  kWpdTarget,
  kWpdPower,
};
inline constexpr std::size_t kNumMaskRoles = 6;
std::string_view MaskRoleName(MaskRole role);

struct MaskRequest {
  MaskRole role;
  const Spectrogram& stage_input;
  std::size_t channel;
  // True when the stage input has already been dereverberated.
  bool input_dereverberated;
  // True when the stage input is a separated target rather than the mixture.
  bool input_separated = false;
};

class MaskProvider {
 public:
  virtual ~MaskProvider() = default;
  virtual ComplexMask Mask(const MaskRequest& request) const = 0;
};

// Computes masks from ground-truth references, all single channel at the
// reference microphone: the reverberant target image, its direct+early
// ("desired") part and optionally the interferer's late reverberation.
//  - separation target: the image, or the desired signal on input that was
//    already dereverberated; separation noise: input minus that target.
//  - WPE power: input minus the known late reverberation (the target's, plus
//    the interferer's when the input is the mixture).
//  - SpecM: the desired signal on a separated input, the mixture minus all
//    known late reverberation otherwise.
//  - WPD target and power: the desired signal.
// Every mask is the chosen signal divided by the input's reference channel.
class OracleMaskProvider : public MaskProvider {
 public:
  OracleMaskProvider(Spectrogram target_image, Spectrogram target_desired,
                     std::optional<Spectrogram> interferer_late = std::nullopt);
  ComplexMask Mask(const MaskRequest& request) const override;

 private:
  Spectrogram image_;
  Spectrogram desired_;
  std::optional<Spectrogram> interferer_late_;
};

// Serves externally estimated masks; missing roles are an error.
class FixedMaskProvider : public MaskProvider {
 public:
  void Set(MaskRole role, ComplexMask mask);
  bool Has(MaskRole role) const;
  ComplexMask Mask(const MaskRequest& request) const override;

 private:
  std::array<std::optional<ComplexMask>, kNumMaskRoles> masks_;
};

struct PipelineResult {
  Spectrogram output;  // single channel
  std::size_t degenerate_bins = 0;
};

PipelineResult RunSepOnly(const Spectrogram& mixture, const MaskProvider& masks,
                          const PipelineConfig& cfg);
PipelineResult RunSepThenDervb(const Spectrogram& mixture,
                               const MaskProvider& masks,
                               const PipelineConfig& cfg);
PipelineResult RunDervbThenSep(const Spectrogram& mixture,
                               const MaskProvider& masks,
                               const PipelineConfig& cfg);
PipelineResult RunJointWpd(const Spectrogram& mixture, const MaskProvider& masks,
                           const PipelineConfig& cfg);
// Dispatches on cfg.architecture.
PipelineResult RunPipeline(const Spectrogram& mixture, const MaskProvider& masks,
                           const PipelineConfig& cfg);

// Applies the configured dereverberation kind to `input`; exposed for
// evaluating the stage on its own.
Spectrogram Dereverberate(const Spectrogram& input, const MaskProvider& masks,
                          const PipelineConfig& cfg,
                          const Spectrogram& mask_domain, bool input_separated);

}  // namespace mcse
