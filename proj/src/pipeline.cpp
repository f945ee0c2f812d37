#include "mcse/pipeline.hpp"

#include <utility>

#include "mcse/error.hpp"

namespace mcse {

namespace {

constexpr std::pair<Architecture, std::string_view> kArchNames[] = {
    {Architecture::kSepOnly, "sep_only"},
    {Architecture::kSepThenDervb, "sep_then_dervb"},
    {Architecture::kDervbThenSep, "dervb_then_sep"},
    {Architecture::kJointWpd, "joint_wpd"},
};

constexpr std::pair<DervbKind, std::string_view> kDervbNames[] = {
    {DervbKind::kWpeIterative, "wpe_iterative"},
    {DervbKind::kWpeMasked, "wpe_masked"},
    {DervbKind::kSpecM, "specm"},
};

std::size_t RoleIndex(MaskRole role) { return static_cast<std::size_t>(role); }

ComplexMask Request(const MaskProvider& masks, MaskRole role,
                    const Spectrogram& stage_input, const Spectrogram& mixture,
                    const PipelineConfig& cfg, bool dereverberated,
                    bool separated = false) {
  // Without re-estimation every mask lives on the mixture's grid.
  const Spectrogram& domain = cfg.reestimate_masks ? stage_input : mixture;
  const std::size_t channel = domain.NumChannels() == 1 ? 0 : cfg.ref.index;
  ComplexMask mask = masks.Mask({role, domain, channel, dereverberated, separated});
  mask.RequireMatches(stage_input, "pipeline mask");
  return mask;
}

bool DervbEnabled(const PipelineConfig& cfg) {
  return cfg.dervb_kind == DervbKind::kSpecM || cfg.wpe.taps > 0;
}

}  // namespace

std::string_view ArchitectureName(Architecture a) {
  for (const auto& [value, name] : kArchNames) {
    if (value == a) return name;
  }
  return "unknown";
}

std::string_view DervbKindName(DervbKind k) {
  for (const auto& [value, name] : kDervbNames) {
    if (value == k) return name;
  }
  return "unknown";
}

std::optional<Architecture> ParseArchitecture(std::string_view name) {
  for (const auto& [value, n] : kArchNames) {
    if (n == name) return value;
  }
  return std::nullopt;
}

std::optional<DervbKind> ParseDervbKind(std::string_view name) {
  for (const auto& [value, n] : kDervbNames) {
    if (n == name) return value;
  }
  return std::nullopt;
}

std::string_view MaskRoleName(MaskRole role) {
  switch (role) {
    case MaskRole::kSeparationTarget: return "sep_target";
    case MaskRole::kSeparationNoise: return "sep_noise";
    case MaskRole::kDereverb: return "dervb";
    case MaskRole::kSpecM: return "specm";
    case MaskRole::kWpdTarget: return "wpd_target";
    case MaskRole::kWpdPower: return "wpd_power";
  }
  return "unknown";
}

PipelineConfig PipelineConfig::Defaults(Architecture arch, DervbKind kind) {
  PipelineConfig cfg;
  cfg.architecture = arch;
  cfg.dervb_kind = kind;
  cfg.mvdr_eps = kMvdrFloorEps;
  cfg.wpe = WpeConfig::ForChannels(arch == Architecture::kSepThenDervb ? 1 : 2);
  cfg.wpe.delay = kWpeDelay;
  cfg.wpd = WpdConfig{};
  return cfg;
}

OracleMaskProvider::OracleMaskProvider(Spectrogram target_image,
                                       Spectrogram target_desired,
                                       std::optional<Spectrogram> interferer_late)
    : image_(std::move(target_image)),
      desired_(std::move(target_desired)),
      interferer_late_(std::move(interferer_late)) {
  Require(image_.NumChannels() == 1 && desired_.NumChannels() == 1,
          ErrorCode::kDimensionMismatch,
          "oracle masks expect single-channel references");
  Require(image_.SameFrameGrid(desired_), ErrorCode::kDimensionMismatch,
          "oracle references must share a frame grid");
  if (interferer_late_) {
    Require(interferer_late_->NumChannels() == 1 && interferer_late_->SameFrameGrid(image_),
            ErrorCode::kDimensionMismatch,
            "oracle interferer reference must be single channel on the same grid");
  }
}

ComplexMask OracleMaskProvider::Mask(const MaskRequest& req) const {
  const Spectrogram& input = req.stage_input;
  Require(input.SameFrameGrid(image_), ErrorCode::kDimensionMismatch,
          "oracle mask: stage input grid differs from the references");
  const bool separation =
      req.role == MaskRole::kSeparationTarget || req.role == MaskRole::kSeparationNoise;
  if (req.role == MaskRole::kWpdTarget || req.role == MaskRole::kWpdPower ||
      (req.role == MaskRole::kSpecM && req.input_separated) ||
      (req.role == MaskRole::kSeparationTarget && req.input_dereverberated)) {
    return OracleComplexMask(desired_, input, req.channel);
  }
  if (req.role == MaskRole::kSeparationTarget) {
    return OracleComplexMask(image_, input, req.channel);
  }
  // The remaining roles subtract known components from the input.
  Spectrogram residual = input.SelectChannel(req.channel);
  auto subtract = [&](const Spectrogram& s, double sign) {
    for (std::size_t t = 0; t < residual.NumFrames(); ++t) {
      for (std::size_t f = 0; f < residual.NumBins(); ++f) residual(0, t, f) -= sign * s(0, t, f);
    }
  };
  if (separation) {
    subtract(req.input_dereverberated ? desired_ : image_, 1.0);
  } else {
    subtract(image_, 1.0);
    subtract(desired_, -1.0);
    if (!req.input_separated && interferer_late_) subtract(*interferer_late_, 1.0);
  }
  return OracleComplexMask(residual, input, req.channel);
}

void FixedMaskProvider::Set(MaskRole role, ComplexMask mask) {
  masks_[RoleIndex(role)] = std::move(mask);
}

bool FixedMaskProvider::Has(MaskRole role) const {
  return masks_[RoleIndex(role)].has_value();
}

ComplexMask FixedMaskProvider::Mask(const MaskRequest& req) const {
  const auto& m = masks_[RoleIndex(req.role)];
  if (!m) {
    Fail(ErrorCode::kInvalidArgument,
         "missing mask for role " + std::string(MaskRoleName(req.role)));
  }
  return *m;
}

Spectrogram Dereverberate(const Spectrogram& input, const MaskProvider& masks,
                          const PipelineConfig& cfg,
                          const Spectrogram& mask_domain, bool input_separated) {
  if (!DervbEnabled(cfg)) return input;
  switch (cfg.dervb_kind) {
    case DervbKind::kWpeIterative:
      return WpeIterative(input, cfg.wpe);
    case DervbKind::kWpeMasked:
      return WpeMasked(
          input, Request(masks, MaskRole::kDereverb, input, mask_domain, cfg, false, input_separated),
          cfg.wpe);
    case DervbKind::kSpecM:
      return SpecmApply(
          input, Request(masks, MaskRole::kSpecM, input, mask_domain, cfg, false, input_separated));
  }
  Fail(ErrorCode::kInvalidArgument, "unknown dereverberation kind");
}

PipelineResult RunSepOnly(const Spectrogram& mixture, const MaskProvider& masks,
                          const PipelineConfig& cfg) {
  const ComplexMask mx =
      Request(masks, MaskRole::kSeparationTarget, mixture, mixture, cfg, false);
  const ComplexMask mn =
      Request(masks, MaskRole::kSeparationNoise, mixture, mixture, cfg, false);
  SeparationResult sep = SeparateMvdr(mixture, mx, mn, cfg.ref, cfg.mvdr_eps);
  return {std::move(sep.output), sep.weights.NumDegenerate()};
}

PipelineResult RunSepThenDervb(const Spectrogram& mixture,
                               const MaskProvider& masks,
                               const PipelineConfig& cfg) {
  PipelineResult sep = RunSepOnly(mixture, masks, cfg);
  sep.output = Dereverberate(sep.output, masks, cfg, mixture, true);
  return sep;
}

PipelineResult RunDervbThenSep(const Spectrogram& mixture,
                               const MaskProvider& masks,
                               const PipelineConfig& cfg) {
  const bool enabled = DervbEnabled(cfg);
  const Spectrogram dervb = Dereverberate(mixture, masks, cfg, mixture, false);
  const ComplexMask mx =
      Request(masks, MaskRole::kSeparationTarget, dervb, mixture, cfg, enabled);
  const ComplexMask mn =
      Request(masks, MaskRole::kSeparationNoise, dervb, mixture, cfg, enabled);
  SeparationResult sep = SeparateMvdr(dervb, mx, mn, cfg.ref, cfg.mvdr_eps);
  return {std::move(sep.output), sep.weights.NumDegenerate()};
}

PipelineResult RunJointWpd(const Spectrogram& mixture, const MaskProvider& masks,
                           const PipelineConfig& cfg) {
  const ComplexMask mx = Request(masks, MaskRole::kWpdTarget, mixture, mixture, cfg, false);
  const ComplexMask ml = Request(masks, MaskRole::kWpdPower, mixture, mixture, cfg, false);
  WpdResult res = WpdEnhance(mixture, mx, ml, cfg.wpd, cfg.ref);
  return {std::move(res.output), res.weights.NumDegenerate()};
}

PipelineResult RunPipeline(const Spectrogram& mixture, const MaskProvider& masks,
                           const PipelineConfig& cfg) {
  Require(cfg.ref.index < mixture.NumChannels(), ErrorCode::kOutOfRange,
          "pipeline: reference channel out of range");
  switch (cfg.architecture) {
    case Architecture::kSepOnly: return RunSepOnly(mixture, masks, cfg);
    case Architecture::kSepThenDervb: return RunSepThenDervb(mixture, masks, cfg);
    case Architecture::kDervbThenSep: return RunDervbThenSep(mixture, masks, cfg);
    case Architecture::kJointWpd: return RunJointWpd(mixture, masks, cfg);
  }
  Fail(ErrorCode::kInvalidArgument, "unknown architecture");
}

}  // namespace mcse
