#include "mcse/dereverb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mcse/error.hpp"

namespace mcse {

void WpeConfig::Validate() const {
  Require(taps >= 1, ErrorCode::kInvalidArgument, "WPE taps must be >= 1");
  Require(delay >= 1, ErrorCode::kInvalidArgument, "WPE delay must be >= 1");
  Require(iterations >= 0, ErrorCode::kInvalidArgument,
          "WPE iterations must be >= 0");
  Require(eps >= 0.0, ErrorCode::kInvalidArgument, "WPE eps must be >= 0");
  Require(lambda_floor_ratio > 0.0, ErrorCode::kInvalidArgument,
          "WPE lambda floor ratio must be positive");
}

WpeConfig WpeConfig::ForChannels(std::size_t channels) {
  WpeConfig cfg;
  if (channels == 1) {
    cfg.taps = kWpeTapsSingleChannel;
    cfg.eps = kWpeEpsSingleChannel;
  } else {
    cfg.taps = kWpeTapsMultiChannel;
    cfg.eps = kWpeEpsMultiChannel;
  }
  return cfg;
}

CVector StackDelayed(const Spectrogram& spec, int taps, int delay,
                     std::ptrdiff_t t, std::size_t f) {
  const std::size_t channels = spec.NumChannels();
  CVector v = CVector::Zero(static_cast<Eigen::Index>(taps * channels));
  for (int l = 0; l < taps; ++l) {
    const std::ptrdiff_t src = t - delay - l;
    if (src < 0 || src >= static_cast<std::ptrdiff_t>(spec.NumFrames())) continue;
    for (std::size_t r = 0; r < channels; ++r) {
      v(static_cast<Eigen::Index>(l * channels + r)) =
          spec(r, static_cast<std::size_t>(src), f);
    }
  }
  return v;
}

Eigen::MatrixXd SignalPower(const Spectrogram& spec, const ComplexMask* mask) {
  if (mask != nullptr) mask->RequireMatches(spec, "signal power");
  const double inv_r = 1.0 / static_cast<double>(spec.NumChannels());
  Eigen::MatrixXd lambda(spec.NumFrames(), spec.NumBins());
  for (std::size_t t = 0; t < spec.NumFrames(); ++t) {
    for (std::size_t f = 0; f < spec.NumBins(); ++f) {
      double p = 0.0;
      for (std::size_t r = 0; r < spec.NumChannels(); ++r) p += std::norm(spec(r, t, f));
      p *= inv_r;
      lambda(t, f) = mask != nullptr ? std::norm((*mask)(t, f)) * p : p;
    }
  }
  return lambda;
}

namespace {

double MeanPower(const Spectrogram& spec) {
  double sum = 0.0;
  for (const Complex& v : spec.Values()) sum += std::norm(v);
  const std::size_t n = spec.Values().size();
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double LambdaFloor(const Spectrogram& spec, const WpeConfig& cfg) {
  return std::max(cfg.lambda_floor_ratio * MeanPower(spec),
                  std::numeric_limits<double>::min());
}

}  // namespace

WpeFilter WpeFilterUpdate(const Spectrogram& spec, const Eigen::MatrixXd& lambda,
                          const WpeConfig& cfg) {
  cfg.Validate();
  Require(static_cast<std::size_t>(lambda.rows()) == spec.NumFrames() &&
              static_cast<std::size_t>(lambda.cols()) == spec.NumBins(),
          ErrorCode::kDimensionMismatch, "WPE: lambda shape mismatch");
  const double floor = LambdaFloor(spec, cfg);
  const auto channels = static_cast<Eigen::Index>(spec.NumChannels());
  const auto frames = static_cast<Eigen::Index>(spec.NumFrames());
  const auto dim = static_cast<Eigen::Index>(cfg.taps) * channels;

  WpeFilter filter;
  filter.values.resize(spec.NumBins());
  CMatrix stacked(dim, frames);   // delayed vectors, scaled by lambda^-1/2
  CMatrix current(channels, frames);
  for (std::size_t f = 0; f < spec.NumBins(); ++f) {
    for (Eigen::Index t = 0; t < frames; ++t) {
      const double w =
          1.0 / std::sqrt(std::max(lambda(t, static_cast<Eigen::Index>(f)), floor));
      stacked.col(t) = w * StackDelayed(spec, cfg.taps, cfg.delay, t, f);
      for (Eigen::Index r = 0; r < channels; ++r) {
        current(r, t) = w * spec(static_cast<std::size_t>(r),
                                 static_cast<std::size_t>(t), f);
      }
    }
    const CMatrix corr = stacked * stacked.adjoint();
    const CMatrix cross = stacked * current.adjoint();
    if (corr.trace().real() == 0.0) {
      filter.values[f] = CMatrix::Zero(dim, channels);  // nothing to predict from
      continue;
    }
    filter.values[f] = SolveHermitian(FloorMatrix(corr, cfg.eps), cross);
  }
  return filter;
}

Spectrogram WpeDereverberate(const Spectrogram& spec, const WpeFilter& filter,
                             int taps, int delay) {
  Require(taps >= 1 && delay >= 1, ErrorCode::kInvalidArgument,
          "WPE: taps and delay must be >= 1");
  Require(filter.NumBins() == spec.NumBins(), ErrorCode::kDimensionMismatch,
          "WPE: filter bin count mismatch");
  const auto channels = static_cast<Eigen::Index>(spec.NumChannels());
  const Eigen::Index dim = static_cast<Eigen::Index>(taps) * channels;
  Spectrogram out = spec;
  for (std::size_t f = 0; f < spec.NumBins(); ++f) {
    const CMatrix& w = filter.values[f];
    Require(w.rows() == dim && w.cols() == channels, ErrorCode::kDimensionMismatch,
            "WPE: filter shape does not match taps and channels");
    for (std::size_t t = 0; t < spec.NumFrames(); ++t) {
      const CVector stacked =
          StackDelayed(spec, taps, delay, static_cast<std::ptrdiff_t>(t), f);
      const CVector pred = w.adjoint() * stacked;
      for (Eigen::Index r = 0; r < channels; ++r) {
        out(static_cast<std::size_t>(r), t, f) -= pred(r);
      }
    }
  }
  return out;
}

Spectrogram WpeIterative(const Spectrogram& spec, const WpeConfig& cfg) {
  cfg.Validate();
  Spectrogram current = spec;
  Eigen::MatrixXd lambda = SignalPower(spec, nullptr);
  for (int i = 0; i < cfg.iterations; ++i) {
    const WpeFilter filter = WpeFilterUpdate(spec, lambda, cfg);
    current = WpeDereverberate(spec, filter, cfg.taps, cfg.delay);
    lambda = SignalPower(current, nullptr);
  }
  return current;
}

Spectrogram WpeMasked(const Spectrogram& spec, const ComplexMask& mask,
                      const WpeConfig& cfg) {
  cfg.Validate();
  const Eigen::MatrixXd lambda = SignalPower(spec, &mask);
  const WpeFilter filter = WpeFilterUpdate(spec, lambda, cfg);
  return WpeDereverberate(spec, filter, cfg.taps, cfg.delay);
}

Spectrogram SpecmApply(const Spectrogram& spec, const ComplexMask& mask) {
  mask.RequireMatches(spec, "SpecM");
  Spectrogram out = spec;
  for (std::size_t r = 0; r < spec.NumChannels(); ++r) {
    for (std::size_t t = 0; t < spec.NumFrames(); ++t) {
      for (std::size_t f = 0; f < spec.NumBins(); ++f) out(r, t, f) *= mask(t, f);
    }
  }
  return out;
}

double WpeNegativeLogLikelihood(const Spectrogram& spec, const WpeFilter& filter,
                                const Eigen::MatrixXd& lambda,
                                const WpeConfig& cfg) {
  const double floor = LambdaFloor(spec, cfg);
  const Spectrogram d = WpeDereverberate(spec, filter, cfg.taps, cfg.delay);
  const double channels = static_cast<double>(spec.NumChannels());
  double cost = 0.0;
  for (std::size_t t = 0; t < spec.NumFrames(); ++t) {
    for (std::size_t f = 0; f < spec.NumBins(); ++f) {
      const double lam = std::max(
          lambda(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(f)), floor);
      double e = 0.0;
      for (std::size_t r = 0; r < spec.NumChannels(); ++r) e += std::norm(d(r, t, f));
      cost += e / lam + channels * std::log(lam);
    }
  }
  return cost;
}

}  // namespace mcse
