#include "mcse/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "mcse/error.hpp"

namespace mcse {

double Sisnr(std::span<const double> estimate, std::span<const double> reference) {
  Require(estimate.size() == reference.size(), ErrorCode::kDimensionMismatch,
          "SISNR: length mismatch");
  Require(!reference.empty(), ErrorCode::kInvalidArgument, "SISNR: empty input");
  const auto n = static_cast<double>(reference.size());
  double me = 0.0, mr = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    me += estimate[i];
    mr += reference[i];
  }
  me /= n;
  mr /= n;
  double dot = 0.0, rr = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    dot += (estimate[i] - me) * (reference[i] - mr);
    rr += (reference[i] - mr) * (reference[i] - mr);
  }
  Require(rr > 0.0, ErrorCode::kDegenerate, "SISNR: silent reference");
  const double scale = dot / rr;
  double target = 0.0, noise = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double s = scale * (reference[i] - mr);
    const double e = (estimate[i] - me) - s;
    target += s * s;
    noise += e * e;
  }
  if (noise <= 0.0) return target > 0.0 ? kSisnrCapDb : -kSisnrCapDb;
  if (target <= 0.0) return -kSisnrCapDb;
  return std::clamp(10.0 * std::log10(target / noise), -kSisnrCapDb, kSisnrCapDb);
}

double SpectralMse(const Spectrogram& estimate, const Spectrogram& reference) {
  Require(estimate.SameShape(reference), ErrorCode::kDimensionMismatch,
          "spectral MSE: shape mismatch");
  const auto a = estimate.Values();
  const auto b = reference.Values();
  Require(!a.empty(), ErrorCode::kInvalidArgument, "spectral MSE: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::norm(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

UtteranceMetrics MetricReport::Mean() const {
  UtteranceMetrics m;
  m.id = "mean";
  if (utterances.empty()) return m;
  double mse = 0.0;
  std::size_t mse_count = 0;
  for (const UtteranceMetrics& u : utterances) {
    m.sisnr_db += u.sisnr_db;
    m.stoi += u.stoi;
    m.srmr += u.srmr;
    if (u.spectral_mse) {
      mse += *u.spectral_mse;
      ++mse_count;
    }
  }
  const auto n = static_cast<double>(utterances.size());
  m.sisnr_db /= n;
  m.stoi /= n;
  m.srmr /= n;
  if (mse_count > 0) m.spectral_mse = mse / static_cast<double>(mse_count);
  return m;
}

UtteranceMetrics Evaluate(std::string id, std::span<const double> estimate,
                          std::span<const double> reference, int sample_rate) {
  const std::size_t n = std::min(estimate.size(), reference.size());
  const auto e = estimate.first(n);
  const auto r = reference.first(n);
  UtteranceMetrics m;
  m.id = std::move(id);
  m.sisnr_db = Sisnr(e, r);
  m.stoi = Stoi(e, r, sample_rate);
  m.srmr = Srmr(e, sample_rate);
  return m;
}

}  // namespace mcse
