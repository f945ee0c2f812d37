#pragma once

#include <Eigen/Dense>

#include "mcse/geometry.hpp"
#include "mcse/stft.hpp"

namespace mcse {

// cosIPD features: column block p holds cos(angle(X_i) - angle(X_j)) for the
// p-th pair, giving a T x (F * |pairs|) matrix.
Eigen::MatrixXd IpdFeatures(const Spectrogram& spec, const MicPairList& pairs);

// Location-guided angle feature, T x F: mean over pairs of
// cos(observed IPD - expected IPD of a far-field source at `doa`).
// `geometry` must describe the same microphones as the spectrogram channels.
Eigen::MatrixXd AngleFeature(const Spectrogram& spec, double doa,
                             const ArrayGeometry& geometry,
                             const MicPairList& pairs,
                             double speed_of_sound = kSpeedOfSound);

}  // namespace mcse
