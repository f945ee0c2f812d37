#pragma once

#include <span>
#include <vector>

namespace mcse {

// Rational resampling from in_rate to out_rate with the Kaiser-windowed sinc
// low-pass used by Octave's resample() (60 dB rejection, 10% roll-off),
// normalized to unit sum, applied polyphase with the output centered on the
// filter. Output length is ceil(n * up / down) for the reduced ratio.
std::vector<double> ResampleRational(std::span<const double> x, int out_rate,
                                     int in_rate);

}  // namespace mcse
