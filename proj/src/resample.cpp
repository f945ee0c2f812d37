#include "mcse/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "mcse/error.hpp"

namespace mcse {

namespace {

double Sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

std::vector<double> OctaveFilter(int up, int down) {
  const double stopband = 1.0 / (2.0 * std::max(up, down));
  const double roll_off = stopband / 10.0;
  const double rejection_db = 60.0;
  const auto half = static_cast<long>(std::ceil((rejection_db - 8.0) / (28.714 * roll_off)));
  const double beta = 0.1102 * (rejection_db - 8.7);
  const long taps = 2 * half + 1;
  std::vector<double> h(static_cast<std::size_t>(taps));
  const double i0_beta = std::cyl_bessel_i(0.0, beta);
  for (long n = 0; n < taps; ++n) {
    const double r = 2.0 * static_cast<double>(n) / static_cast<double>(taps - 1) - 1.0;
    const double kaiser = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    const double t = static_cast<double>(n - half);
    h[static_cast<std::size_t>(n)] = kaiser * 2.0 * up * stopband * Sinc(2.0 * stopband * t);
  }
  const double sum = std::accumulate(h.begin(), h.end(), 0.0);
  for (double& v : h) v = v / sum * up;
  return h;
}

}  // namespace

std::vector<double> ResampleRational(std::span<const double> x, int out_rate,
                                     int in_rate) {
  Require(out_rate > 0 && in_rate > 0, ErrorCode::kInvalidArgument,
          "resample: rates must be positive");
  const int g = std::gcd(out_rate, in_rate);
  const long up = out_rate / g;
  const long down = in_rate / g;
  if (up == 1 && down == 1) return {x.begin(), x.end()};
  const std::vector<double> h = OctaveFilter(static_cast<int>(up), static_cast<int>(down));
  const long half = static_cast<long>(h.size() - 1) / 2;
  const long taps = static_cast<long>(h.size());
  const long n_in = static_cast<long>(x.size());
  const long n_out = (n_in * up + down - 1) / down;
  std::vector<double> y(static_cast<std::size_t>(n_out), 0.0);
  // y[k] = sum_n x[n] h[k down + half - n up]
  for (long k = 0; k < n_out; ++k) {
    const long center = k * down + half;
    const long n_lo = std::max(0L, (center - (taps - 1) + up - 1) / up);
    const long n_hi = std::min(n_in - 1, center / up);
    double acc = 0.0;
    for (long n = n_lo; n <= n_hi; ++n) {
      acc += x[static_cast<std::size_t>(n)] * h[static_cast<std::size_t>(center - n * up)];
    }
    y[static_cast<std::size_t>(k)] = acc;
  }
  return y;
}

}  // namespace mcse
