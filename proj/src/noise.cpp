// Copyright 2026 The qpredict Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qpredict/noise.hpp"

#include "qpredict/error.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

namespace qpredict {
namespace {

using Complex = std::complex<double>;

Index half_bins(Index length) { return length / 2 + 1; }

}  // namespace

NoiseTrace synthesize_noise(const PowerSpectrum& spectrum, double dt, Index length,
                            std::uint64_t seed) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be > 0");
  if (length < 1) throw ValidationError("trace length must be >= 1");
  if (!(kTwoPi / dt > 2.0 * spectrum.highest_frequency())) {
    throw ConfigurationError("sampling rate 2pi/dt = " + std::to_string(kTwoPi / dt) +
                             " rad/s does not exceed twice the highest spectral frequency " +
                             std::to_string(spectrum.highest_frequency()) + " rad/s");
  }

  NoiseTrace trace{dt, Vector::Zero(length), seed, spectrum};
  if (length == 1) return trace;

  const double L = static_cast<double>(length);
  const double dw = kTwoPi / (L * dt);
  const Index bins = half_bins(length);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);

  // x_m = sum_j a_j cos(w_j t_m + theta_j) = (1/L) sum_k X_k e^{2 pi i k m / L}
  // with X_j = (L/2) a_j e^{i theta_j}; the Nyquist bin of an even length is
  // its own mirror and carries L a cos(theta).
  std::vector<Complex> half(static_cast<std::size_t>(bins), Complex(0.0, 0.0));
  for (Index j = 1; j < bins; ++j) {
    const double theta = phase(rng);
    const double amplitude = std::sqrt(2.0 * spectrum.density(static_cast<double>(j) * dw) * dw);
    if (amplitude == 0.0) continue;
    if (length % 2 == 0 && j == length / 2) {
      half[static_cast<std::size_t>(j)] = Complex(L * amplitude * std::cos(theta), 0.0);
    } else {
      half[static_cast<std::size_t>(j)] = std::polar(0.5 * L * amplitude, theta);
    }
  }

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> out;
  fft.inv(out, half, length);
  trace.samples = Eigen::Map<const Vector>(out.data(), length);
  return trace;
}

Tabulated estimate_periodogram(const NoiseTrace& trace, Index smoothing_window) {
  const Index length = trace.size();
  if (length < 4) throw ValidationError("periodogram needs at least 4 samples");
  if (smoothing_window < 1 || smoothing_window % 2 == 0) {
    throw ValidationError("smoothing window must be odd and >= 1");
  }
  if (smoothing_window > length) {
    throw ValidationError("smoothing window exceeds trace length");
  }

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> in(trace.samples.data(), trace.samples.data() + length);
  std::vector<Complex> spectrum;
  fft.fwd(spectrum, in);

  const Index bins = half_bins(length);
  const double L = static_cast<double>(length);
  const double dw = kTwoPi / (L * trace.dt);
  Vector raw(bins);
  for (Index j = 0; j < bins; ++j) {
    double s = std::norm(spectrum[static_cast<std::size_t>(j)]) * trace.dt / (kPi * L);
    const bool self_mirrored = j == 0 || (length % 2 == 0 && j == length / 2);
    raw(j) = self_mirrored ? 0.5 * s : s;
  }

  Tabulated out;
  out.frequencies.resize(static_cast<std::size_t>(bins));
  out.densities.resize(static_cast<std::size_t>(bins));
  const Index half_window = smoothing_window / 2;
  for (Index j = 0; j < bins; ++j) {
    const Index lo = std::max<Index>(0, j - half_window);
    const Index hi = std::min<Index>(bins - 1, j + half_window);
    out.frequencies[static_cast<std::size_t>(j)] = static_cast<double>(j) * dw;
    out.densities[static_cast<std::size_t>(j)] = raw.segment(lo, hi - lo + 1).mean();
  }
  return out;
}

Vector autocovariance(const NoiseTrace& trace, Index max_lag) {
  const Index n = trace.size();
  if (max_lag < 0 || max_lag >= n) throw ValidationError("max_lag must be in [0, length)");
  const Vector centered = trace.samples.array() - trace.samples.mean();
  Vector out(max_lag + 1);
  for (Index h = 0; h <= max_lag; ++h) {
    const double sum = centered.head(n - h).dot(centered.tail(n - h));
    out(h) = sum / static_cast<double>(std::max<Index>(n - 1 - h, 1));
  }
  return out;
}

double windowed_variance(const PowerSpectrum& spectrum, double dt, Index length,
                         Index samples_per_window) {
  if (!(dt > 0.0) || length < 2 || samples_per_window < 1) {
    throw ValidationError("windowed_variance needs dt > 0, length >= 2, window >= 1");
  }
  const double L = static_cast<double>(length);
  const double dw = kTwoPi / (L * dt);
  const double m = static_cast<double>(samples_per_window);
  double variance = 0.0;
  for (Index j = 1; j < half_bins(length); ++j) {
    const double w = static_cast<double>(j) * dw;
    const double s = spectrum.density(w);
    if (s == 0.0) continue;
    // Trapezoid weights (1/2, 1, ..., 1, 1/2) / m applied to e^{i w s dt}.
    Complex h(0.0, 0.0);
    for (Index k = 0; k <= samples_per_window; ++k) {
      const double weight = (k == 0 || k == samples_per_window) ? 0.5 : 1.0;
      h += weight * std::polar(1.0, w * static_cast<double>(k) * dt);
    }
    h /= m;
    variance += s * dw * std::norm(h);
  }
  return variance;
}

Index fft_friendly_length(Index minimum) {
  Index n = std::max<Index>(minimum, 4);
  for (;; ++n) {
    if (n % 4 != 0) continue;
    Index r = n;
    for (Index p : {2, 3, 5}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return n;
  }
}

}  // namespace qpredict
