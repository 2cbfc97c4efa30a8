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

#pragma once

#include "qpredict/core.hpp"
#include "qpredict/spectrum.hpp"

#include <cstdint>
#include <optional>

namespace qpredict {

/// A sampled realisation of the applied dephasing phase, sample j at j*dt.
struct NoiseTrace {
  double dt = 1.0;
  Vector samples;
  std::uint64_t seed = 0;
  /// nullopt for ingested ("external") data.
  std::optional<PowerSpectrum> spectrum;

  Index size() const { return samples.size(); }
  double time(Index j) const { return static_cast<double>(j) * dt; }
  double duration() const { return dt * static_cast<double>(size() - 1); }
};

/// Random-phase harmonic sum: harmonics at w_j = 2 pi j / (length dt),
/// amplitude sqrt(2 S(w_j) dw), independent uniform phases drawn in order of
/// j from a generator seeded with `seed`. No DC term.
///
/// Throws ValidationError for dt <= 0 or length < 1 and ConfigurationError
/// when the sampling rate 2 pi / dt does not exceed twice the spectrum's
/// highest frequency.
NoiseTrace synthesize_noise(const PowerSpectrum& spectrum, double dt, Index length,
                            std::uint64_t seed);

/// One-sided periodogram on bins w_j = 2 pi j / (L dt), j = 0..floor(L/2),
/// scaled so that its ensemble mean over synthesized traces equals the
/// declared density. `smoothing_window` (odd) applies a centered moving
/// average, truncated at the ends.
Tabulated estimate_periodogram(const NoiseTrace& trace, Index smoothing_window = 1);

/// Sample autocovariance at lags 0..max_lag, mean removed, divisor
/// max(N - 1 - h, 1) so that lag 0 is the 1/(N-1) sample variance.
Vector autocovariance(const NoiseTrace& trace, Index max_lag);

/// Exact variance of trapezoidal window averages over `samples_per_window`
/// grid cells for a trace synthesized with (spectrum, dt, length).
double windowed_variance(const PowerSpectrum& spectrum, double dt, Index length,
                         Index samples_per_window);

/// Smallest length >= minimum that is a multiple of 4 with no prime factor
/// above 5, so the real FFT stays on its fast path.
Index fft_friendly_length(Index minimum);

}  // namespace qpredict
