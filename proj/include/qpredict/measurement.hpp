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
#include "qpredict/noise.hpp"

#include <optional>
#include <random>
#include <span>
#include <variant>

namespace qpredict {

/// Outcome = averaged phase + N(0, sigma^2).
struct GaussianReadout {
  double sigma = 0.0;
};

/// Outcome = arcsin(2k/p - 1), k ~ Binomial(p, (1 + sin phase) / 2).
struct ProjectionReadout {
  Index ensemble_size = 1;
};

using Readout = std::variant<GaussianReadout, ProjectionReadout>;

class MeasurementModel {
 public:
  MeasurementModel(double duration, double dead_time, Readout readout);

  double duration() const { return duration_; }
  double dead_time() const { return dead_time_; }
  /// T_M + T_D.
  double period() const { return duration_ + dead_time_; }
  /// 2 pi / (T_M + T_D).
  double sampling_frequency() const { return kTwoPi / period(); }
  const Readout& readout() const { return readout_; }

 private:
  double duration_;
  double dead_time_;
  Readout readout_;
};

struct MeasurementSeries {
  Vector times;
  Vector values;
  /// nullopt for externally recorded data.
  std::optional<MeasurementModel> model;

  Index size() const { return values.size(); }
};

/// Time average of the piecewise-linear trace over [start, end].
/// Throws RangeError when the window leaves the trace.
double accumulate_phase(const NoiseTrace& trace, double start, double end);

/// Converts a true averaged phase into one readout outcome. Throws
/// PhaseWrapError when |phase| >= pi/2.
double read_out(double phase, const Readout& readout, std::mt19937_64& rng);

/// One measurement of the window [t_start, t_start + T_M] with `correction`
/// subtracted from the averaged phase.
double measure(const NoiseTrace& trace, const MeasurementModel& model, double t_start,
               std::mt19937_64& rng, double correction = 0.0);

/// Window averages of `count` consecutive windows starting at t_start with
/// spacing T_M + T_D.
Vector window_averages(const NoiseTrace& trace, const MeasurementModel& model, Index count,
                       double t_start = 0.0);

/// `count` consecutive measurements. `corrections`, when non-empty, holds
/// the correction in force during each window (one per window). Phase-wrap
/// errors are rethrown carrying the failing window index.
MeasurementSeries run_measurement_sequence(const NoiseTrace& trace, const MeasurementModel& model,
                                           Index count, std::mt19937_64& rng,
                                           std::span<const double> corrections = {},
                                           double t_start = 0.0);

/// Number of trace samples at spacing dt needed to cover `count` windows.
Index samples_needed(const MeasurementModel& model, Index count, double dt);

/// Gaussian readout sigma giving Pearson r = target between outcomes and a
/// signal of variance `signal_variance`.
double readout_sigma_for_correlation(double target, double signal_variance);

/// A free-running (uncorrected) simulated run: trace, true window averages
/// and measured series. The trace is synthesized with dt = T_M /
/// samples_per_measurement and the readout stream is seeded with
/// derive_seed(seed, "readout", 0).
struct SimulatedRun {
  NoiseTrace trace;
  Vector truth;
  MeasurementSeries series;
};

SimulatedRun simulate_free_running(const PowerSpectrum& spectrum, const MeasurementModel& model,
                                   Index samples_per_measurement, Index count, std::uint64_t seed);

}  // namespace qpredict
