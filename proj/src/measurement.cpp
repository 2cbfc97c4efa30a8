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

#include "qpredict/measurement.hpp"

#include "qpredict/error.hpp"
#include "qpredict/seed.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qpredict {
namespace {

// Integral over [u, v] (in sample-index units) of the linear interpolant.
double integrate_samples(const Vector& x, double u, double v) {
  const Index last_cell = x.size() - 2;
  auto value = [&](double s) {
    const Index j = std::clamp<Index>(static_cast<Index>(std::floor(s)), 0, last_cell);
    const double f = s - static_cast<double>(j);
    return x(j) * (1.0 - f) + x(j + 1) * f;
  };
  const auto j0 = static_cast<Index>(std::ceil(u));
  const auto j1 = static_cast<Index>(std::floor(v));
  if (j0 > j1) return 0.5 * (value(u) + value(v)) * (v - u);
  double sum = 0.5 * (value(u) + x(j0)) * (static_cast<double>(j0) - u) +
               0.5 * (x(j1) + value(v)) * (v - static_cast<double>(j1));
  for (Index j = j0; j < j1; ++j) sum += 0.5 * (x(j) + x(j + 1));
  return sum;
}

}  // namespace

MeasurementModel::MeasurementModel(double duration, double dead_time, Readout readout)
    : duration_(duration), dead_time_(dead_time), readout_(readout) {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw ValidationError("measurement duration must be > 0");
  }
  if (!(dead_time >= 0.0) || !std::isfinite(dead_time)) {
    throw ValidationError("dead time must be >= 0");
  }
  if (const auto* g = std::get_if<GaussianReadout>(&readout_)) {
    if (!(g->sigma >= 0.0) || !std::isfinite(g->sigma)) {
      throw ValidationError("readout sigma must be >= 0");
    }
  } else if (std::get<ProjectionReadout>(readout_).ensemble_size < 1) {
    throw ValidationError("projection ensemble size must be >= 1");
  }
}

double accumulate_phase(const NoiseTrace& trace, double start, double end) {
  if (!(end > start)) throw RangeError("window end must exceed window start");
  if (trace.size() < 2) throw RangeError("trace too short to average over a window");
  const double extent = trace.duration();
  const double slack = 1e-9 * trace.dt;
  if (start < -slack || end > extent + slack) {
    throw RangeError("window [" + std::to_string(start) + ", " + std::to_string(end) +
                     "] s lies outside the trace extent [0, " + std::to_string(extent) + "] s");
  }
  const double u = std::clamp(start / trace.dt, 0.0, static_cast<double>(trace.size() - 1));
  const double v = std::clamp(end / trace.dt, 0.0, static_cast<double>(trace.size() - 1));
  if (!(v > u)) return trace.samples(static_cast<Index>(std::round(u)));
  return integrate_samples(trace.samples, u, v) / (v - u);
}

double read_out(double phase, const Readout& readout, std::mt19937_64& rng) {
  if (!(std::abs(phase) < kPhaseWrapBound)) {
    throw PhaseWrapError("averaged phase " + std::to_string(phase) +
                             " rad is outside the unambiguous readout range (-pi/2, pi/2)",
                         phase);
  }
  if (const auto* g = std::get_if<GaussianReadout>(&readout)) {
    if (g->sigma == 0.0) return phase;
    std::normal_distribution<double> noise(0.0, g->sigma);
    return phase + noise(rng);
  }
  const Index p = std::get<ProjectionReadout>(readout).ensemble_size;
  const double probability = 0.5 * (1.0 + std::sin(phase));
  std::binomial_distribution<long long> draws(p, probability);
  const double k = static_cast<double>(draws(rng));
  return std::asin(std::clamp(2.0 * k / static_cast<double>(p) - 1.0, -1.0, 1.0));
}

double measure(const NoiseTrace& trace, const MeasurementModel& model, double t_start,
               std::mt19937_64& rng, double correction) {
  const double phase = accumulate_phase(trace, t_start, t_start + model.duration()) - correction;
  return read_out(phase, model.readout(), rng);
}

Vector window_averages(const NoiseTrace& trace, const MeasurementModel& model, Index count,
                       double t_start) {
  Vector out(count);
  for (Index i = 0; i < count; ++i) {
    const double start = t_start + static_cast<double>(i) * model.period();
    out(i) = accumulate_phase(trace, start, start + model.duration());
  }
  return out;
}

MeasurementSeries run_measurement_sequence(const NoiseTrace& trace, const MeasurementModel& model,
                                           Index count, std::mt19937_64& rng,
                                           std::span<const double> corrections, double t_start) {
  if (count < 1) throw ValidationError("measurement count must be >= 1");
  if (!corrections.empty() && static_cast<Index>(corrections.size()) != count) {
    throw ValidationError("corrections must hold one value per window");
  }
  const double last_end = t_start + static_cast<double>(count - 1) * model.period() + model.duration();
  if (last_end > trace.duration() + 1e-9 * trace.dt) {
    throw RangeError("trace of " + std::to_string(trace.duration()) + " s is too short for " +
                     std::to_string(count) + " measurements");
  }
  MeasurementSeries series{Vector(count), Vector(count), model};
  for (Index i = 0; i < count; ++i) {
    const double start = t_start + static_cast<double>(i) * model.period();
    const double correction = corrections.empty() ? 0.0 : corrections[static_cast<std::size_t>(i)];
    series.times(i) = start;
    try {
      series.values(i) = measure(trace, model, start, rng, correction);
    } catch (const PhaseWrapError& e) {
      throw PhaseWrapError("window " + std::to_string(i) + ": " + e.what(), e.phase(), i);
    }
  }
  return series;
}

Index samples_needed(const MeasurementModel& model, Index count, double dt) {
  const double end = static_cast<double>(count - 1) * model.period() + model.duration();
  return static_cast<Index>(std::ceil(end / dt)) + 2;
}

double readout_sigma_for_correlation(double target, double signal_variance) {
  if (!(target > 0.0 && target <= 1.0)) {
    throw ValidationError("target correlation must be in (0, 1]");
  }
  if (!(signal_variance >= 0.0)) throw ValidationError("signal variance must be >= 0");
  return std::sqrt(signal_variance * (1.0 / (target * target) - 1.0));
}

SimulatedRun simulate_free_running(const PowerSpectrum& spectrum, const MeasurementModel& model,
                                   Index samples_per_measurement, Index count, std::uint64_t seed) {
  if (samples_per_measurement < 1) throw ValidationError("samples per measurement must be >= 1");
  const double dt = model.duration() / static_cast<double>(samples_per_measurement);
  NoiseTrace trace = synthesize_noise(spectrum, dt, fft_friendly_length(samples_needed(model, count, dt)), seed);
  std::mt19937_64 rng(derive_seed(seed, "readout", 0));
  Vector truth = window_averages(trace, model, count);
  MeasurementSeries series = run_measurement_sequence(trace, model, count, rng);
  return SimulatedRun{std::move(trace), std::move(truth), std::move(series)};
}

}  // namespace qpredict
