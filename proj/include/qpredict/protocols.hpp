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
#include "qpredict/measurement.hpp"
#include "qpredict/predictor.hpp"
#include "qpredict/spectrum.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qpredict {

enum class Policy { FreeRunning, Traditional, Predictive };
enum class PeriodTag { Probe, Stabilise, Diagnostic, LockCycle };

const char* to_string(Policy policy);
const char* to_string(PeriodTag tag);
Policy policy_from_string(const std::string& name);

struct ProtocolStep {
  Index cycle = 0;
  /// TDM: 1-n_probe..0 for probe windows, 1..k_stab while stabilising.
  /// Lock: window index relative to the first locked cycle.
  Index step = 0;
  PeriodTag tag = PeriodTag::Probe;
  double time = 0.0;             // window start (s)
  double applied_phase = 0.0;    // window-averaged phi^A (rad)
  double correction_step = 0.0;  // increment applied at the window start (rad)
  double correction = 0.0;       // correction in force (rad)
  double residual = 0.0;         // applied_phase - correction (rad)
  std::optional<double> measured;
};

struct ProtocolRecord {
  enum class Outcome { Completed, Diverged };

  Policy policy = Policy::FreeRunning;
  std::vector<ProtocolStep> steps;
  Outcome outcome = Outcome::Completed;
  /// Lock cycle (0-based, negative during acquisition) at which the
  /// residual left the readout range.
  Index diverged_cycle = 0;
};

struct TdmConfig {
  Index n_probe = 100;
  Index k_stab = 50;
  Index cycles = 50;
  MeasurementModel measurement{2.0 * kPi / 40.0, 0.0, GaussianReadout{0.0}};
  PowerSpectrum spectrum{FlatTop{}};
  std::uint64_t seed = 0;
  Index samples_per_measurement = 4;
  /// Stabilisation step carrying the diagnostic measurement; 0 means k_stab.
  Index diagnostic_step = 0;
  Policy policy = Policy::Predictive;
};

struct LockConfig {
  Index n = 20;
  Index cycles = 1000;
  Policy policy = Policy::Predictive;
  /// Predictive corrections use the prediction made `horizon` cycles ahead.
  Index horizon = 1;
  MeasurementModel measurement{2.0 * kPi / 40.0, 0.0, GaussianReadout{0.0}};
  PowerSpectrum spectrum{FlatTop{}};
  std::uint64_t seed = 0;
  Index samples_per_measurement = 4;
};

/// Time-division multiplexed stabilisation: per cycle n_probe uncorrected
/// measurements, then k_stab measurement-free steps with correction
/// phi^P(t_k) in force, with one diagnostic measurement of the residual.
/// Requires model.n == n_probe and model.horizons >= k_stab for the
/// predictive policy. Phase-wrap errors carry cycle and step.
ProtocolRecord run_tdm(const TdmConfig& config, const PredictorModel<double>& model);

/// Cyclic lock: after an acquisition of n + horizon - 1 uncorrected
/// measurements, each cycle measures the residual, rebuilds phi^M as
/// residual + correction, and sets the next correction from the policy.
/// A residual beyond the readout range ends the run with
/// Outcome::Diverged instead of throwing.
ProtocolRecord run_lock(const LockConfig& config, const PredictorModel<double>& model);

/// Checks residual == applied_phase - cumulative(correction_step) at every
/// step and returns the largest deviation.
double bookkeeping_deviation(const ProtocolRecord& record);

/// Steps carrying the given tag.
std::vector<const ProtocolStep*> steps_tagged(const ProtocolRecord& record, PeriodTag tag);

struct LockSummary {
  double sample_variance = 0.0;        // residuals of the first N lock cycles
  double measured_variance = 0.0;      // readout-noisy measured residuals
  std::optional<double> correlation;   // Pearson r(correction, applied phase)
  Index cycles = 0;
};

LockSummary summarize_lock(const ProtocolRecord& record, Index cycles);

/// Dead time that gives w_s = ratio * w_c at a fixed measurement time.
double dead_time_for_ratio(double ratio, double cutoff, double measurement_duration);

/// Trains a predictor on free-running simulated series, one per seed.
PredictorModel<double> train_free_running(const PowerSpectrum& spectrum,
                                          const MeasurementModel& model,
                                          Index samples_per_measurement, Index n, Index horizons,
                                          double ridge, std::span<const std::uint64_t> seeds,
                                          Index length);

struct SweepSettings {
  LockConfig base;  // n, cycles, horizon, measurement (dead time ignored), spectrum
  std::vector<double> ratios;             // w_s / w_c
  std::vector<std::uint64_t> seeds;       // evaluation realisations
  std::vector<std::uint64_t> training_seeds;
  Index training_length = 3000;
  double ridge = 1e-6;
  unsigned jobs = 1;
};

struct SweepPoint {
  double ratio = 0.0;
  Policy policy = Policy::FreeRunning;
  std::vector<double> normalized_variance;  // per seed, / free-running same seed
  double mean = 0.0;
  double sd_mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  /// mean variance / mean free-running variance.
  double ensemble_normalized = 0.0;
  std::vector<double> correlation;  // per seed; empty for free-running
  double mean_correlation = 0.0;
  Index diverged = 0;
};

struct SweepTable {
  std::vector<SweepPoint> points;

  const SweepPoint& at(double ratio, Policy policy) const;
};

/// For each ratio: fixed T_M, dead time from the ratio, a predictor trained
/// on training_seeds, then every (seed, policy) lock run.
SweepTable sweep_sampling(const SweepSettings& settings);

}  // namespace qpredict
