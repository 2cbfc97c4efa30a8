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

#include "qpredict/config.hpp"
#include "qpredict/io.hpp"
#include "qpredict/metrics.hpp"
#include "qpredict/predictor.hpp"
#include "qpredict/protocols.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace qpredict {

/// Offline prediction on held-out free-running traces over an (n, k) grid.
struct Fig1Result {
  std::vector<Index> n_values;
  RmsMap map;                     // rows "1*", then one per n
  Matrix standard_error;          // bootstrap SE of each raw RMS cell
  /// Rows follow n_values: 2.5% bootstrap quantile of rms(1*) - rms(n).
  Matrix advantage_lower;
  /// Rows follow n_values[1..]: rms(n_i) - rms(n_{i-1}) and its bootstrap SE.
  Matrix increase;
  Matrix increase_se;
  Vector mean_predictor_rms;      // per k
  double correlation = 0.0;       // Pearson r of measured vs applied phase
  EllipseSummary<double> ellipse;
  std::vector<bool> training_dominance;  // per n: training RMS <= traditional at every k
  Index traces = 0;
  Index windows = 0;              // evaluation windows per trace
  Table overlay;
  std::vector<PredictorModel<double>> models;
};

Fig1Result run_fig1(const ExperimentConfig& config, unsigned jobs = 1);

struct TdmResult {
  Index k_stab = 0;
  Index cycles = 0;
  std::array<ProtocolRecord, 3> records;  // indexed by Policy
  std::array<Matrix, 3> residuals;        // cycles x k_stab true residuals
  std::array<Vector, 3> rms;              // per k
  Vector predictive_vs_traditional_lower;  // 2.5% quantile of rms_trad - rms_pred per k
  Vector predictive_vs_free_lower;
  double integrated_reduction = 0.0;  // ensemble area reduction vs uncorrected over k <= k_stab
  Vector cycle_reduction;             // per cycle
  double bookkeeping = 0.0;
  PredictorModel<double> model;

  Table rms_table() const;
};

TdmResult run_tdm_experiment(const ExperimentConfig& config);

struct LockResult {
  std::vector<std::array<LockSummary, 3>> summaries;  // per realisation, indexed by Policy
  double traditional_over_predictive = 0.0;  // ensemble mean sample variance ratio
  bool predictive_below_free_every = false;
  std::array<std::optional<EllipseSummary<double>>, 3> ellipses;  // correction vs applied
  std::array<ProtocolRecord, 3> first_records;
  Table variance_curve;  // ensemble sample variance vs N, normalized to free-running at N = cycles
  double bookkeeping = 0.0;
  PredictorModel<double> model;
};

LockResult run_lock_experiment(const ExperimentConfig& config, unsigned jobs = 1);

SweepSettings sweep_settings(const ExperimentConfig& config, unsigned jobs = 1);

/// Analysis of a recorded measurement series: chronological split, training,
/// RMS map against future measurements, one-step corrected variance per n
/// and the smoothed periodogram.
struct IngestResult {
  Index split = 0;
  std::vector<Index> n_values;
  RmsMap map;
  double uncorrected_rms = 0.0;
  double best_improvement = 0.0;  // 1 - best predictive cell / uncorrected RMS
  std::string best_row;
  Index best_horizon = 0;
  Vector corrected_variance;      // per n
  double traditional_variance = 0.0;
  double uncorrected_variance = 0.0;
  Tabulated periodogram;
  double rate_hz = 0.0;
  std::vector<PredictorModel<double>> models;

  Table variance_table() const;
  Table periodogram_table() const;
};

IngestResult analyze_series(const MeasurementSeries& series, double rate_hz, const IngestSettings& settings,
                            double ridge);

/// Free-running measured series from the 1/f^2 + white surrogate.
MeasurementSeries make_intrinsic_surrogate(const SurrogateSettings& settings, std::uint64_t seed);

std::vector<std::uint64_t> derive_seeds(std::uint64_t master, const char* role, Index count);

}  // namespace qpredict
