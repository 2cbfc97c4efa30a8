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

#include "qpredict/io.hpp"
#include "qpredict/measurement.hpp"
#include "qpredict/metrics.hpp"
#include "qpredict/spectrum.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qpredict {

struct ReadoutSpec {
  enum class Kind { Gaussian, Projection };
  Kind kind = Kind::Gaussian;
  /// Exactly one of sigma_rad / target_correlation for Gaussian readout.
  std::optional<double> sigma_rad;
  std::optional<double> target_correlation;
  Index ensemble_size = 100;
};

struct MeasurementSpec {
  double duration_s = 2.0 * kPi / 40.0;
  Index samples_per_measurement = 4;
  ReadoutSpec readout;
};

struct Fig1Settings {
  double sampling_ratio = 40.0;
  std::vector<Index> n_values{1, 5, 20, 100};
  Index horizons = 150;
  Index training_traces = 12;
  Index training_length = 4000;
  Index validation_traces = 50;
  Index validation_length = 2000;
  Index bootstrap_resamples = 1000;
  Normalization normalization = Normalization::FieldMin;
};

struct TdmSettings {
  double sampling_ratio = 40.0;
  Index n_probe = 100;
  Index k_stab = 50;
  Index cycles = 50;
  Index diagnostic_step = 0;
  Index training_traces = 12;
  Index training_length = 4000;
  Index bootstrap_resamples = 1000;
};

struct LockSettings {
  double sampling_ratio = 10.0;
  Index n = 20;
  Index cycles = 1000;
  Index horizon = 1;
  Index realisations = 10;
  Index training_traces = 5;
  Index training_length = 3000;
};

struct SweepSpec {
  std::vector<double> sampling_ratios{40, 20, 10, 5, 3, 2.5, 2.2, 1.8};
  Index seeds = 10;
  Index training_traces = 5;
  Index training_length = 3000;
};

struct SurrogateSettings {
  PowerSpectrum spectrum{OneOverF2PlusWhite{2e-7, 1e-3, 0.8 * kPi * 1.7}};
  double readout_sigma_rad = 0.007;
  double rate_hz = 1.7;
  Index length = 8000;
  Index samples_per_measurement = 4;
};

struct IngestSettings {
  std::vector<Index> n_values{1, 2, 5, 10, 20, 50};
  Index horizons = 20;
  double train_fraction = 0.7;
  Normalization normalization = Normalization::UncorrectedRms;
  Index smoothing_window = 21;
  SurrogateSettings surrogate;
};

struct SynthSettings {
  Index traces = 1;
  Index length = 8192;
  /// Defaults to duration_s / samples_per_measurement.
  std::optional<double> dt_s;
};

/// Fully validated experiment description. All physical quantities are
/// SI / rad based; JSON keys carry the unit suffix.
struct ExperimentConfig {
  std::uint64_t master_seed = 20260101;
  PowerSpectrum spectrum{FlatTop{0.01, 1.0}};
  MeasurementSpec measurement;
  double ridge = 1e-6;
  Fig1Settings fig1;
  TdmSettings tdm;
  LockSettings lock;
  SweepSpec sweep;
  IngestSettings ingest;
  SynthSettings synth;
  std::string output_directory = "runs";

  /// Readout with a target correlation resolved to a Gaussian sigma against
  /// the free-running window-averaged variance of `spectrum`.
  Readout readout() const;
  /// Measurement model with the dead time giving w_s = ratio * w_c.
  MeasurementModel measurement_at(double ratio) const;
  double dt() const { return measurement.duration_s / double(measurement.samples_per_measurement); }

  /// Resolved configuration, suitable for parse_config().
  Json to_json() const;
};

/// Parses and validates a configuration document; missing keys take the
/// defaults above, unknown keys are rejected. Throws ValidationError.
ExperimentConfig parse_config(const Json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

PowerSpectrum parse_spectrum(const Json& doc);
Json spectrum_to_json(const PowerSpectrum& spectrum);

}  // namespace qpredict
