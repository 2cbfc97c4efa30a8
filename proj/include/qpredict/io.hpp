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
#include "qpredict/metrics.hpp"
#include "qpredict/noise.hpp"
#include "qpredict/predictor.hpp"
#include "qpredict/protocols.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qpredict {

using Json = nlohmann::ordered_json;

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

using Cell = std::variant<double, long long, std::string>;

/// Column-named table written as CSV (header row, LF endings, '#'-prefixed
/// comment lines first) or as a JSON array of row objects.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> comments;

  void add_row(std::vector<Cell> row);
};

void write_csv(std::ostream& out, const Table& table);
std::string to_csv(const Table& table);
Json to_json(const Table& table);

/// 64-bit FNV-1a over the bytes, as 16 lowercase hex digits.
std::string checksum(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
/// Writes the bytes, creating parent directories. Returns checksum(bytes).
std::string write_file(const std::filesystem::path& path, std::string_view bytes);

/// (time_s, phase_rad) rows with seed and spectrum comments.
Table trace_table(const NoiseTrace& trace);

/// Reads a (time_s, phase_rad) or (index, phase_rad) CSV. Lines starting
/// with '#' and blank lines are skipped; the first remaining line is the
/// header. Index columns are converted to time with the declared rate.
/// Throws ParseError (with the 1-based line) on malformed rows and
/// ValidationError on non-increasing timestamps.
MeasurementSeries read_series_csv(std::istream& in, double rate_hz);
MeasurementSeries read_series_file(const std::filesystem::path& path, double rate_hz);

Table series_table(const MeasurementSeries& series);

/// Self-describing model document. Weights are stored flat with the
/// feature index fastest: weights[(k - 1) * n + (i - 1)].
Json model_to_json(const PredictorModel<double>& model);
PredictorModel<double> model_from_json(const Json& doc);

/// RMS map as a matrix: first column the row label ("1*" for traditional
/// feedback, otherwise n), then one column per horizon k.
Table rms_map_table(const RmsMap& map, bool normalized = true);

/// One row per protocol step.
Table protocol_table(const ProtocolRecord& record);

Table sweep_table(const SweepTable& table);

}  // namespace qpredict
