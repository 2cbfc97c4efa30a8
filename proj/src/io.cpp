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

#include "qpredict/io.hpp"

#include "qpredict/error.hpp"
#include "qpredict/seed.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qpredict {
namespace {

std::string cell_text(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_number(v);
        } else if constexpr (std::is_same_v<T, long long>) {
          return std::to_string(v);
        } else {
          if (v.find_first_of(",\"\n") == std::string::npos) return v;
          std::string quoted = "\"";
          for (char c : v) {
            if (c == '"') quoted += '"';
            quoted += c;
          }
          return quoted + "\"";
        }
      },
      cell);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  for (auto& f : out) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
  }
  return out;
}

double parse_number(std::string_view field, Index line) {
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw ParseError("line " + std::to_string(line) + ": '" + std::string(field) + "' is not a number",
                     line);
  }
  if (!std::isfinite(value)) {
    throw ParseError("line " + std::to_string(line) + ": non-finite value", line);
  }
  return value;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw ValidationError("table row has " + std::to_string(row.size()) + " cells, expected " +
                          std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

void write_csv(std::ostream& out, const Table& table) {
  for (const auto& c : table.comments) out << "# " << c << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? "," : "") << cell_text(table.columns[i]);
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << cell_text(row[i]);
    out << '\n';
  }
}

std::string to_csv(const Table& table) {
  std::ostringstream out;
  write_csv(out, table);
  return out.str();
}

Json to_json(const Table& table) {
  Json doc = Json::object();
  if (!table.comments.empty()) doc["comments"] = table.comments;
  doc["columns"] = table.columns;
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    Json r = Json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::visit([&](const auto& v) { r[table.columns[i]] = v; }, row[i]);
    }
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  return doc;
}

std::string checksum(std::string_view bytes) {
  const std::uint64_t h = fnv1a64(bytes);
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(h));
  return buffer;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
  return checksum(bytes);
}

Table trace_table(const NoiseTrace& trace) {
  Table t;
  t.columns = {"time_s", "phase_rad"};
  t.comments.push_back("seed: " + std::to_string(trace.seed));
  t.comments.push_back("spectrum: " + (trace.spectrum ? trace.spectrum->descriptor() : std::string("external")));
  t.comments.push_back("dt_s: " + format_number(trace.dt));
  t.rows.reserve(static_cast<std::size_t>(trace.size()));
  for (Index j = 0; j < trace.size(); ++j) t.rows.push_back({trace.time(j), trace.samples(j)});
  return t;
}

MeasurementSeries read_series_csv(std::istream& in, double rate_hz) {
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) throw ValidationError("sampling rate must be > 0 Hz");
  std::string line;
  Index number = 0;
  bool have_header = false;
  bool by_index = false;
  std::vector<double> times;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view(line);
    while (!view.empty() && (view.back() == '\r' || view.back() == ' ')) view.remove_suffix(1);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = split_fields(view);
    if (!have_header) {
      if (fields.size() != 2 || fields[1] != "phase_rad" ||
          (fields[0] != "time_s" && fields[0] != "index")) {
        throw ParseError("line " + std::to_string(number) +
                             ": expected header 'time_s,phase_rad' or 'index,phase_rad'",
                         number);
      }
      by_index = fields[0] == "index";
      have_header = true;
      continue;
    }
    if (fields.size() != 2) {
      throw ParseError("line " + std::to_string(number) + ": expected 2 fields, found " +
                           std::to_string(fields.size()),
                       number);
    }
    const double first = parse_number(fields[0], number);
    const double value = parse_number(fields[1], number);
    const double time = by_index ? first / rate_hz : first;
    if (!times.empty() && !(time > times.back())) {
      throw ValidationError("line " + std::to_string(number) + ": timestamps must increase strictly");
    }
    times.push_back(time);
    values.push_back(value);
  }
  if (!have_header) throw ParseError("missing header row", number);
  MeasurementSeries series;
  series.times = Eigen::Map<const Vector>(times.data(), static_cast<Index>(times.size()));
  series.values = Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
  return series;
}

MeasurementSeries read_series_file(const std::filesystem::path& path, double rate_hz) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  try {
    return read_series_csv(in, rate_hz);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

Table series_table(const MeasurementSeries& series) {
  Table t;
  t.columns = {"time_s", "phase_rad"};
  for (Index i = 0; i < series.size(); ++i) t.rows.push_back({series.times(i), series.values(i)});
  return t;
}

Json model_to_json(const PredictorModel<double>& model) {
  Json doc = Json::object();
  doc["format_version"] = 1;
  doc["n"] = model.n;
  doc["K"] = model.horizons;
  doc["ridge"] = model.ridge;
  doc["feature_order"] = "oldest_first";
  doc["intercepts"] = std::vector<double>(model.intercepts.data(), model.intercepts.data() + model.intercepts.size());
  std::vector<double> flat(static_cast<std::size_t>(model.n * model.horizons));
  for (Index k = 0; k < model.horizons; ++k) {
    for (Index i = 0; i < model.n; ++i) flat[static_cast<std::size_t>(k * model.n + i)] = model.weights(i, k);
  }
  doc["weights"] = std::move(flat);
  doc["training_meta"] = {{"spectrum", model.meta.spectrum},
                          {"rows", model.meta.rows},
                          {"seeds", model.meta.seeds},
                          {"solver", to_string(model.meta.solver)},
                          {"penalty", model.meta.penalty}};
  return doc;
}

PredictorModel<double> model_from_json(const Json& doc) {
  try {
    if (doc.at("format_version").get<int>() != 1) throw ValidationError("unsupported model format_version");
    if (doc.value("feature_order", std::string("oldest_first")) != "oldest_first") {
      throw ValidationError("unsupported feature_order");
    }
    PredictorModel<double> model;
    model.n = doc.at("n").get<Index>();
    model.horizons = doc.at("K").get<Index>();
    model.ridge = doc.at("ridge").get<double>();
    if (model.n < 1 || model.horizons < 1) throw ValidationError("model n and K must be >= 1");
    const auto intercepts = doc.at("intercepts").get<std::vector<double>>();
    const auto flat = doc.at("weights").get<std::vector<double>>();
    if (static_cast<Index>(intercepts.size()) != model.horizons ||
        static_cast<Index>(flat.size()) != model.n * model.horizons) {
      throw ValidationError("model arrays do not match n and K");
    }
    model.intercepts = Eigen::Map<const Vector>(intercepts.data(), model.horizons);
    model.weights.resize(model.n, model.horizons);
    for (Index k = 0; k < model.horizons; ++k) {
      for (Index i = 0; i < model.n; ++i) model.weights(i, k) = flat[static_cast<std::size_t>(k * model.n + i)];
    }
    if (doc.contains("training_meta")) {
      const auto& meta = doc["training_meta"];
      model.meta.spectrum = meta.value("spectrum", std::string());
      model.meta.rows = meta.value("rows", Index{0});
      model.meta.seeds = meta.value("seeds", std::vector<std::uint64_t>{});
      model.meta.solver = meta.value("solver", std::string("cholesky")) == "rank_revealing"
                              ? SolverPath::RankRevealing
                              : SolverPath::Cholesky;
      model.meta.penalty = meta.value("penalty", 0.0);
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed model document: ") + e.what());
  }
}

Table rms_map_table(const RmsMap& map, bool normalized) {
  Table t;
  t.columns.push_back("n\\k");
  for (Index k = 1; k <= map.horizons(); ++k) t.columns.push_back(std::to_string(k));
  t.comments.push_back(std::string("normalization: ") + to_string(map.mode));
  t.comments.push_back("normalization_rad: " + format_number(map.normalization));
  t.comments.push_back(std::string("values: ") + (normalized ? "normalized" : "rad"));
  const Matrix values = normalized ? map.normalized() : map.rms;
  for (Index r = 0; r < values.rows(); ++r) {
    std::vector<Cell> row{map.row_labels[static_cast<std::size_t>(r)]};
    for (Index k = 0; k < values.cols(); ++k) row.emplace_back(values(r, k));
    t.add_row(std::move(row));
  }
  return t;
}

Table protocol_table(const ProtocolRecord& record) {
  Table t;
  t.columns = {"cycle", "step", "tag", "time_s", "applied_phase_rad", "correction_step_rad",
               "correction_rad", "residual_rad", "measured_rad"};
  t.comments.push_back(std::string("policy: ") + to_string(record.policy));
  t.comments.push_back(std::string("outcome: ") +
                       (record.outcome == ProtocolRecord::Outcome::Completed ? "completed" : "diverged"));
  for (const auto& s : record.steps) {
    t.rows.push_back({static_cast<long long>(s.cycle), static_cast<long long>(s.step),
                      std::string(to_string(s.tag)), s.time, s.applied_phase, s.correction_step,
                      s.correction, s.residual,
                      s.measured ? Cell(*s.measured) : Cell(std::string())});
  }
  return t;
}

Table sweep_table(const SweepTable& table) {
  Table t;
  t.columns = {"ratio", "policy", "mean_normalized_variance", "sd_mean", "min", "max",
               "ensemble_normalized_variance", "mean_correlation", "diverged"};
  for (const auto& p : table.points) {
    t.rows.push_back({p.ratio, std::string(to_string(p.policy)), p.mean, p.sd_mean, p.min, p.max,
                      p.ensemble_normalized,
                      p.correlation.empty() ? Cell(std::string()) : Cell(p.mean_correlation),
                      static_cast<long long>(p.diverged)});
  }
  return t;
}

}  // namespace qpredict
