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

#include "qpredict/config.hpp"

#include "qpredict/error.hpp"
#include "qpredict/noise.hpp"
#include "qpredict/protocols.hpp"
#include "qpredict/seed.hpp"

#include <cmath>
#include <set>

namespace qpredict {
namespace {

// Reads keys of one JSON object and rejects any it was not asked about.
class Section {
 public:
  Section(const Json* doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (doc_ && !doc_->is_object()) throw ValidationError(path_ + ": expected an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    used_.insert(key);
    if (!doc_ || !doc_->contains(key)) return;
    const Json& v = (*doc_)[key];
    try {
      if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ValidationError(where(key) + ": expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (!v.is_number_unsigned()) throw ValidationError(where(key) + ": expected a non-negative integer");
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ValidationError(where(key) + ": expected a number");
      }
      out = v.get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ValidationError(where(key) + ": wrong type");
    }
  }

  template <typename T>
  void read(const char* key, std::optional<T>& out) {
    used_.insert(key);
    if (!doc_ || !doc_->contains(key) || (*doc_)[key].is_null()) return;
    T value{};
    read(key, value);
    out = value;
  }

  template <typename T>
  void read_list(const char* key, std::vector<T>& out) {
    used_.insert(key);
    if (!doc_ || !doc_->contains(key)) return;
    const Json& v = (*doc_)[key];
    if (!v.is_array() || v.empty()) throw ValidationError(where(key) + ": expected a non-empty array");
    std::vector<T> values;
    for (const auto& item : v) {
      if (std::is_integral_v<T> ? !item.is_number_integer() : !item.is_number()) {
        throw ValidationError(where(key) + ": wrong element type");
      }
      values.push_back(item.get<T>());
    }
    out = std::move(values);
  }

  const Json* child(const char* key) {
    used_.insert(key);
    if (!doc_ || !doc_->contains(key)) return nullptr;
    return &(*doc_)[key];
  }

  bool has(const char* key) const { return doc_ && doc_->contains(key); }

  void finish() const {
    if (!doc_) return;
    for (const auto& item : doc_->items()) {
      if (!used_.count(item.key())) throw ValidationError(where(item.key().c_str()) + ": unknown key");
    }
  }

  std::string where(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const Json* doc_;
  std::string path_;
  std::set<std::string> used_;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

Json index_list(const std::vector<Index>& v) { return Json(v); }

void check_n_values(const std::vector<Index>& values, const std::string& where) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(values[i] >= 1, where + ": n values must be >= 1");
    require(i == 0 || values[i] > values[i - 1], where + ": n values must increase");
  }
}

}  // namespace

PowerSpectrum parse_spectrum(const Json& doc) {
  Section s(&doc, "spectrum");
  std::string kind = "flat_top";
  s.read("kind", kind);
  if (kind == "flat_top") {
    FlatTop shape{0.01, 1.0};
    s.read("level_rad2_s", shape.level);
    s.read("cutoff_rad_per_s", shape.cutoff);
    s.finish();
    return PowerSpectrum(shape);
  }
  if (kind == "one_over_f2_plus_white") {
    OneOverF2PlusWhite shape;
    s.read("coefficient_rad2_per_s", shape.coefficient);
    s.read("white_level_rad2_s", shape.white_level);
    s.read("upper_cutoff_rad_per_s", shape.upper_cutoff);
    s.finish();
    return PowerSpectrum(shape);
  }
  if (kind == "tabulated") {
    Tabulated shape;
    s.read_list("frequencies_rad_per_s", shape.frequencies);
    s.read_list("densities_rad2_s", shape.densities);
    s.finish();
    return PowerSpectrum(shape);
  }
  throw ValidationError("spectrum.kind: unknown kind '" + kind + "'");
}

Json spectrum_to_json(const PowerSpectrum& spectrum) {
  return spectrum.visit([](const auto& shape) -> Json {
    using T = std::decay_t<decltype(shape)>;
    Json j = Json::object();
    if constexpr (std::is_same_v<T, FlatTop>) {
      j["kind"] = "flat_top";
      j["level_rad2_s"] = shape.level;
      j["cutoff_rad_per_s"] = shape.cutoff;
    } else if constexpr (std::is_same_v<T, OneOverF2PlusWhite>) {
      j["kind"] = "one_over_f2_plus_white";
      j["coefficient_rad2_per_s"] = shape.coefficient;
      j["white_level_rad2_s"] = shape.white_level;
      j["upper_cutoff_rad_per_s"] = shape.upper_cutoff;
    } else {
      j["kind"] = "tabulated";
      j["frequencies_rad_per_s"] = shape.frequencies;
      j["densities_rad2_s"] = shape.densities;
    }
    return j;
  });
}

Readout ExperimentConfig::readout() const {
  const auto& r = measurement.readout;
  if (r.kind == ReadoutSpec::Kind::Projection) return ProjectionReadout{r.ensemble_size};
  if (r.sigma_rad) return GaussianReadout{*r.sigma_rad};
  const Index m = measurement.samples_per_measurement;
  const double variance = windowed_variance(spectrum, dt(), fft_friendly_length(1 << 16), m);
  return GaussianReadout{readout_sigma_for_correlation(*r.target_correlation, variance)};
}

MeasurementModel ExperimentConfig::measurement_at(double ratio) const {
  const double dead = dead_time_for_ratio(ratio, spectrum.characteristic_cutoff(), measurement.duration_s);
  return MeasurementModel(measurement.duration_s, dead, readout());
}

Json ExperimentConfig::to_json() const {
  Json j = Json::object();
  j["seed"] = {{"master", master_seed}, {"derivation", kSeedDerivation}};
  j["spectrum"] = spectrum_to_json(spectrum);
  Json readout_doc = Json::object();
  if (measurement.readout.kind == ReadoutSpec::Kind::Projection) {
    readout_doc["kind"] = "projection";
    readout_doc["ensemble_size"] = measurement.readout.ensemble_size;
  } else {
    readout_doc["kind"] = "gaussian";
    if (measurement.readout.target_correlation) {
      readout_doc["target_correlation"] = *measurement.readout.target_correlation;
      readout_doc["resolved_sigma_rad"] = std::get<GaussianReadout>(readout()).sigma;
    } else {
      readout_doc["sigma_rad"] = *measurement.readout.sigma_rad;
    }
  }
  j["measurement"] = {{"duration_s", measurement.duration_s},
                      {"samples_per_measurement", measurement.samples_per_measurement},
                      {"readout", readout_doc}};
  j["predictor"] = {{"ridge", ridge}};
  j["fig1"] = {{"sampling_ratio", fig1.sampling_ratio},
               {"n_values", index_list(fig1.n_values)},
               {"horizons", fig1.horizons},
               {"training_traces", fig1.training_traces},
               {"training_length", fig1.training_length},
               {"validation_traces", fig1.validation_traces},
               {"validation_length", fig1.validation_length},
               {"bootstrap_resamples", fig1.bootstrap_resamples},
               {"normalization", to_string(fig1.normalization)}};
  j["tdm"] = {{"sampling_ratio", tdm.sampling_ratio},
              {"n_probe", tdm.n_probe},
              {"k_stab", tdm.k_stab},
              {"cycles", tdm.cycles},
              {"diagnostic_step", tdm.diagnostic_step},
              {"training_traces", tdm.training_traces},
              {"training_length", tdm.training_length},
              {"bootstrap_resamples", tdm.bootstrap_resamples}};
  j["lock"] = {{"sampling_ratio", lock.sampling_ratio},
               {"n", lock.n},
               {"cycles", lock.cycles},
               {"horizon", lock.horizon},
               {"realisations", lock.realisations},
               {"training_traces", lock.training_traces},
               {"training_length", lock.training_length}};
  j["sweep"] = {{"sampling_ratios", sweep.sampling_ratios},
                {"seeds", sweep.seeds},
                {"training_traces", sweep.training_traces},
                {"training_length", sweep.training_length}};
  j["ingest"] = {{"n_values", index_list(ingest.n_values)},
                 {"horizons", ingest.horizons},
                 {"train_fraction", ingest.train_fraction},
                 {"normalization", to_string(ingest.normalization)},
                 {"smoothing_window", ingest.smoothing_window},
                 {"surrogate",
                  {{"spectrum", spectrum_to_json(ingest.surrogate.spectrum)},
                   {"readout_sigma_rad", ingest.surrogate.readout_sigma_rad},
                   {"rate_hz", ingest.surrogate.rate_hz},
                   {"length", ingest.surrogate.length},
                   {"samples_per_measurement", ingest.surrogate.samples_per_measurement}}}};
  Json synth_doc = {{"traces", synth.traces}, {"length", synth.length}};
  synth_doc["dt_s"] = synth.dt_s ? Json(*synth.dt_s) : Json(nullptr);
  j["synth"] = synth_doc;
  j["output"] = {{"directory", output_directory}};
  return j;
}

ExperimentConfig parse_config(const Json& doc) {
  ExperimentConfig c;
  Section top(&doc, "");

  Section seed(top.child("seed"), "seed");
  seed.read("master", c.master_seed);
  std::string derivation(kSeedDerivation);
  seed.read("derivation", derivation);
  require(derivation == kSeedDerivation, "seed.derivation: only '" + std::string(kSeedDerivation) + "' is supported");
  seed.finish();

  if (const Json* s = top.child("spectrum")) c.spectrum = parse_spectrum(*s);

  Section meas(top.child("measurement"), "measurement");
  meas.read("duration_s", c.measurement.duration_s);
  meas.read("samples_per_measurement", c.measurement.samples_per_measurement);
  Section readout(meas.child("readout"), "measurement.readout");
  std::string kind = "gaussian";
  readout.read("kind", kind);
  auto& r = c.measurement.readout;
  if (kind == "gaussian") {
    r.kind = ReadoutSpec::Kind::Gaussian;
    readout.read("sigma_rad", r.sigma_rad);
    readout.read("target_correlation", r.target_correlation);
    std::optional<double> resolved;
    readout.read("resolved_sigma_rad", resolved);  // echo field, recomputed
    if (!r.sigma_rad && !r.target_correlation) r.target_correlation = 0.97;
    require(!(r.sigma_rad && r.target_correlation),
            "measurement.readout: give sigma_rad or target_correlation, not both");
    require(!r.sigma_rad || *r.sigma_rad >= 0.0, "measurement.readout.sigma_rad must be >= 0");
    require(!r.target_correlation || (*r.target_correlation > 0.0 && *r.target_correlation <= 1.0),
            "measurement.readout.target_correlation must lie in (0, 1]");
  } else if (kind == "projection") {
    r.kind = ReadoutSpec::Kind::Projection;
    readout.read("ensemble_size", r.ensemble_size);
    require(r.ensemble_size >= 1, "measurement.readout.ensemble_size must be >= 1");
  } else {
    throw ValidationError("measurement.readout.kind: unknown kind '" + kind + "'");
  }
  readout.finish();
  meas.finish();
  require(c.measurement.duration_s > 0.0 && std::isfinite(c.measurement.duration_s),
          "measurement.duration_s must be > 0");
  require(c.measurement.samples_per_measurement >= 1, "measurement.samples_per_measurement must be >= 1");
  if (!(kTwoPi / c.dt() > 2.0 * c.spectrum.highest_frequency())) {
    throw ConfigurationError("measurement sampling grid (dt = " + format_number(c.dt()) +
                             " s) aliases the spectrum; raise samples_per_measurement");
  }

  Section pred(top.child("predictor"), "predictor");
  pred.read("ridge", c.ridge);
  pred.finish();
  require(c.ridge >= 0.0 && std::isfinite(c.ridge), "predictor.ridge must be >= 0");

  Section f(top.child("fig1"), "fig1");
  f.read("sampling_ratio", c.fig1.sampling_ratio);
  f.read_list("n_values", c.fig1.n_values);
  f.read("horizons", c.fig1.horizons);
  f.read("training_traces", c.fig1.training_traces);
  f.read("training_length", c.fig1.training_length);
  f.read("validation_traces", c.fig1.validation_traces);
  f.read("validation_length", c.fig1.validation_length);
  f.read("bootstrap_resamples", c.fig1.bootstrap_resamples);
  std::string fig1_norm = to_string(c.fig1.normalization);
  f.read("normalization", fig1_norm);
  c.fig1.normalization = normalization_from_string(fig1_norm);
  f.finish();
  check_n_values(c.fig1.n_values, "fig1.n_values");
  require(c.fig1.horizons >= 1, "fig1.horizons must be >= 1");
  require(c.fig1.training_traces >= 1 && c.fig1.validation_traces >= 1, "fig1 trace counts must be >= 1");
  require(c.fig1.training_length >= c.fig1.n_values.back() + c.fig1.horizons,
          "fig1.training_length must cover max n + horizons");
  require(c.fig1.validation_length >= c.fig1.n_values.back() + c.fig1.horizons,
          "fig1.validation_length must cover max n + horizons");
  require(c.fig1.bootstrap_resamples >= 0, "fig1.bootstrap_resamples must be >= 0");
  (void)c.measurement_at(c.fig1.sampling_ratio);

  Section t(top.child("tdm"), "tdm");
  t.read("sampling_ratio", c.tdm.sampling_ratio);
  t.read("n_probe", c.tdm.n_probe);
  t.read("k_stab", c.tdm.k_stab);
  t.read("cycles", c.tdm.cycles);
  t.read("diagnostic_step", c.tdm.diagnostic_step);
  t.read("training_traces", c.tdm.training_traces);
  t.read("training_length", c.tdm.training_length);
  t.read("bootstrap_resamples", c.tdm.bootstrap_resamples);
  t.finish();
  require(c.tdm.n_probe >= 1 && c.tdm.k_stab >= 1 && c.tdm.cycles >= 1, "tdm n_probe, k_stab, cycles must be >= 1");
  require(c.tdm.diagnostic_step >= 0 && c.tdm.diagnostic_step <= c.tdm.k_stab,
          "tdm.diagnostic_step must lie in 0..k_stab");
  require(c.tdm.training_traces >= 1, "tdm.training_traces must be >= 1");
  require(c.tdm.training_length >= c.tdm.n_probe + c.tdm.k_stab, "tdm.training_length must cover n_probe + k_stab");
  require(c.tdm.bootstrap_resamples >= 0, "tdm.bootstrap_resamples must be >= 0");
  (void)c.measurement_at(c.tdm.sampling_ratio);

  Section l(top.child("lock"), "lock");
  l.read("sampling_ratio", c.lock.sampling_ratio);
  l.read("n", c.lock.n);
  l.read("cycles", c.lock.cycles);
  l.read("horizon", c.lock.horizon);
  l.read("realisations", c.lock.realisations);
  l.read("training_traces", c.lock.training_traces);
  l.read("training_length", c.lock.training_length);
  l.finish();
  require(c.lock.n >= 1 && c.lock.horizon >= 1, "lock n and horizon must be >= 1");
  require(c.lock.cycles >= 2, "lock.cycles must be >= 2");
  require(c.lock.realisations >= 1 && c.lock.training_traces >= 1, "lock counts must be >= 1");
  require(c.lock.training_length >= c.lock.n + c.lock.horizon, "lock.training_length must cover n + horizon");
  (void)c.measurement_at(c.lock.sampling_ratio);

  Section w(top.child("sweep"), "sweep");
  w.read_list("sampling_ratios", c.sweep.sampling_ratios);
  w.read("seeds", c.sweep.seeds);
  w.read("training_traces", c.sweep.training_traces);
  w.read("training_length", c.sweep.training_length);
  w.finish();
  require(c.sweep.seeds >= 1 && c.sweep.training_traces >= 1, "sweep counts must be >= 1");
  require(c.sweep.training_length >= c.lock.n + c.lock.horizon, "sweep.training_length must cover n + horizon");
  for (double ratio : c.sweep.sampling_ratios) (void)c.measurement_at(ratio);

  Section g(top.child("ingest"), "ingest");
  g.read_list("n_values", c.ingest.n_values);
  g.read("horizons", c.ingest.horizons);
  g.read("train_fraction", c.ingest.train_fraction);
  std::string ingest_norm = to_string(c.ingest.normalization);
  g.read("normalization", ingest_norm);
  c.ingest.normalization = normalization_from_string(ingest_norm);
  g.read("smoothing_window", c.ingest.smoothing_window);
  Section sur(g.child("surrogate"), "ingest.surrogate");
  if (const Json* s = sur.child("spectrum")) c.ingest.surrogate.spectrum = parse_spectrum(*s);
  sur.read("readout_sigma_rad", c.ingest.surrogate.readout_sigma_rad);
  sur.read("rate_hz", c.ingest.surrogate.rate_hz);
  sur.read("length", c.ingest.surrogate.length);
  sur.read("samples_per_measurement", c.ingest.surrogate.samples_per_measurement);
  sur.finish();
  g.finish();
  check_n_values(c.ingest.n_values, "ingest.n_values");
  require(c.ingest.horizons >= 1, "ingest.horizons must be >= 1");
  require(c.ingest.train_fraction > 0.0 && c.ingest.train_fraction < 1.0, "ingest.train_fraction must lie in (0, 1)");
  require(c.ingest.smoothing_window >= 1 && c.ingest.smoothing_window % 2 == 1,
          "ingest.smoothing_window must be odd and >= 1");
  const auto& sg = c.ingest.surrogate;
  require(sg.readout_sigma_rad >= 0.0, "ingest.surrogate.readout_sigma_rad must be >= 0");
  require(sg.rate_hz > 0.0, "ingest.surrogate.rate_hz must be > 0");
  require(sg.samples_per_measurement >= 1, "ingest.surrogate.samples_per_measurement must be >= 1");
  require(sg.length >= 2 * (c.ingest.n_values.back() + c.ingest.horizons),
          "ingest.surrogate.length is too short for the n/horizon grid");
  if (!(kTwoPi * sg.rate_hz * double(sg.samples_per_measurement) > 2.0 * sg.spectrum.highest_frequency())) {
    throw ConfigurationError("ingest.surrogate sampling grid aliases its spectrum");
  }

  Section y(top.child("synth"), "synth");
  y.read("traces", c.synth.traces);
  y.read("length", c.synth.length);
  y.read("dt_s", c.synth.dt_s);
  y.finish();
  require(c.synth.traces >= 1 && c.synth.length >= 1, "synth traces and length must be >= 1");
  require(!c.synth.dt_s || *c.synth.dt_s > 0.0, "synth.dt_s must be > 0");
  const double synth_dt = c.synth.dt_s.value_or(c.dt());
  if (!(kTwoPi / synth_dt > 2.0 * c.spectrum.highest_frequency())) {
    throw ConfigurationError("synth.dt_s aliases the spectrum");
  }

  Section o(top.child("output"), "output");
  o.read("directory", c.output_directory);
  o.finish();

  top.finish();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

}  // namespace qpredict
