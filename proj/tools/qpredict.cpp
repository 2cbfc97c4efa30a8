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
#include "qpredict/experiments.hpp"
#include "qpredict/io.hpp"
#include "qpredict/noise.hpp"
#include "qpredict/seed.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace qpredict;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned jobs = 1;
  std::string format = "csv";
  std::vector<std::string> inputs;
  std::optional<double> rate_hz;
  bool surrogate = false;
  std::optional<Index> n;
  std::optional<Index> horizons;
  std::string run_dir;
  bool rerun = false;
};

// Writes every artifact of one run into its directory, embedding the
// resolved config, and records checksums for the manifest.
class RunWriter {
 public:
  RunWriter(fs::path dir, std::string format, Json config)
      : dir_(std::move(dir)), format_(std::move(format)), config_(std::move(config)) {}

  void table(const std::string& stem, Table t) {
    if (format_ == "json") {
      Json doc = to_json(t);
      doc["config"] = config_;
      put(stem + ".json", doc.dump(2) + "\n");
    } else {
      t.comments.insert(t.comments.begin(), "config: " + config_.dump());
      put(stem + ".csv", to_csv(t));
    }
  }

  void json(const std::string& name, Json doc) {
    doc["config"] = config_;
    put(name, doc.dump(2) + "\n");
  }

  const Json& outputs() const { return outputs_; }
  const fs::path& dir() const { return dir_; }

 private:
  void put(const std::string& name, const std::string& bytes) { outputs_[name] = write_file(dir_ / name, bytes); }

  fs::path dir_;
  std::string format_;
  Json config_;
  Json outputs_ = Json::object();
};

Json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Json ellipse_json(const EllipseSummary<double>& e) {
  return {{"r", e.r},
          {"covariance_rad2", {{e.covariance(0, 0), e.covariance(0, 1)}, {e.covariance(1, 0), e.covariance(1, 1)}}},
          {"major_axis", {e.axes(0, 0), e.axes(1, 0)}},
          {"minor_axis", {e.axes(0, 1), e.axes(1, 1)}},
          {"lengths_rad", {e.lengths(0), e.lengths(1)}},
          {"degenerate", e.degenerate}};
}

Json lock_summary_json(const LockSummary& s) {
  Json j = {{"sample_variance_rad2", s.sample_variance},
            {"measured_variance_rad2", s.measured_variance},
            {"cycles", s.cycles}};
  j["correlation"] = s.correlation ? Json(*s.correlation) : Json(nullptr);
  return j;
}

std::string policy_name(int p) { return to_string(static_cast<Policy>(p)); }

void cmd_synth(const ExperimentConfig& c, RunWriter& w) {
  const double dt = c.synth.dt_s.value_or(c.dt());
  for (Index i = 0; i < c.synth.traces; ++i) {
    const auto trace = synthesize_noise(c.spectrum, dt, c.synth.length, derive_seed(c.master_seed, "synth", i));
    char stem[32];
    std::snprintf(stem, sizeof stem, "trace_%03lld", static_cast<long long>(i));
    w.table(stem, trace_table(trace));
  }
}

void cmd_train(const ExperimentConfig& c, const Options& o, RunWriter& w) {
  const Index n = o.n.value_or(c.fig1.n_values.back());
  const Index horizons = o.horizons.value_or(c.fig1.horizons);
  std::vector<TrainingSet<double>> parts;
  std::vector<std::uint64_t> seeds;
  if (!o.inputs.empty()) {
    if (!o.rate_hz) throw ValidationError("--rate-hz is required with --input");
    for (const auto& path : o.inputs) {
      const auto series = read_series_file(path, *o.rate_hz);
      try {
        parts.push_back(build_training_matrix<double>(
            std::span<const double>(series.values.data(), static_cast<std::size_t>(series.size())), n, horizons));
      } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
      }
    }
  } else {
    const auto meas = c.measurement_at(c.fig1.sampling_ratio);
    seeds = derive_seeds(c.master_seed, "fig1-train", c.fig1.training_traces);
    for (auto seed : seeds) {
      const auto run = simulate_free_running(c.spectrum, meas, c.measurement.samples_per_measurement,
                                             c.fig1.training_length, seed);
      parts.push_back(build_training_matrix<double>(
          std::span<const double>(run.series.values.data(), static_cast<std::size_t>(run.series.size())), n,
          horizons));
    }
  }
  const auto set = stack<double>(parts);
  auto model = train(set, c.ridge);
  model.meta.spectrum = o.inputs.empty() ? c.spectrum.descriptor() : "external";
  model.meta.seeds = seeds;
  w.json("model.json", model_to_json(model));

  const Vector fit = residual_rms(model, set);
  const Vector baseline = traditional_residual_rms(set);
  Table t;
  t.columns = {"k", "model_rms_rad", "traditional_rms_rad", "dominates_traditional"};
  bool all = true;
  for (Index k = 0; k < horizons; ++k) {
    const bool ok = fit(k) <= baseline(k);
    all = all && ok;
    t.rows.push_back({static_cast<long long>(k + 1), fit(k), baseline(k), static_cast<long long>(ok)});
  }
  t.comments.push_back(std::string("solver: ") + to_string(model.meta.solver));
  t.comments.push_back(std::string("dominates_traditional_everywhere: ") + (all ? "true" : "false"));
  w.table("training_report", std::move(t));
}

void cmd_fig1(const ExperimentConfig& c, const Options& o, RunWriter& w) {
  const auto r = run_fig1(c, o.jobs);
  w.table("rms_map", rms_map_table(r.map, true));
  w.table("rms_map_rad", rms_map_table(r.map, false));
  RmsMap se{r.map.row_labels, r.standard_error, Normalization::None, 1.0};
  w.table("rms_map_standard_error_rad", rms_map_table(se, false));
  w.table("overlay", r.overlay);
  Json j;
  j["correlation"] = r.correlation;
  j["ellipse"] = ellipse_json(r.ellipse);
  j["mean_predictor_rms_rad"] = vector_json(r.mean_predictor_rms);
  j["traces"] = r.traces;
  j["windows_per_trace"] = r.windows;
  j["training_dominance"] = r.training_dominance;
  Json adv = Json::object();
  for (std::size_t i = 0; i < r.n_values.size(); ++i) {
    adv[std::to_string(r.n_values[i])] = vector_json(r.advantage_lower.row(static_cast<Index>(i)).transpose());
  }
  j["advantage_over_traditional_lower_rad"] = adv;
  w.json("fig1_summary.json", j);
  for (std::size_t i = 0; i < r.models.size(); ++i) {
    w.json("model_n" + std::to_string(r.n_values[i]) + ".json", model_to_json(r.models[i]));
  }
}

void cmd_tdm(const ExperimentConfig& c, RunWriter& w) {
  const auto r = run_tdm_experiment(c);
  w.table("tdm_rms", r.rms_table());
  for (int p = 0; p < 3; ++p) w.table("tdm_record_" + policy_name(p), protocol_table(r.records[p]));
  Json j;
  j["integrated_phase_error_reduction"] = r.integrated_reduction;
  j["cycle_reduction"] = vector_json(r.cycle_reduction);
  j["bookkeeping_max_deviation_rad"] = r.bookkeeping;
  j["cycles"] = r.cycles;
  j["k_stab"] = r.k_stab;
  w.json("tdm_summary.json", j);
  w.json("model.json", model_to_json(r.model));
}

void cmd_lock(const ExperimentConfig& c, const Options& o, RunWriter& w) {
  const auto r = run_lock_experiment(c, o.jobs);
  w.table("lock_variance_curve", r.variance_curve);
  for (int p = 0; p < 3; ++p) w.table("lock_record_" + policy_name(p), protocol_table(r.first_records[p]));
  Json j;
  Json realisations = Json::array();
  for (const auto& row : r.summaries) {
    Json item = Json::object();
    for (int p = 0; p < 3; ++p) item[policy_name(p)] = lock_summary_json(row[p]);
    realisations.push_back(item);
  }
  j["realisations"] = realisations;
  j["traditional_over_predictive"] = r.traditional_over_predictive;
  j["predictive_below_free_running_every_realisation"] = r.predictive_below_free_every;
  Json ellipses = Json::object();
  for (int p = 1; p < 3; ++p) {
    if (r.ellipses[p]) ellipses[policy_name(p)] = ellipse_json(*r.ellipses[p]);
  }
  j["ellipses_applied_vs_correction"] = ellipses;
  j["bookkeeping_max_deviation_rad"] = r.bookkeeping;
  w.json("lock_summary.json", j);
  w.json("model.json", model_to_json(r.model));
}

void cmd_sweep(const ExperimentConfig& c, const Options& o, RunWriter& w) {
  const auto table = sweep_sampling(sweep_settings(c, o.jobs));
  w.table("sweep", sweep_table(table));
  Json points = Json::array();
  for (const auto& p : table.points) {
    points.push_back({{"ratio", p.ratio},
                      {"policy", to_string(p.policy)},
                      {"normalized_variance", p.normalized_variance},
                      {"correlation", p.correlation},
                      {"diverged", p.diverged}});
  }
  w.json("sweep_points.json", {{"points", points}});
}

void cmd_ingest(const ExperimentConfig& c, const Options& o, RunWriter& w) {
  MeasurementSeries series;
  double rate = 0.0;
  if (o.surrogate) {
    if (!o.inputs.empty()) throw ValidationError("--surrogate and --input are exclusive");
    rate = o.rate_hz.value_or(c.ingest.surrogate.rate_hz);
    auto settings = c.ingest.surrogate;
    settings.rate_hz = rate;
    series = make_intrinsic_surrogate(settings, derive_seed(c.master_seed, "surrogate", 0));
    w.table("series", series_table(series));
  } else {
    if (o.inputs.size() != 1) throw ValidationError("ingest needs exactly one --input file or --surrogate");
    if (!o.rate_hz) throw ValidationError("--rate-hz is required with --input");
    rate = *o.rate_hz;
    series = read_series_file(o.inputs.front(), rate);
  }
  const auto r = analyze_series(series, rate, c.ingest, c.ridge);
  w.table("rms_map", rms_map_table(r.map, true));
  w.table("variance_vs_n", r.variance_table());
  w.table("periodogram", r.periodogram_table());
  Json j;
  j["length"] = series.size();
  j["split"] = r.split;
  j["uncorrected_rms_rad"] = r.uncorrected_rms;
  j["best_improvement"] = r.best_improvement;
  j["best_cell"] = {{"n", r.best_row}, {"k", r.best_horizon}};
  j["traditional_variance_rad2"] = r.traditional_variance;
  j["uncorrected_variance_rad2"] = r.uncorrected_variance;
  w.json("ingest_summary.json", j);
}

Json arguments_json(const Options& o) {
  Json a = Json::object();
  a["format"] = o.format;
  if (!o.inputs.empty()) a["input"] = o.inputs;
  if (o.rate_hz) a["rate_hz"] = *o.rate_hz;
  if (o.surrogate) a["surrogate"] = true;
  if (o.n) a["n"] = *o.n;
  if (o.horizons) a["horizons"] = *o.horizons;
  return a;
}

Options options_from_arguments(const Json& a) {
  Options o;
  o.format = a.value("format", std::string("csv"));
  if (a.contains("input")) o.inputs = a["input"].get<std::vector<std::string>>();
  if (a.contains("rate_hz")) o.rate_hz = a["rate_hz"].get<double>();
  o.surrogate = a.value("surrogate", false);
  if (a.contains("n")) o.n = a["n"].get<Index>();
  if (a.contains("horizons")) o.horizons = a["horizons"].get<Index>();
  return o;
}

Json execute(const std::string& command, const ExperimentConfig& c, const Options& o, const fs::path& dir) {
  if (o.format != "csv" && o.format != "json") throw ValidationError("--format must be csv or json");
  const auto start = std::chrono::steady_clock::now();
  const Json echo = c.to_json();
  RunWriter w(dir, o.format, echo);
  write_file(dir / "config.json", echo.dump(2) + "\n");
  if (command == "synth") cmd_synth(c, w);
  else if (command == "train") cmd_train(c, o, w);
  else if (command == "fig1") cmd_fig1(c, o, w);
  else if (command == "tdm") cmd_tdm(c, w);
  else if (command == "lock") cmd_lock(c, o, w);
  else if (command == "sweep") cmd_sweep(c, o, w);
  else if (command == "ingest") cmd_ingest(c, o, w);
  else throw ValidationError("unknown command '" + command + "'");
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Json manifest = {{"tool", "qpredict"},
                   {"version", QPREDICT_VERSION},
                   {"command", command},
                   {"arguments", arguments_json(o)},
                   {"config", echo},
                   {"outputs", w.outputs()},
                   {"wall_clock_s", seconds}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

int cmd_report(const Options& o) {
  if (o.run_dir.empty()) throw ValidationError("report needs --run DIR");
  const fs::path dir(o.run_dir);
  Json manifest;
  try {
    manifest = Json::parse(read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed manifest: " + std::string(e.what()));
  }
  Json report = {{"run", o.run_dir}, {"command", manifest.at("command")}};
  bool ok = true;
  Json files = Json::object();
  for (const auto& [name, sum] : manifest.at("outputs").items()) {
    std::string actual;
    try {
      actual = checksum(read_file(dir / name));
    } catch (const IoError&) {
      actual = "missing";
    }
    const bool match = actual == sum.get<std::string>();
    ok = ok && match;
    files[name] = {{"expected", sum}, {"actual", actual}, {"match", match}};
  }
  report["files"] = files;
  if (o.rerun) {
    if (manifest.at("version").get<std::string>() != QPREDICT_VERSION) {
      throw ValidationError("manifest was written by version " + manifest.at("version").get<std::string>());
    }
    const auto config = parse_config(manifest.at("config"));
    Options again = options_from_arguments(manifest.at("arguments"));
    again.jobs = o.jobs;
    const fs::path scratch = dir / ".rerun";
    const Json fresh = execute(manifest.at("command").get<std::string>(), config, again, scratch);
    bool same = fresh.at("outputs") == manifest.at("outputs");
    report["rerun_identical"] = same;
    ok = ok && same;
    std::error_code ec;
    fs::remove_all(scratch, ec);
  }
  report["ok"] = ok;
  std::cout << report.dump(2) << "\n";
  return ok ? 0 : 3;
}

void print_error(const std::string& kind, const std::string& message, const Json& extra = Json::object()) {
  Json j = {{"error", kind}, {"message", message}};
  for (const auto& [k, v] : extra.items()) j[k] = v;
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predict and compensate qubit dephasing noise"};
  app.set_version_flag("--version", std::string(QPREDICT_VERSION));
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Master seed override");
    sub->add_option("--out", o.out, "Run output directory");
    sub->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--format", o.format, "Table format")->check(CLI::IsMember({"csv", "json"}));
  };
  std::map<std::string, CLI::App*> subs;
  subs["synth"] = app.add_subcommand("synth", "Synthesize noise traces");
  subs["train"] = app.add_subcommand("train", "Train a predictor");
  subs["fig1"] = app.add_subcommand("fig1", "Offline prediction: RMS map, overlay, correlation");
  subs["tdm"] = app.add_subcommand("tdm", "Time-division multiplexed stabilisation");
  subs["lock"] = app.add_subcommand("lock", "Predictive lock ensemble");
  subs["sweep"] = app.add_subcommand("sweep", "Lock variance across sampling frequencies");
  subs["ingest"] = app.add_subcommand("ingest", "Analyze a recorded measurement series");
  for (auto& [name, sub] : subs) common(sub);
  subs["train"]->add_option("--input", o.inputs, "Measurement series CSV files");
  subs["train"]->add_option("--rate-hz", o.rate_hz, "Declared sampling rate");
  subs["train"]->add_option("--n", o.n, "Feature window");
  subs["train"]->add_option("--horizons", o.horizons, "Horizon count K");
  subs["ingest"]->add_option("--input", o.inputs, "Measurement series CSV");
  subs["ingest"]->add_option("--rate-hz", o.rate_hz, "Declared sampling rate");
  subs["ingest"]->add_flag("--surrogate", o.surrogate, "Use the 1/f^2 + white surrogate series");
  auto* report = app.add_subcommand("report", "Verify a run directory against its manifest");
  report->add_option("--run", o.run_dir, "Run directory")->required();
  report->add_flag("--rerun", o.rerun, "Regenerate and compare checksums");
  report->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (report->parsed()) return cmd_report(o);
    for (auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      ExperimentConfig config = o.config_path.empty() ? parse_config(Json::object()) : load_config(o.config_path);
      if (sub->count("--seed")) config.master_seed = seed;
      const fs::path dir = o.out.empty() ? fs::path(config.output_directory) / name : fs::path(o.out);
      const Json manifest = execute(name, config, o, dir);
      std::cout << Json({{"command", name}, {"out", dir.string()}, {"outputs", manifest["outputs"]}}).dump() << "\n";
      return 0;
    }
  } catch (const ParseError& e) {
    print_error(e.kind(), e.what(), {{"line", e.line()}});
    return 2;
  } catch (const Error& e) {
    print_error(e.kind(), e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}
