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

#include "qpredict/experiments.hpp"

#include "qpredict/error.hpp"
#include "qpredict/noise.hpp"
#include "qpredict/parallel.hpp"
#include "qpredict/seed.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace qpredict {
namespace {

constexpr Policy kPolicies[] = {Policy::FreeRunning, Policy::Traditional, Policy::Predictive};

void require_disjoint(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  const std::set<std::uint64_t> seen(a.begin(), a.end());
  for (auto s : b) {
    if (seen.count(s)) throw ValidationError("training and evaluation seed sets overlap");
  }
}

double quantile(std::vector<double> values, double q) {
  BootstrapResult r;
  r.replicates = std::move(values);
  return r.quantile(q);
}

double standard_error(std::vector<double> values) {
  BootstrapResult r;
  r.replicates = std::move(values);
  return r.standard_error();
}

std::vector<Index> resample(std::mt19937_64& rng, Index count) {
  std::uniform_int_distribution<Index> pick(0, count - 1);
  std::vector<Index> idx(static_cast<std::size_t>(count));
  for (auto& i : idx) i = pick(rng);
  return idx;
}

// Predictions and truths on a common set of evaluation windows: the window
// with newest feature b predicts targets b+1..b+K. Windows start at
// max_n - 1 so every row sees the same targets.
struct Evaluation {
  Matrix truth;                    // windows x K
  Vector last;                     // newest feature per window
  std::vector<Matrix> predictions; // per model
};

Evaluation evaluate(const Vector& features, const Vector& truth, const std::vector<PredictorModel<double>>& models,
                    Index max_n, Index horizons) {
  const Index windows = features.size() - max_n - horizons + 1;
  if (windows < 1) throw ValidationError("evaluation series is shorter than max n + K");
  Evaluation e;
  e.truth.resize(windows, horizons);
  for (Index w = 0; w < windows; ++w) e.truth.row(w) = truth.segment(max_n + w, horizons).transpose();
  e.last = features.segment(max_n - 1, windows);
  for (const auto& model : models) {
    Matrix f(windows, model.n);
    for (Index w = 0; w < windows; ++w) {
      f.row(w) = features.segment(max_n - model.n + w, model.n).transpose();
    }
    e.predictions.push_back(predict_rows(model, f));
  }
  return e;
}

Vector column_mse(const Matrix& residual) {
  return residual.colwise().squaredNorm().transpose() / double(residual.rows());
}

std::vector<std::string> row_labels(const std::vector<Index>& n_values) {
  std::vector<std::string> labels{"1*"};
  for (Index n : n_values) labels.push_back(std::to_string(n));
  return labels;
}

Matrix residual_matrix(const ProtocolRecord& record, Index cycles, Index k_stab) {
  Matrix out = Matrix::Zero(cycles, k_stab);
  for (const auto& s : record.steps) {
    if (s.tag == PeriodTag::Stabilise || s.tag == PeriodTag::Diagnostic) out(s.cycle, s.step - 1) = s.residual;
  }
  return out;
}

Vector lock_residuals(const ProtocolRecord& record) {
  std::vector<double> r;
  for (const auto& s : record.steps) {
    if (s.tag == PeriodTag::LockCycle && s.measured) r.push_back(s.residual);
  }
  return Eigen::Map<const Vector>(r.data(), static_cast<Index>(r.size()));
}

}  // namespace

std::vector<std::uint64_t> derive_seeds(std::uint64_t master, const char* role, Index count) {
  std::vector<std::uint64_t> out;
  for (Index i = 0; i < count; ++i) out.push_back(derive_seed(master, role, static_cast<std::uint64_t>(i)));
  return out;
}

Fig1Result run_fig1(const ExperimentConfig& config, unsigned jobs) {
  const auto& s = config.fig1;
  const MeasurementModel meas = config.measurement_at(s.sampling_ratio);
  const Index m = config.measurement.samples_per_measurement;
  const Index horizons = s.horizons;
  const Index max_n = s.n_values.back();
  const auto nv = static_cast<Index>(s.n_values.size());
  const auto train_seeds = derive_seeds(config.master_seed, "fig1-train", s.training_traces);
  const auto val_seeds = derive_seeds(config.master_seed, "fig1-validate", s.validation_traces);
  require_disjoint(train_seeds, val_seeds);

  std::vector<SimulatedRun> training(train_seeds.size());
  std::vector<SimulatedRun> validation(val_seeds.size());
  parallel_for(static_cast<Index>(train_seeds.size() + val_seeds.size()), jobs, [&](Index i) {
    const auto t = static_cast<std::size_t>(i);
    if (t < train_seeds.size()) {
      training[t] = simulate_free_running(config.spectrum, meas, m, s.training_length, train_seeds[t]);
    } else {
      const auto v = t - train_seeds.size();
      validation[v] = simulate_free_running(config.spectrum, meas, m, s.validation_length, val_seeds[v]);
    }
  });

  Fig1Result out;
  out.n_values = s.n_values;
  out.models.resize(s.n_values.size());
  out.training_dominance.assign(s.n_values.size(), false);
  Vector label_mean;
  std::vector<char> dominance(s.n_values.size(), 0);
  parallel_for(nv, jobs, [&](Index r) {
    const Index n = s.n_values[static_cast<std::size_t>(r)];
    std::vector<TrainingSet<double>> parts;
    for (const auto& run : training) {
      parts.push_back(build_training_matrix<double>(
          std::span<const double>(run.series.values.data(), static_cast<std::size_t>(run.series.size())), n,
          horizons));
    }
    const auto set = stack<double>(parts);
    auto model = train(set, config.ridge);
    model.meta.spectrum = config.spectrum.descriptor();
    model.meta.seeds = train_seeds;
    dominance[static_cast<std::size_t>(r)] =
        (residual_rms(model, set).array() <= traditional_residual_rms(set).array()).all();
    if (r == nv - 1) label_mean = mean_predict(set.labels).values;
    out.models[static_cast<std::size_t>(r)] = std::move(model);
  });
  for (std::size_t r = 0; r < dominance.size(); ++r) out.training_dominance[r] = dominance[r] != 0;

  // Per-trace squared errors: rows "1*", n..., then the mean predictor.
  const Index rows = nv + 1;
  const auto traces = static_cast<Index>(validation.size());
  std::vector<Matrix> mse(validation.size(), Matrix::Zero(rows + 1, horizons));
  std::vector<double> truth_power(validation.size(), 0.0);
  Index windows = 0;
  parallel_for(traces, jobs, [&](Index t) {
    const auto& run = validation[static_cast<std::size_t>(t)];
    const Evaluation e = evaluate(run.series.values, run.truth, out.models, max_n, horizons);
    Matrix& cell = mse[static_cast<std::size_t>(t)];
    cell.row(0) = column_mse(e.truth.colwise() - e.last).transpose();
    for (Index r = 0; r < nv; ++r) {
      cell.row(r + 1) = column_mse(e.predictions[static_cast<std::size_t>(r)] - e.truth).transpose();
    }
    cell.row(rows) = column_mse(e.truth.rowwise() - label_mean.transpose()).transpose();
    truth_power[static_cast<std::size_t>(t)] = e.truth.squaredNorm() / double(e.truth.size());
    if (t == 0) windows = e.truth.rows();
  });
  out.traces = traces;
  out.windows = windows;

  auto mean_of = [&](const std::vector<Index>& idx) {
    Matrix acc = Matrix::Zero(rows + 1, horizons);
    for (Index i : idx) acc += mse[static_cast<std::size_t>(i)];
    return Matrix(acc / double(idx.size()));
  };
  std::vector<Index> all(static_cast<std::size_t>(traces));
  for (Index i = 0; i < traces; ++i) all[static_cast<std::size_t>(i)] = i;
  const Matrix mean_mse = mean_of(all);
  std::optional<double> reference;
  if (s.normalization == Normalization::NoiseRms || s.normalization == Normalization::UncorrectedRms) {
    double power = 0.0;
    for (double p : truth_power) power += p;
    reference = std::sqrt(power / double(traces));
  }
  out.map = rms_map_from_mse(row_labels(s.n_values), mean_mse.topRows(rows), s.normalization, reference);
  out.mean_predictor_rms = mean_mse.row(rows).transpose().cwiseSqrt();

  // Bootstrap over validation traces.
  const Index resamples = s.bootstrap_resamples;
  std::vector<Matrix> reps;
  reps.reserve(static_cast<std::size_t>(resamples));
  std::mt19937_64 rng(derive_seed(config.master_seed, "fig1-bootstrap", 0));
  for (Index b = 0; b < resamples; ++b) reps.push_back(mean_of(resample(rng, traces)).topRows(rows).cwiseSqrt());
  out.standard_error = Matrix::Zero(rows, horizons);
  out.advantage_lower = Matrix::Zero(nv, horizons);
  out.increase = Matrix::Zero(std::max<Index>(nv - 1, 0), horizons);
  out.increase_se = Matrix::Zero(std::max<Index>(nv - 1, 0), horizons);
  std::vector<double> values(static_cast<std::size_t>(resamples));
  auto collect = [&](auto&& f) {
    for (Index b = 0; b < resamples; ++b) values[static_cast<std::size_t>(b)] = f(reps[static_cast<std::size_t>(b)]);
    return values;
  };
  for (Index k = 0; k < horizons; ++k) {
    for (Index r = 0; r < rows; ++r) {
      out.standard_error(r, k) = standard_error(collect([&](const Matrix& x) { return x(r, k); }));
    }
    for (Index r = 0; r < nv; ++r) {
      const double estimate = out.map.rms(0, k) - out.map.rms(r + 1, k);
      out.advantage_lower(r, k) =
          resamples > 0 ? quantile(collect([&](const Matrix& x) { return x(0, k) - x(r + 1, k); }), 0.025) : estimate;
    }
    for (Index r = 1; r < nv; ++r) {
      out.increase(r - 1, k) = out.map.rms(r + 1, k) - out.map.rms(r, k);
      out.increase_se(r - 1, k) = standard_error(collect([&](const Matrix& x) { return x(r + 1, k) - x(r, k); }));
    }
  }

  // Measurement quality over every validation window.
  Vector measured(traces * s.validation_length);
  Vector applied(traces * s.validation_length);
  for (Index t = 0; t < traces; ++t) {
    measured.segment(t * s.validation_length, s.validation_length) = validation[static_cast<std::size_t>(t)].series.values;
    applied.segment(t * s.validation_length, s.validation_length) = validation[static_cast<std::size_t>(t)].truth;
  }
  out.correlation = pearson_r(measured, applied);
  out.ellipse = ellipse_summary(applied, measured);

  // Overlay on the first validation trace, predictions from its first window.
  const auto& run = validation.front();
  Table& o = out.overlay;
  o.columns = {"k", "time_s", "applied_rad", "measured_rad", "traditional_rad"};
  for (Index n : s.n_values) o.columns.push_back("predicted_n" + std::to_string(n) + "_rad");
  const Index base = max_n - 1;
  std::vector<Vector> predicted;
  for (const auto& model : out.models) {
    predicted.push_back(predict(model, Vector(run.series.values.segment(base - model.n + 1, model.n))).values);
  }
  for (Index j = 0; j <= base + horizons; ++j) {
    const Index k = j - base;
    std::vector<Cell> row{static_cast<long long>(k), run.series.times(j), run.truth(j), run.series.values(j)};
    row.emplace_back(k >= 1 ? Cell(run.series.values(base)) : Cell(std::string()));
    for (const auto& p : predicted) row.emplace_back(k >= 1 ? Cell(p(k - 1)) : Cell(std::string()));
    o.add_row(std::move(row));
  }
  return out;
}

Table TdmResult::rms_table() const {
  Table t;
  t.columns = {"k", "uncorrected_rms_rad", "traditional_rms_rad", "predictive_rms_rad",
               "traditional_minus_predictive_lower_rad", "uncorrected_minus_predictive_lower_rad"};
  for (Index k = 0; k < k_stab; ++k) {
    t.rows.push_back({static_cast<long long>(k + 1), rms[0](k), rms[1](k), rms[2](k),
                      predictive_vs_traditional_lower(k), predictive_vs_free_lower(k)});
  }
  return t;
}

TdmResult run_tdm_experiment(const ExperimentConfig& config) {
  const auto& s = config.tdm;
  const MeasurementModel meas = config.measurement_at(s.sampling_ratio);
  const Index m = config.measurement.samples_per_measurement;
  const auto train_seeds = derive_seeds(config.master_seed, "tdm-train", s.training_traces);
  const std::uint64_t seed = derive_seed(config.master_seed, "tdm", 0);
  require_disjoint(train_seeds, {seed});

  TdmResult out;
  out.k_stab = s.k_stab;
  out.cycles = s.cycles;
  out.model = train_free_running(config.spectrum, meas, m, s.n_probe, s.k_stab, config.ridge, train_seeds,
                                 s.training_length);
  for (int p = 0; p < 3; ++p) {
    TdmConfig c;
    c.n_probe = s.n_probe;
    c.k_stab = s.k_stab;
    c.cycles = s.cycles;
    c.measurement = meas;
    c.spectrum = config.spectrum;
    c.seed = seed;
    c.samples_per_measurement = m;
    c.diagnostic_step = s.diagnostic_step;
    c.policy = kPolicies[p];
    out.records[p] = run_tdm(c, out.model);
    out.residuals[p] = residual_matrix(out.records[p], s.cycles, s.k_stab);
    out.rms[p] = column_mse(out.residuals[p]).cwiseSqrt();
    out.bookkeeping = std::max(out.bookkeeping, bookkeeping_deviation(out.records[p]));
  }

  const Index resamples = s.bootstrap_resamples;
  std::vector<Vector> trad_gap, free_gap;
  std::mt19937_64 rng(derive_seed(config.master_seed, "tdm-bootstrap", 0));
  for (Index b = 0; b < resamples; ++b) {
    const auto idx = resample(rng, s.cycles);
    std::array<Vector, 3> rms;
    for (int p = 0; p < 3; ++p) {
      Vector acc = Vector::Zero(s.k_stab);
      for (Index i : idx) acc += out.residuals[p].row(i).transpose().cwiseAbs2();
      rms[p] = (acc / double(s.cycles)).cwiseSqrt();
    }
    trad_gap.push_back(rms[1] - rms[2]);
    free_gap.push_back(rms[0] - rms[2]);
  }
  out.predictive_vs_traditional_lower = out.rms[1] - out.rms[2];
  out.predictive_vs_free_lower = out.rms[0] - out.rms[2];
  if (resamples > 0) {
    std::vector<double> values(static_cast<std::size_t>(resamples));
    for (Index k = 0; k < s.k_stab; ++k) {
      for (Index b = 0; b < resamples; ++b) values[static_cast<std::size_t>(b)] = trad_gap[static_cast<std::size_t>(b)](k);
      out.predictive_vs_traditional_lower(k) = quantile(values, 0.025);
      for (Index b = 0; b < resamples; ++b) values[static_cast<std::size_t>(b)] = free_gap[static_cast<std::size_t>(b)](k);
      out.predictive_vs_free_lower(k) = quantile(values, 0.025);
    }
  }

  out.integrated_reduction = 1.0 - out.residuals[2].cwiseAbs().sum() / out.residuals[0].cwiseAbs().sum();
  out.cycle_reduction.resize(s.cycles);
  for (Index c = 0; c < s.cycles; ++c) {
    out.cycle_reduction(c) = 1.0 - out.residuals[2].row(c).cwiseAbs().sum() / out.residuals[0].row(c).cwiseAbs().sum();
  }
  return out;
}

LockResult run_lock_experiment(const ExperimentConfig& config, unsigned jobs) {
  const auto& s = config.lock;
  const MeasurementModel meas = config.measurement_at(s.sampling_ratio);
  const Index m = config.measurement.samples_per_measurement;
  const auto train_seeds = derive_seeds(config.master_seed, "lock-train", s.training_traces);
  const auto seeds = derive_seeds(config.master_seed, "lock", s.realisations);
  require_disjoint(train_seeds, seeds);

  LockResult out;
  out.model = train_free_running(config.spectrum, meas, m, s.n, s.horizon, config.ridge, train_seeds,
                                 s.training_length);
  out.summaries.resize(seeds.size());
  std::vector<std::array<Vector, 3>> residuals(seeds.size());
  std::vector<double> bookkeeping(seeds.size(), 0.0);
  parallel_for(s.realisations, jobs, [&](Index r) {
    const auto slot = static_cast<std::size_t>(r);
    for (int p = 0; p < 3; ++p) {
      LockConfig c;
      c.n = s.n;
      c.cycles = s.cycles;
      c.policy = kPolicies[p];
      c.horizon = s.horizon;
      c.measurement = meas;
      c.spectrum = config.spectrum;
      c.seed = seeds[slot];
      c.samples_per_measurement = m;
      auto record = run_lock(c, out.model);
      out.summaries[slot][p] = summarize_lock(record, s.cycles);
      residuals[slot][p] = lock_residuals(record);
      bookkeeping[slot] = std::max(bookkeeping[slot], bookkeeping_deviation(record));
      if (r == 0) out.first_records[p] = std::move(record);
    }
  });
  out.bookkeeping = *std::max_element(bookkeeping.begin(), bookkeeping.end());

  double sum[3] = {0, 0, 0};
  out.predictive_below_free_every = true;
  for (const auto& row : out.summaries) {
    for (int p = 0; p < 3; ++p) sum[p] += row[p].sample_variance;
    out.predictive_below_free_every = out.predictive_below_free_every && row[2].sample_variance < row[0].sample_variance;
  }
  out.traditional_over_predictive = sum[1] / sum[2];

  for (int p = 1; p < 3; ++p) {
    std::vector<double> applied, correction;
    for (const auto& st : out.first_records[p].steps) {
      if (st.tag != PeriodTag::LockCycle) continue;
      applied.push_back(st.applied_phase);
      correction.push_back(st.correction);
    }
    if (applied.size() >= 3) {
      const auto count = static_cast<Index>(applied.size());
      out.ellipses[p] = ellipse_summary(Eigen::Map<const Vector>(applied.data(), count),
                                        Eigen::Map<const Vector>(correction.data(), count));
    }
  }

  Table& t = out.variance_curve;
  t.columns = {"cycles", "free_running", "traditional", "predictive"};
  t.comments.push_back("ensemble mean sample variance normalized to free-running at N = " + std::to_string(s.cycles));
  const double reference = sum[0] / double(seeds.size());
  std::vector<Index> grid;
  for (Index decade = 1; decade <= s.cycles; decade *= 10) {
    for (Index f : {1, 2, 5}) {
      if (f * decade >= 2 && f * decade <= s.cycles) grid.push_back(f * decade);
    }
  }
  if (grid.empty() || grid.back() != s.cycles) grid.push_back(s.cycles);
  for (Index N : grid) {
    std::vector<Cell> row{static_cast<long long>(N)};
    for (int p = 0; p < 3; ++p) {
      double acc = 0.0;
      Index used = 0;
      for (const auto& res : residuals) {
        if (res[p].size() >= N) {
          acc += sample_variance(res[p], N);
          ++used;
        }
      }
      row.emplace_back(used > 0 ? Cell(acc / double(used) / reference) : Cell(std::string()));
    }
    t.add_row(std::move(row));
  }
  return out;
}

SweepSettings sweep_settings(const ExperimentConfig& config, unsigned jobs) {
  SweepSettings s;
  s.base.n = config.lock.n;
  s.base.cycles = config.lock.cycles;
  s.base.horizon = config.lock.horizon;
  s.base.measurement = config.measurement_at(config.sweep.sampling_ratios.front());
  s.base.spectrum = config.spectrum;
  s.base.samples_per_measurement = config.measurement.samples_per_measurement;
  s.ratios = config.sweep.sampling_ratios;
  s.seeds = derive_seeds(config.master_seed, "sweep", config.sweep.seeds);
  s.training_seeds = derive_seeds(config.master_seed, "sweep-train", config.sweep.training_traces);
  s.training_length = config.sweep.training_length;
  s.ridge = config.ridge;
  s.jobs = jobs;
  return s;
}

Table IngestResult::variance_table() const {
  Table t;
  t.columns = {"n", "corrected_variance_rad2", "normalized_to_uncorrected"};
  t.comments.push_back("uncorrected_variance_rad2: " + format_number(uncorrected_variance));
  t.comments.push_back("traditional_variance_rad2: " + format_number(traditional_variance));
  t.comments.push_back("traditional_normalized: " + format_number(traditional_variance / uncorrected_variance));
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    const double v = corrected_variance(static_cast<Index>(i));
    t.rows.push_back({static_cast<long long>(n_values[i]), v, v / uncorrected_variance});
  }
  return t;
}

Table IngestResult::periodogram_table() const {
  Table t;
  t.columns = {"frequency_hz", "angular_frequency_rad_per_s", "density_rad2_s"};
  t.comments.push_back("rate_hz: " + format_number(rate_hz));
  for (std::size_t j = 0; j < periodogram.frequencies.size(); ++j) {
    const double w = periodogram.frequencies[j];
    t.rows.push_back({w / kTwoPi, w, periodogram.densities[j]});
  }
  return t;
}

IngestResult analyze_series(const MeasurementSeries& series, double rate_hz, const IngestSettings& settings,
                            double ridge) {
  if (!(rate_hz > 0.0)) throw ValidationError("sampling rate must be > 0 Hz");
  const Index length = series.size();
  const double exact = settings.train_fraction * double(length);
  const double nearest = std::round(exact);
  const auto split = static_cast<Index>(std::abs(exact - nearest) < 1e-9 * std::max(1.0, exact) ? nearest : std::floor(exact));
  const Index max_n = settings.n_values.back();
  const Index horizons = settings.horizons;
  if (split < max_n + horizons || length - split < max_n + horizons) {
    throw ValidationError("series of length " + std::to_string(length) + " is too short for max n = " +
                          std::to_string(max_n) + " and K = " + std::to_string(horizons));
  }
  IngestResult out;
  out.split = split;
  out.n_values = settings.n_values;
  out.rate_hz = rate_hz;
  const Vector train_part = series.values.head(split);
  const Vector validation = series.values.tail(length - split);
  for (Index n : settings.n_values) {
    const auto set = build_training_matrix<double>(
        std::span<const double>(train_part.data(), static_cast<std::size_t>(split)), n, horizons);
    auto model = train(set, ridge);
    model.meta.spectrum = "external";
    out.models.push_back(std::move(model));
  }
  const Evaluation e = evaluate(validation, validation, out.models, max_n, horizons);
  std::vector<Matrix> predictions{Matrix(Matrix::Zero(e.truth.rows(), horizons).colwise() + e.last)};
  for (const auto& p : e.predictions) predictions.push_back(p);
  out.uncorrected_rms = std::sqrt(e.truth.squaredNorm() / double(e.truth.size()));
  out.map = rms_error_map(row_labels(settings.n_values), predictions, e.truth, settings.normalization,
                          out.uncorrected_rms);

  double best = std::numeric_limits<double>::infinity();
  for (Index r = 1; r < out.map.rms.rows(); ++r) {
    for (Index k = 0; k < horizons; ++k) {
      if (out.map.rms(r, k) < best) {
        best = out.map.rms(r, k);
        out.best_row = out.map.row_labels[static_cast<std::size_t>(r)];
        out.best_horizon = k + 1;
      }
    }
  }
  out.best_improvement = 1.0 - best / out.uncorrected_rms;

  const Vector target = e.truth.col(0);
  out.uncorrected_variance = sample_variance(target);
  out.traditional_variance = sample_variance(Vector(target - e.last));
  out.corrected_variance.resize(static_cast<Index>(e.predictions.size()));
  for (std::size_t i = 0; i < e.predictions.size(); ++i) {
    out.corrected_variance(static_cast<Index>(i)) = sample_variance(Vector(target - e.predictions[i].col(0)));
  }

  NoiseTrace trace;
  trace.dt = 1.0 / rate_hz;
  trace.samples = series.values;
  out.periodogram = estimate_periodogram(trace, std::min(settings.smoothing_window, length % 2 ? length : length - 1));
  return out;
}

MeasurementSeries make_intrinsic_surrogate(const SurrogateSettings& settings, std::uint64_t seed) {
  const MeasurementModel model(1.0 / settings.rate_hz, 0.0, GaussianReadout{settings.readout_sigma_rad});
  return simulate_free_running(settings.spectrum, model, settings.samples_per_measurement, settings.length, seed).series;
}

}  // namespace qpredict
