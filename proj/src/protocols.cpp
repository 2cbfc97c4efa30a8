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

#include "qpredict/protocols.hpp"

#include "qpredict/error.hpp"
#include "qpredict/metrics.hpp"
#include "qpredict/noise.hpp"
#include "qpredict/parallel.hpp"
#include "qpredict/seed.hpp"

#include <cmath>
#include <random>
#include <string>

namespace qpredict {
namespace {

// Actuator holding the correction in force; set() applies the increment
// needed to reach a new target and returns it.
class Actuator {
 public:
  double set(double target) {
    const double increment = target - in_force_;
    in_force_ += increment;
    return increment;
  }
  double in_force() const { return in_force_; }

 private:
  double in_force_ = 0.0;
};

NoiseTrace trace_for(const PowerSpectrum& spectrum, const MeasurementModel& model,
                     Index samples_per_measurement, Index windows, std::uint64_t seed) {
  if (samples_per_measurement < 1) throw ValidationError("samples per measurement must be >= 1");
  const double dt = model.duration() / static_cast<double>(samples_per_measurement);
  return synthesize_noise(spectrum, dt, fft_friendly_length(samples_needed(model, windows, dt)), seed);
}

ProtocolStep make_step(Index cycle, Index step, PeriodTag tag, double time, double applied,
                       double increment, double in_force) {
  ProtocolStep s;
  s.cycle = cycle;
  s.step = step;
  s.tag = tag;
  s.time = time;
  s.applied_phase = applied;
  s.correction_step = increment;
  s.correction = in_force;
  s.residual = applied - in_force;
  return s;
}

}  // namespace

const char* to_string(Policy policy) {
  switch (policy) {
    case Policy::FreeRunning: return "free-running";
    case Policy::Traditional: return "traditional";
    case Policy::Predictive: return "predictive";
  }
  return "free-running";
}

const char* to_string(PeriodTag tag) {
  switch (tag) {
    case PeriodTag::Probe: return "probe";
    case PeriodTag::Stabilise: return "stabilise";
    case PeriodTag::Diagnostic: return "diagnostic";
    case PeriodTag::LockCycle: return "lock-cycle";
  }
  return "probe";
}

Policy policy_from_string(const std::string& name) {
  if (name == "free-running") return Policy::FreeRunning;
  if (name == "traditional") return Policy::Traditional;
  if (name == "predictive") return Policy::Predictive;
  throw ValidationError("unknown policy '" + name + "'");
}

ProtocolRecord run_tdm(const TdmConfig& config, const PredictorModel<double>& model) {
  if (config.n_probe < 1 || config.k_stab < 1 || config.cycles < 1) {
    throw ValidationError("TDM needs n_probe, k_stab and cycles >= 1");
  }
  const Index diagnostic = config.diagnostic_step == 0 ? config.k_stab : config.diagnostic_step;
  if (diagnostic < 1 || diagnostic > config.k_stab) {
    throw ValidationError("diagnostic step must lie in 1..k_stab");
  }
  if (config.policy == Policy::Predictive) {
    if (model.n != config.n_probe) {
      throw ValidationError("predictor n = " + std::to_string(model.n) + " does not match n_probe = " +
                            std::to_string(config.n_probe));
    }
    if (model.horizons < config.k_stab) {
      throw ValidationError("predictor covers " + std::to_string(model.horizons) +
                            " horizons, k_stab needs " + std::to_string(config.k_stab));
    }
  }

  const Index per_cycle = config.n_probe + config.k_stab;
  const Index windows = config.cycles * per_cycle;
  const MeasurementModel& meas = config.measurement;
  const NoiseTrace trace = trace_for(config.spectrum, meas, config.samples_per_measurement, windows, config.seed);
  const Vector applied = window_averages(trace, meas, windows);
  std::mt19937_64 rng(derive_seed(config.seed, "readout", 0));

  ProtocolRecord record;
  record.policy = config.policy;
  record.steps.reserve(static_cast<std::size_t>(windows));
  Actuator actuator;
  Vector features(config.n_probe);

  auto read = [&](double phase, Index cycle, Index step) {
    try {
      return read_out(phase, meas.readout(), rng);
    } catch (const PhaseWrapError& e) {
      throw PhaseWrapError("TDM cycle " + std::to_string(cycle) + ", step " + std::to_string(step) +
                               ": " + e.what(),
                           e.phase(), -1, cycle, step);
    }
  };

  for (Index cycle = 0; cycle < config.cycles; ++cycle) {
    const Index first = cycle * per_cycle;
    for (Index i = 0; i < config.n_probe; ++i) {
      const Index w = first + i;
      const Index step = i + 1 - config.n_probe;
      const double increment = actuator.set(0.0);
      ProtocolStep s = make_step(cycle, step, PeriodTag::Probe, static_cast<double>(w) * meas.period(),
                                 applied(w), increment, actuator.in_force());
      const double measured = read(s.residual, cycle, step);
      s.measured = measured;
      features(i) = measured + actuator.in_force();
      record.steps.push_back(s);
    }

    Vector targets = Vector::Zero(config.k_stab);
    if (config.policy == Policy::Predictive) {
      targets = predict(model, features).values.head(config.k_stab);
    } else if (config.policy == Policy::Traditional) {
      targets.setConstant(features(config.n_probe - 1));
    }

    for (Index k = 1; k <= config.k_stab; ++k) {
      const Index w = first + config.n_probe + k - 1;
      const double increment = actuator.set(targets(k - 1));
      const PeriodTag tag = k == diagnostic ? PeriodTag::Diagnostic : PeriodTag::Stabilise;
      ProtocolStep s = make_step(cycle, k, tag, static_cast<double>(w) * meas.period(), applied(w),
                                 increment, actuator.in_force());
      if (tag == PeriodTag::Diagnostic) s.measured = read(s.residual, cycle, k);
      record.steps.push_back(s);
    }
  }
  return record;
}

ProtocolRecord run_lock(const LockConfig& config, const PredictorModel<double>& model) {
  if (config.n < 1) throw ValidationError("lock feature window n must be >= 1");
  if (config.cycles < 2) throw ValidationError("lock needs at least N = 2 cycles");
  if (config.horizon < 1) throw ValidationError("lock horizon must be >= 1");
  if (config.policy == Policy::Predictive) {
    if (model.n != config.n) {
      throw ValidationError("predictor n = " + std::to_string(model.n) + " does not match lock n = " +
                            std::to_string(config.n));
    }
    if (model.horizons < config.horizon) {
      throw ValidationError("predictor does not cover the lock horizon");
    }
  }

  const Index acquisition = config.n + config.horizon - 1;
  const Index windows = acquisition + config.cycles;
  const MeasurementModel& meas = config.measurement;
  const NoiseTrace trace = trace_for(config.spectrum, meas, config.samples_per_measurement, windows, config.seed);
  const Vector applied = window_averages(trace, meas, windows);
  std::mt19937_64 rng(derive_seed(config.seed, "readout", 0));

  ProtocolRecord record;
  record.policy = config.policy;
  record.steps.reserve(static_cast<std::size_t>(windows));
  Actuator actuator;
  Vector history(windows);
  const Index h = config.horizon;
  double next_target = 0.0;

  for (Index i = 0; i < windows; ++i) {
    const double increment = actuator.set(next_target);
    const PeriodTag tag = i < acquisition ? PeriodTag::Probe : PeriodTag::LockCycle;
    ProtocolStep s = make_step(i - acquisition, i - acquisition, tag,
                               static_cast<double>(i) * meas.period(), applied(i), increment,
                               actuator.in_force());
    if (!(std::abs(s.residual) < kPhaseWrapBound)) {
      record.steps.push_back(s);
      record.outcome = ProtocolRecord::Outcome::Diverged;
      record.diverged_cycle = i - acquisition;
      break;
    }
    const double measured = read_out(s.residual, meas.readout(), rng);
    s.measured = measured;
    history(i) = measured + actuator.in_force();
    record.steps.push_back(s);

    const Index next = i + 1;
    if (next < acquisition) {
      next_target = 0.0;
      continue;
    }
    switch (config.policy) {
      case Policy::FreeRunning:
        next_target = 0.0;
        break;
      case Policy::Traditional:
        next_target = history(i);
        break;
      case Policy::Predictive: {
        const Index end = next - h;  // newest feature
        const auto window = history.segment(end - config.n + 1, config.n);
        next_target = model.intercepts(h - 1) + model.weights.col(h - 1).dot(window);
        break;
      }
    }
  }
  return record;
}

double bookkeeping_deviation(const ProtocolRecord& record) {
  double cumulative = 0.0;
  double worst = 0.0;
  for (const auto& s : record.steps) {
    cumulative += s.correction_step;
    worst = std::max(worst, std::abs(s.residual - (s.applied_phase - cumulative)));
  }
  return worst;
}

std::vector<const ProtocolStep*> steps_tagged(const ProtocolRecord& record, PeriodTag tag) {
  std::vector<const ProtocolStep*> out;
  for (const auto& s : record.steps) {
    if (s.tag == tag) out.push_back(&s);
  }
  return out;
}

LockSummary summarize_lock(const ProtocolRecord& record, Index cycles) {
  const auto locked = steps_tagged(record, PeriodTag::LockCycle);
  std::vector<const ProtocolStep*> measured;
  for (const auto* s : locked) {
    if (s->measured) measured.push_back(s);
  }
  const Index count = std::min<Index>(cycles, static_cast<Index>(measured.size()));
  if (count < 2) throw ValidationError("lock record holds fewer than 2 measured cycles");
  Vector residual(count), measured_residual(count), correction(count), applied(count);
  for (Index i = 0; i < count; ++i) {
    const auto* s = measured[static_cast<std::size_t>(i)];
    residual(i) = s->residual;
    measured_residual(i) = *s->measured;
    correction(i) = s->correction;
    applied(i) = s->applied_phase;
  }
  LockSummary out;
  out.cycles = count;
  out.sample_variance = sample_variance(residual);
  out.measured_variance = sample_variance(measured_residual);
  try {
    out.correlation = pearson_r(correction, applied);
  } catch (const UndefinedCorrelationError&) {
    out.correlation.reset();
  }
  return out;
}

double dead_time_for_ratio(double ratio, double cutoff, double measurement_duration) {
  if (!(ratio > 1.0)) throw ValidationError("sampling ratio w_s/w_c must exceed 1");
  if (!(cutoff > 0.0)) throw ValidationError("cutoff must be > 0");
  const double period = kTwoPi / (ratio * cutoff);
  const double dead = period - measurement_duration;
  if (dead < -1e-12 * period) {
    throw ValidationError("w_s = " + std::to_string(ratio) +
                          " w_c needs a cycle shorter than the measurement time");
  }
  return std::max(dead, 0.0);
}

PredictorModel<double> train_free_running(const PowerSpectrum& spectrum,
                                          const MeasurementModel& model,
                                          Index samples_per_measurement, Index n, Index horizons,
                                          double ridge, std::span<const std::uint64_t> seeds,
                                          Index length) {
  if (seeds.empty()) throw ValidationError("training needs at least one seed");
  std::vector<TrainingSet<double>> parts;
  parts.reserve(seeds.size());
  for (const auto seed : seeds) {
    const SimulatedRun run = simulate_free_running(spectrum, model, samples_per_measurement, length, seed);
    parts.push_back(build_training_matrix<double>(
        std::span<const double>(run.series.values.data(), static_cast<std::size_t>(run.series.size())),
        n, horizons));
  }
  const auto set = stack<double>(parts);
  auto trained = train(set, ridge);
  trained.meta.spectrum = spectrum.descriptor();
  trained.meta.seeds.assign(seeds.begin(), seeds.end());
  return trained;
}

const SweepPoint& SweepTable::at(double ratio, Policy policy) const {
  for (const auto& p : points) {
    if (p.policy == policy && std::abs(p.ratio - ratio) <= 1e-12 * std::abs(ratio)) return p;
  }
  throw ValidationError("sweep table has no point at ratio " + std::to_string(ratio));
}

SweepTable sweep_sampling(const SweepSettings& settings) {
  if (settings.ratios.empty()) throw ValidationError("sweep needs at least one sampling ratio");
  if (settings.seeds.empty()) throw ValidationError("sweep needs at least one seed");
  for (auto s : settings.seeds) {
    for (auto t : settings.training_seeds) {
      if (s == t) throw ValidationError("evaluation and training seeds must be disjoint");
    }
  }
  const double cutoff = settings.base.spectrum.characteristic_cutoff();
  const double duration = settings.base.measurement.duration();
  std::vector<MeasurementModel> models;
  for (double ratio : settings.ratios) {
    models.emplace_back(duration, dead_time_for_ratio(ratio, cutoff, duration),
                        settings.base.measurement.readout());
  }

  const auto ratio_count = static_cast<Index>(settings.ratios.size());
  std::vector<PredictorModel<double>> predictors(settings.ratios.size());
  parallel_for(ratio_count, settings.jobs, [&](Index r) {
    predictors[static_cast<std::size_t>(r)] = train_free_running(
        settings.base.spectrum, models[static_cast<std::size_t>(r)], settings.base.samples_per_measurement,
        settings.base.n, settings.base.horizon, settings.ridge, settings.training_seeds,
        settings.training_length);
  });

  constexpr Policy kPolicies[] = {Policy::FreeRunning, Policy::Traditional, Policy::Predictive};
  const auto seed_count = static_cast<Index>(settings.seeds.size());
  // summaries[(r * seeds + s) * 3 + p]
  std::vector<LockSummary> summaries(static_cast<std::size_t>(ratio_count * seed_count * 3));
  std::vector<char> diverged(summaries.size(), 0);
  parallel_for(ratio_count * seed_count, settings.jobs, [&](Index task) {
    const Index r = task / seed_count;
    const Index s = task % seed_count;
    for (int p = 0; p < 3; ++p) {
      LockConfig config = settings.base;
      config.measurement = models[static_cast<std::size_t>(r)];
      config.seed = settings.seeds[static_cast<std::size_t>(s)];
      config.policy = kPolicies[p];
      const auto record = run_lock(config, predictors[static_cast<std::size_t>(r)]);
      const auto slot = static_cast<std::size_t>(task * 3 + p);
      diverged[slot] = record.outcome == ProtocolRecord::Outcome::Diverged;
      summaries[slot] = summarize_lock(record, config.cycles);
    }
  });

  SweepTable table;
  for (Index r = 0; r < ratio_count; ++r) {
    for (int p = 0; p < 3; ++p) {
      SweepPoint point;
      point.ratio = settings.ratios[static_cast<std::size_t>(r)];
      point.policy = kPolicies[p];
      double policy_sum = 0.0;
      double free_sum = 0.0;
      for (Index s = 0; s < seed_count; ++s) {
        const auto base = static_cast<std::size_t>((r * seed_count + s) * 3);
        const auto& mine = summaries[base + static_cast<std::size_t>(p)];
        const auto& free = summaries[base];
        point.normalized_variance.push_back(mine.sample_variance / free.sample_variance);
        policy_sum += mine.sample_variance;
        free_sum += free.sample_variance;
        if (mine.correlation) point.correlation.push_back(*mine.correlation);
        point.diverged += diverged[base + static_cast<std::size_t>(p)];
      }
      const Eigen::Map<const Vector> v(point.normalized_variance.data(), seed_count);
      point.mean = v.mean();
      point.sd_mean = seed_count > 1 ? std::sqrt(sample_variance(v) / double(seed_count)) : 0.0;
      point.min = v.minCoeff();
      point.max = v.maxCoeff();
      point.ensemble_normalized = policy_sum / free_sum;
      if (!point.correlation.empty()) {
        point.mean_correlation =
            Eigen::Map<const Vector>(point.correlation.data(), static_cast<Index>(point.correlation.size())).mean();
      }
      table.points.push_back(std::move(point));
    }
  }
  return table;
}

}  // namespace qpredict
