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

#include <doctest.h>

#include "qpredict/error.hpp"
#include "qpredict/protocols.hpp"

#include <cmath>

using namespace qpredict;

namespace {

constexpr double kMeasurementTime = kTwoPi / 40.0;

const PowerSpectrum& flat() {
  static const PowerSpectrum s(FlatTop{0.01, 1.0});
  return s;
}

MeasurementModel gaussian_model(double sigma, double dead_time = 0.0) {
  return MeasurementModel(kMeasurementTime, dead_time, GaussianReadout{sigma});
}

TdmConfig small_tdm(Policy policy, std::uint64_t seed = 3) {
  TdmConfig c;
  c.n_probe = 12;
  c.k_stab = 6;
  c.cycles = 8;
  c.measurement = gaussian_model(0.02);
  c.spectrum = flat();
  c.seed = seed;
  c.policy = policy;
  return c;
}

LockConfig small_lock(Policy policy, std::uint64_t seed = 5) {
  LockConfig c;
  c.n = 8;
  c.cycles = 300;
  c.measurement = gaussian_model(0.02);
  c.spectrum = flat();
  c.seed = seed;
  c.policy = policy;
  return c;
}

PredictorModel<double> trained(Index n, Index horizons) {
  const std::uint64_t seeds[] = {900, 901};
  return train_free_running(flat(), gaussian_model(0.02), 4, n, horizons, 1e-6, seeds, 1500);
}

void check_same_steps(const ProtocolRecord& a, const ProtocolRecord& b) {
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    CHECK(a.steps[i].residual == b.steps[i].residual);
    CHECK(a.steps[i].correction == b.steps[i].correction);
    CHECK(a.steps[i].measured == b.steps[i].measured);
  }
}

}  // namespace

TEST_CASE("policy and tag names") {
  for (auto p : {Policy::FreeRunning, Policy::Traditional, Policy::Predictive}) {
    CHECK(policy_from_string(to_string(p)) == p);
  }
  CHECK_THROWS_AS(policy_from_string("adaptive"), ValidationError);
  CHECK(std::string(to_string(PeriodTag::Stabilise)) == "stabilise");
}

TEST_CASE("correction bookkeeping holds at every step") {
  const auto model = trained(12, 6);
  for (auto policy : {Policy::FreeRunning, Policy::Traditional, Policy::Predictive}) {
    CHECK(bookkeeping_deviation(run_tdm(small_tdm(policy), model)) <= 1e-12);
  }
  const auto lock_model = trained(8, 1);
  for (auto policy : {Policy::FreeRunning, Policy::Traditional, Policy::Predictive}) {
    CHECK(bookkeeping_deviation(run_lock(small_lock(policy), lock_model)) <= 1e-12);
  }
}

TEST_CASE("TDM takes no measurements while stabilising except the diagnostic") {
  const auto record = run_tdm(small_tdm(Policy::Predictive), trained(12, 6));
  CHECK(record.steps.size() == 8u * 18u);
  for (const auto& s : record.steps) {
    if (s.tag == PeriodTag::Stabilise) CHECK_FALSE(s.measured.has_value());
    if (s.tag == PeriodTag::Probe || s.tag == PeriodTag::Diagnostic) CHECK(s.measured.has_value());
    if (s.tag == PeriodTag::Probe) CHECK(s.correction == 0.0);
  }
  const auto diagnostics = steps_tagged(record, PeriodTag::Diagnostic);
  REQUIRE(diagnostics.size() == 8u);
  for (const auto* d : diagnostics) CHECK(d->step == 6);
  CHECK(steps_tagged(record, PeriodTag::Probe).front()->step == -11);

  auto early = small_tdm(Policy::Predictive);
  early.diagnostic_step = 2;
  for (const auto* d : steps_tagged(run_tdm(early, trained(12, 6)), PeriodTag::Diagnostic)) CHECK(d->step == 2);
}

TEST_CASE("zero noise with a noiseless readout leaves zero residuals") {
  auto tdm = small_tdm(Policy::Predictive);
  tdm.spectrum = PowerSpectrum(FlatTop{0.0, 1.0});
  tdm.measurement = gaussian_model(0.0);
  for (const auto& s : run_tdm(tdm, traditional_model<double>(12, 6)).steps) CHECK(s.residual == 0.0);
  auto lock = small_lock(Policy::Traditional);
  lock.spectrum = tdm.spectrum;
  lock.measurement = tdm.measurement;
  for (const auto& s : run_lock(lock, PredictorModel<double>{}).steps) CHECK(s.residual == 0.0);
}

TEST_CASE("the traditional embedding reproduces traditional feedback step for step") {
  check_same_steps(run_tdm(small_tdm(Policy::Predictive), traditional_model<double>(12, 6)),
                   run_tdm(small_tdm(Policy::Traditional), PredictorModel<double>{}));
  check_same_steps(run_lock(small_lock(Policy::Predictive), traditional_model<double>(8, 1)),
                   run_lock(small_lock(Policy::Traditional), PredictorModel<double>{}));
}

TEST_CASE("free running residuals are the raw window averages") {
  const auto record = run_lock(small_lock(Policy::FreeRunning), PredictorModel<double>{});
  const auto model = gaussian_model(0.02);
  const auto run = simulate_free_running(flat(), model, 4, 8 + 300 - 1 + 1, 5);
  REQUIRE(record.steps.size() == static_cast<std::size_t>(run.truth.size()));
  for (std::size_t i = 0; i < record.steps.size(); ++i) {
    CHECK(record.steps[i].correction == 0.0);
    CHECK(record.steps[i].residual == run.truth(static_cast<Index>(i)));
    CHECK(*record.steps[i].measured == run.series.values(static_cast<Index>(i)));
  }
  CHECK_FALSE(summarize_lock(record, 300).correlation.has_value());
}

TEST_CASE("quasi-static noise is removed by traditional feedback after one cycle") {
  // All power in one bin whose period spans the whole trace.
  auto lock = small_lock(Policy::Traditional);
  lock.cycles = 2000;
  lock.measurement = gaussian_model(0.0);
  lock.spectrum = PowerSpectrum(Tabulated{{0.015, 0.025}, {20.0, 20.0}});
  const auto record = run_lock(lock, PredictorModel<double>{});
  auto free = lock;
  free.policy = Policy::FreeRunning;
  const auto open = run_lock(free, PredictorModel<double>{});
  const auto locked = summarize_lock(record, 2000);
  const auto uncorrected = summarize_lock(open, 2000);
  CHECK(uncorrected.sample_variance > 0.01);
  CHECK(locked.sample_variance < 1e-4 * uncorrected.sample_variance);
}

TEST_CASE("protocols are deterministic") {
  const auto model = trained(12, 6);
  check_same_steps(run_tdm(small_tdm(Policy::Predictive), model), run_tdm(small_tdm(Policy::Predictive), model));
  const auto lock_model = trained(8, 1);
  check_same_steps(run_lock(small_lock(Policy::Predictive), lock_model),
                   run_lock(small_lock(Policy::Predictive), lock_model));
}

TEST_CASE("predictive lock outperforms free running on band-limited noise") {
  const auto model = trained(8, 1);
  const auto pred = summarize_lock(run_lock(small_lock(Policy::Predictive), model), 300);
  const auto free = summarize_lock(run_lock(small_lock(Policy::FreeRunning), model), 300);
  CHECK(pred.sample_variance < free.sample_variance);
  REQUIRE(pred.correlation.has_value());
  CHECK(*pred.correlation > 0.5);
}

TEST_CASE("lock horizons beyond one cycle") {
  auto lock = small_lock(Policy::Predictive);
  lock.horizon = 3;
  const auto record = run_lock(lock, traditional_model<double>(8, 3));
  CHECK(steps_tagged(record, PeriodTag::Probe).size() == 10u);
  CHECK(bookkeeping_deviation(record) <= 1e-12);
  const auto locked = steps_tagged(record, PeriodTag::LockCycle);
  // Correction in force at lock cycle c is the measurement taken 3 windows earlier.
  for (std::size_t i = 0; i < locked.size(); ++i) {
    const auto* s = locked[i];
    const auto& source = record.steps[static_cast<std::size_t>(s->step + 10 - 3)];
    CHECK(s->correction == doctest::Approx(*source.measured + source.correction).epsilon(1e-12));
  }
}

TEST_CASE("divergence is recorded, not thrown") {
  auto lock = small_lock(Policy::FreeRunning);
  lock.spectrum = PowerSpectrum(FlatTop{50.0, 1.0});
  ProtocolRecord record;
  CHECK_NOTHROW(record = run_lock(lock, PredictorModel<double>{}));
  CHECK(record.outcome == ProtocolRecord::Outcome::Diverged);
  CHECK(std::abs(record.steps.back().residual) >= kPi / 2);
  CHECK(record.steps.back().cycle == record.diverged_cycle);

  auto tdm = small_tdm(Policy::FreeRunning);
  tdm.spectrum = lock.spectrum;
  try {
    run_tdm(tdm, PredictorModel<double>{});
    FAIL("expected a phase wrap");
  } catch (const PhaseWrapError& e) {
    CHECK(e.cycle() >= 0);
    CHECK(e.step() >= -11);
    CHECK(e.step() <= 6);
  }
}

TEST_CASE("protocol preconditions") {
  auto tdm = small_tdm(Policy::Predictive);
  CHECK_THROWS_AS(run_tdm(tdm, trained(11, 6)), ValidationError);
  CHECK_THROWS_AS(run_tdm(tdm, trained(12, 5)), ValidationError);
  tdm.diagnostic_step = 7;
  CHECK_THROWS_AS(run_tdm(tdm, trained(12, 6)), ValidationError);
  auto zero = small_tdm(Policy::Traditional);
  zero.cycles = 0;
  CHECK_THROWS_AS(run_tdm(zero, PredictorModel<double>{}), ValidationError);

  auto lock = small_lock(Policy::Predictive);
  CHECK_THROWS_AS(run_lock(lock, trained(7, 1)), ValidationError);
  lock.horizon = 2;
  CHECK_THROWS_AS(run_lock(lock, trained(8, 1)), ValidationError);
  lock.horizon = 1;
  lock.cycles = 1;
  CHECK_THROWS_AS(run_lock(lock, trained(8, 1)), ValidationError);
}

TEST_CASE("dead time for a sampling ratio") {
  CHECK(dead_time_for_ratio(40.0, 1.0, kMeasurementTime) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(dead_time_for_ratio(20.0, 1.0, kMeasurementTime) == doctest::Approx(kMeasurementTime));
  const double dead = dead_time_for_ratio(1.8, 1.0, kMeasurementTime);
  CHECK(gaussian_model(0.0, dead).sampling_frequency() == doctest::Approx(1.8));
  CHECK_THROWS_AS(dead_time_for_ratio(50.0, 1.0, kMeasurementTime), ValidationError);
  CHECK_THROWS_AS(dead_time_for_ratio(1.0, 1.0, kMeasurementTime), ValidationError);
}

TEST_CASE("sweep results do not depend on the job count") {
  SweepSettings settings;
  settings.base = small_lock(Policy::Predictive);
  settings.base.cycles = 100;
  settings.ratios = {2.0, 10.0};
  settings.seeds = {1, 2, 3};
  settings.training_seeds = {100, 101};
  settings.training_length = 800;
  settings.jobs = 1;
  const auto one = sweep_sampling(settings);
  settings.jobs = 3;
  const auto three = sweep_sampling(settings);
  REQUIRE(one.points.size() == 6u);
  for (std::size_t i = 0; i < one.points.size(); ++i) {
    CHECK(one.points[i].normalized_variance == three.points[i].normalized_variance);
    CHECK(one.points[i].correlation == three.points[i].correlation);
  }
  for (double v : one.at(2.0, Policy::FreeRunning).normalized_variance) CHECK(v == 1.0);
  CHECK_THROWS_AS(one.at(3.0, Policy::Predictive), ValidationError);

  settings.seeds = {1, 100};
  CHECK_THROWS_AS(sweep_sampling(settings), ValidationError);
  settings.seeds = {1};
  settings.ratios = {0.5};
  CHECK_THROWS_AS(sweep_sampling(settings), ValidationError);
  settings.ratios = {};
  CHECK_THROWS_AS(sweep_sampling(settings), ValidationError);
}
