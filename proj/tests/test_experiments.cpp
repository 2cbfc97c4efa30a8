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

#include "qpredict/config.hpp"
#include "qpredict/experiments.hpp"

#include <cmath>
#include <set>

using namespace qpredict;

namespace {

ExperimentConfig small_config(const char* readout) {
  Json doc = Json::parse(R"({
    "seed": {"master": 3},
    "fig1": {"n_values": [1, 5], "horizons": 10, "training_traces": 2, "training_length": 300,
             "validation_traces": 3, "validation_length": 200, "bootstrap_resamples": 20},
    "ingest": {"n_values": [1, 2], "horizons": 3, "smoothing_window": 5, "surrogate": {"length": 400}}
  })");
  doc["measurement"] = {{"readout", Json::parse(readout)}};
  return parse_config(doc);
}

}  // namespace

TEST_CASE("noiseless readout gives a perfect measurement correlation") {
  const auto r = run_fig1(small_config(R"({"kind": "gaussian", "sigma_rad": 0.0})"));
  CHECK(r.correlation == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.map.horizons() == 10);
  CHECK(r.map.row_labels.front() == "1*");
}

TEST_CASE("calibrated readout reaches the requested correlation") {
  const auto r = run_fig1(small_config(R"({"kind": "gaussian", "target_correlation": 0.9})"));
  CHECK(r.correlation == doctest::Approx(0.9).epsilon(0.03));
}

TEST_CASE("offline prediction does not depend on the job count") {
  const auto c = small_config(R"({"kind": "gaussian", "target_correlation": 0.97})");
  const auto one = run_fig1(c, 1);
  const auto two = run_fig1(c, 2);
  CHECK(one.map.rms == two.map.rms);
  CHECK(one.advantage_lower == two.advantage_lower);
}

TEST_CASE("ingest splits chronologically at floor(0.7 L)") {
  const auto c = small_config(R"({"kind": "gaussian", "sigma_rad": 0.0})");
  for (Index length : {400, 401, 409}) {
    auto settings = c.ingest.surrogate;
    settings.length = length;
    const auto series = make_intrinsic_surrogate(settings, 9);
    REQUIRE(series.size() == length);
    const auto r = analyze_series(series, settings.rate_hz, c.ingest, c.ridge);
    CHECK(r.split == static_cast<Index>(std::floor(0.7 * double(length))));
  }
}

TEST_CASE("surrogate series are reproducible") {
  const SurrogateSettings s;
  const auto a = make_intrinsic_surrogate(s, 4);
  const auto b = make_intrinsic_surrogate(s, 4);
  CHECK(a.values == b.values);
  CHECK(a.times(1) == doctest::Approx(1.0 / s.rate_hz));
  CHECK(make_intrinsic_surrogate(s, 5).values != a.values);
}

TEST_CASE("derived seeds are pure and distinct") {
  const auto a = derive_seeds(1, "fig1-train", 50);
  CHECK(a == derive_seeds(1, "fig1-train", 50));
  std::set<std::uint64_t> all(a.begin(), a.end());
  for (auto s : derive_seeds(1, "fig1-validate", 50)) all.insert(s);
  CHECK(all.size() == 100u);
}
