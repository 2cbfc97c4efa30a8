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

#include "oracles.hpp"
#include "qpredict/error.hpp"
#include "qpredict/measurement.hpp"
#include "qpredict/predictor.hpp"
#include "qpredict/protocols.hpp"

#include <cmath>
#include <random>

using namespace qpredict;

namespace {

std::span<const double> view(const std::vector<double>& v) { return {v.data(), v.size()}; }

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> e(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = e(rng);
  }
  return m;
}

}  // namespace

TEST_CASE("training windows of [1,2,3,4,5] with n = 2, K = 1") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const auto set = build_training_matrix<double>(view(x), 2, 1);
  REQUIRE(set.rows() == 3);
  Matrix f(3, 2);
  f << 1, 2, 2, 3, 3, 4;
  Matrix l(3, 1);
  l << 3, 4, 5;
  CHECK(set.features == f);
  CHECK(set.labels == l);
}

TEST_CASE("training matrix row count") {
  const std::vector<double> x(37, 0.5);
  CHECK(build_training_matrix<double>(std::span<const double>(x.data(), 7), 4, 3).rows() == 1);
  CHECK_THROWS_AS(build_training_matrix<double>(std::span<const double>(x.data(), 6), 4, 3), ValidationError);
  CHECK_THROWS_AS(build_training_matrix<double>(view(x), 0, 3), ValidationError);
  for (Index n = 1; n <= 6; ++n) {
    for (Index k = 1; k <= 6; ++k) {
      for (Index len = n + k; len <= 37; len += 5) {
        const auto set = build_training_matrix<double>(std::span<const double>(x.data(), static_cast<std::size_t>(len)), n, k);
        CHECK(set.rows() == len - n - k + 1);
        CHECK(set.features.cols() == n);
        CHECK(set.labels.cols() == k);
      }
    }
  }
}

TEST_CASE("stacking training sets") {
  const std::vector<double> a{1, 2, 3, 4}, b{5, 6, 7, 8, 9};
  const std::vector<TrainingSet<double>> parts{build_training_matrix<double>(view(a), 2, 1),
                                               build_training_matrix<double>(view(b), 2, 1)};
  const auto s = stack<double>(parts);
  CHECK(s.rows() == 5);
  CHECK(s.features(2, 0) == 5);
  CHECK(s.labels(4, 0) == 9);
  const std::vector<TrainingSet<double>> mixed{parts[0], build_training_matrix<double>(view(b), 3, 1)};
  CHECK_THROWS_AS(stack<double>(mixed), ValidationError);
}

TEST_CASE("labels equal to the last feature train the traditional embedding") {
  const Matrix x = random_matrix(200, 4, 1);
  const Matrix y = x.col(3).replicate(1, 3);
  const auto model = train(x, y, 0.0);
  CHECK(model.meta.solver == SolverPath::Cholesky);
  for (Index k = 0; k < 3; ++k) {
    for (Index i = 0; i < 4; ++i) CHECK(model.weights(i, k) == doctest::Approx(i == 3 ? 1.0 : 0.0).epsilon(1e-10));
    CHECK(std::abs(model.intercepts(k)) < 1e-12);
  }
}

TEST_CASE("coefficients match a brute-force normal-equation solve") {
  for (Index n = 1; n <= 5; ++n) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const Index rows = 30 + 7 * n;
      Matrix x = random_matrix(rows, n, 10 * n + seed);
      x.array() += 0.3 * double(seed);  // non-zero feature means
      const Matrix noise = random_matrix(rows, 2, 99 + seed);
      Matrix y(rows, 2);
      y.col(0) = (x * Vector::LinSpaced(n, -1.0, 2.0) + 0.1 * noise.col(0)).array() + 0.7;
      y.col(1) = (x.rowwise().sum() * 0.25 + noise.col(1)).array() - 1.2;
      const auto model = train(x, y, 0.0);
      std::vector<std::vector<double>> rows_x(static_cast<std::size_t>(rows));
      for (Index r = 0; r < rows; ++r) {
        for (Index i = 0; i < n; ++i) rows_x[static_cast<std::size_t>(r)].push_back(x(r, i));
      }
      for (Index k = 0; k < 2; ++k) {
        std::vector<double> yk(y.col(k).data(), y.col(k).data() + rows);
        const auto ref = oracle::least_squares(rows_x, yk);
        auto rel = [](double got, long double want) {
          return std::abs(got - double(want)) / std::max(1.0, std::abs(double(want)));
        };
        CHECK(rel(model.intercepts(k), ref[0]) < 1e-8);
        for (Index i = 0; i < n; ++i) CHECK(rel(model.weights(i, k), ref[static_cast<std::size_t>(i + 1)]) < 1e-8);
      }
    }
  }
}

TEST_CASE("ridge solution matches the penalised normal equations") {
  const Index n = 3, rows = 40;
  const Matrix x = random_matrix(rows, n, 5);
  const Matrix y = random_matrix(rows, 1, 6);
  const double ridge = 0.3;
  const auto model = train(x, y, ridge);
  const Matrix xc = x.rowwise() - x.colwise().mean();
  const Vector yc = y.col(0).array() - y.col(0).mean();
  std::vector<std::vector<long double>> g(n, std::vector<long double>(n));
  std::vector<long double> rhs(n);
  long double trace = 0;
  for (Index i = 0; i < n; ++i) trace += xc.col(i).squaredNorm();
  for (Index i = 0; i < n; ++i) {
    rhs[i] = xc.col(i).dot(yc);
    for (Index j = 0; j < n; ++j) g[i][j] = xc.col(i).dot(xc.col(j)) + (i == j ? ridge * trace / n : 0.0);
  }
  const auto w = oracle::solve(g, rhs);
  for (Index i = 0; i < n; ++i) CHECK(model.weights(i, 0) == doctest::Approx(double(w[i])).epsilon(1e-10));
  CHECK(model.meta.penalty == doctest::Approx(double(ridge * trace / n)));
}

TEST_CASE("AR(1) one-step weight recovers rho at 1e4 rows") {
  for (double rho : {0.5, 0.8, 0.95}) {
    const auto x = oracle::ar1(rho, 10001, 21);
    const auto set = build_training_matrix<double>(view(x), 1, 1);
    REQUIRE(set.rows() == 10000);
    const auto model = train(set, 0.0);
    CHECK(model.weights(0, 0) == doctest::Approx(rho).epsilon(0.05));
  }
}

TEST_CASE("training never does worse than traditional feedback on its own rows") {
  const PowerSpectrum s(FlatTop{0.01, 1.0});
  for (double ratio : {40.0, 10.0, 2.0}) {
    const MeasurementModel model(kTwoPi / 40.0, dead_time_for_ratio(ratio, 1.0, kTwoPi / 40.0), GaussianReadout{0.02});
    const auto run = simulate_free_running(s, model, 4, 1500, 31);
    for (Index n : {1, 3, 10}) {
      const auto set = build_training_matrix<double>(
          std::span<const double>(run.series.values.data(), 1500), n, 8);
      const auto fit = residual_rms(train(set, 0.0), set);
      const auto base = traditional_residual_rms(set);
      for (Index k = 0; k < 8; ++k) CHECK(fit(k) <= base(k));
    }
  }
}

TEST_CASE("predictions are affine in the features") {
  const auto x = oracle::ar1(0.9, 600, 4);
  const auto set = build_training_matrix<double>(view(x), 5, 4);
  const auto model = train(set, 1e-6);
  const Vector f = set.features.row(17).transpose();
  const double c = 0.37;
  const Vector shifted = predict(model, Vector(f.array() + c)).values;
  const Vector base = predict(model, f).values;
  const Vector expected = c * model.weights.colwise().sum().transpose();
  for (Index k = 0; k < 4; ++k) CHECK(shifted(k) - base(k) == doctest::Approx(expected(k)).epsilon(1e-12));
  CHECK_THROWS_AS(predict(model, Vector(Vector::Zero(4))), ValidationError);
}

TEST_CASE("hand-set 2x2 model") {
  PredictorModel<double> m;
  m.n = 2;
  m.horizons = 2;
  m.intercepts = Vector(2);
  m.intercepts << 0.5, -0.5;
  m.weights = Matrix(2, 2);
  m.weights << 1, 2, 3, 4;
  const std::vector<double> in{0.1, -0.2};
  const auto p = predict(m, view(in)).values;
  CHECK(p(0) == doctest::Approx(0.5 + 1 * 0.1 + 3 * -0.2));
  CHECK(p(1) == doctest::Approx(-0.5 + 2 * 0.1 + 4 * -0.2));
}

TEST_CASE("baselines") {
  const std::vector<double> recent{0.1, -0.3, 0.4};
  const auto t = traditional_predict(view(recent), 5).values;
  CHECK(t == Vector::Constant(5, 0.4));
  const auto embed = traditional_model<double>(3, 5);
  CHECK(predict(embed, view(recent)).values == t);

  PredictorModel<double> constant;
  constant.n = 3;
  constant.horizons = 2;
  constant.weights = Matrix::Zero(3, 2);
  constant.intercepts = Vector(2);
  constant.intercepts << 0.2, -0.1;
  CHECK(predict(constant, view(recent)).values == constant.intercepts);

  Matrix labels(4, 2);
  labels << 1, -1, -1, 1, 2, 0, -2, 0;
  CHECK(mean_predict(labels).values == Vector::Zero(2));
}

TEST_CASE("on white noise traditional feedback has twice the mean predictor's error") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> e(0.0, 1.0);
  std::vector<double> x(200001);
  for (auto& v : x) v = e(rng);
  const auto set = build_training_matrix<double>(view(x), 1, 1);
  const double trad = traditional_residual_rms(set)(0);
  const double mean = std::sqrt((set.labels.array() - mean_predict(set.labels).values(0)).square().mean());
  CHECK(trad * trad == doctest::Approx(2.0).epsilon(0.02));
  CHECK(mean * mean == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("ridge path: weights shrink monotonically to the mean predictor") {
  const auto x = oracle::ar1(0.9, 800, 12);
  const auto set = build_training_matrix<double>(view(x), 6, 3);
  double previous[3] = {INFINITY, INFINITY, INFINITY};
  for (double ridge : {0.0, 1e-6, 1e-4, 1e-2, 1e-1, 1.0, 10.0, 1e3}) {
    const auto m = train(set, ridge);
    for (Index k = 0; k < 3; ++k) {
      const double norm = m.weights.col(k).norm();
      CHECK(norm <= previous[k] * (1 + 1e-12));
      previous[k] = norm;
    }
  }
  const auto big = train(set, 1e12);
  CHECK(big.weights.cwiseAbs().maxCoeff() < 1e-9);
  const Vector means = mean_predict(set.labels).values;
  for (Index k = 0; k < 3; ++k) CHECK(big.intercepts(k) == doctest::Approx(means(k)).epsilon(1e-6));
}

TEST_CASE("long horizons of a flat-top model fall back to the mean") {
  const PowerSpectrum s(FlatTop{0.01, 1.0});
  const MeasurementModel model(kTwoPi / 40.0, 0.0, GaussianReadout{0.025});
  std::vector<TrainingSet<double>> parts;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto run = simulate_free_running(s, model, 4, 4000, seed);
    parts.push_back(build_training_matrix<double>(std::span<const double>(run.series.values.data(), 4000), 20, 400));
  }
  const auto set = stack<double>(parts);
  const auto m = train(set, 1e-6);
  const Matrix p = predict_rows(m, set.features);
  auto spread = [&](Index k) {
    const Vector c = p.col(k).array() - p.col(k).mean();
    const Vector l = set.labels.col(k).array() - set.labels.col(k).mean();
    return std::sqrt(c.squaredNorm() / l.squaredNorm());
  };
  // The correlation time is 1/w_c ~ 6.4 steps; k = 400 is > 60 of them.
  CHECK(spread(0) > 0.9);
  CHECK(spread(399) < 0.15);
  CHECK(m.weights.col(399).norm() < 0.2 * m.weights.col(0).norm());
}

TEST_CASE("degenerate systems") {
  const Matrix constant = Matrix::Constant(20, 3, 0.5);
  const Matrix y = random_matrix(20, 2, 3);
  CHECK_THROWS_AS(train(constant, y, 0.0), SingularSystemError);
  const auto ok = train(constant, y, 1e-3);
  CHECK(ok.weights.cwiseAbs().maxCoeff() == 0.0);

  Matrix dup = random_matrix(50, 3, 4);
  dup.col(2) = dup.col(1);
  CHECK_THROWS_AS(train(dup, Matrix(random_matrix(50, 1, 5)), 0.0), SingularSystemError);
  const auto rr = train(dup, Matrix(random_matrix(50, 1, 5)), 1e-14);
  CHECK(rr.meta.solver == SolverPath::RankRevealing);
  CHECK(rr.weights.allFinite());
  // Only the sum over duplicated columns is determined.
  const auto reduced = train(Matrix(dup.leftCols(2)), Matrix(random_matrix(50, 1, 5)), 0.0);
  CHECK(rr.weights(1, 0) + rr.weights(2, 0) == doctest::Approx(reduced.weights(1, 0)).epsilon(1e-6));
  CHECK(rr.weights(0, 0) == doctest::Approx(reduced.weights(0, 0)).epsilon(1e-6));

  CHECK_THROWS_AS(train(Matrix(random_matrix(3, 3, 1)), Matrix(random_matrix(3, 1, 1)), 0.0), ValidationError);
  CHECK_THROWS_AS(train(Matrix(random_matrix(10, 2, 1)), Matrix(random_matrix(10, 1, 1)), -1.0), ValidationError);
  Matrix bad = random_matrix(10, 2, 1);
  bad(3, 1) = NAN;
  CHECK_THROWS_AS(train(bad, Matrix(random_matrix(10, 1, 1)), 0.0), ValidationError);
}

TEST_CASE("single precision instantiation") {
  Eigen::MatrixXf x = random_matrix(100, 2, 7).cast<float>();
  Eigen::MatrixXf y = (x.col(0) * 2.0f).eval();
  const auto m = train(x, y, 0.0f);
  CHECK(m.weights(0, 0) == doctest::Approx(2.0).epsilon(1e-4));
}
