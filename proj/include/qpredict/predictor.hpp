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
#include "qpredict/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qpredict {

/// Sliding-window design: each row holds n consecutive measurements (oldest
/// first) as features and the next K measurements as labels.
template <typename Scalar>
struct TrainingSet {
  MatrixX<Scalar> features;  // rows x n
  MatrixX<Scalar> labels;    // rows x K

  Index rows() const { return features.rows(); }
};

template <typename Scalar>
TrainingSet<Scalar> build_training_matrix(std::span<const Scalar> series, Index n, Index horizons) {
  if (n < 1 || horizons < 1) throw ValidationError("feature count and horizon count must be >= 1");
  const auto length = static_cast<Index>(series.size());
  if (length < n + horizons) {
    throw ValidationError("series of length " + std::to_string(length) + " is too short for n = " +
                          std::to_string(n) + ", K = " + std::to_string(horizons));
  }
  const Index rows = length - n - horizons + 1;
  Eigen::Map<const VectorX<Scalar>> x(series.data(), length);
  TrainingSet<Scalar> set{MatrixX<Scalar>(rows, n), MatrixX<Scalar>(rows, horizons)};
  for (Index r = 0; r < rows; ++r) {
    set.features.row(r) = x.segment(r, n).transpose();
    set.labels.row(r) = x.segment(r + n, horizons).transpose();
  }
  return set;
}

/// Vertical concatenation of training sets with equal n and K.
template <typename Scalar>
TrainingSet<Scalar> stack(std::span<const TrainingSet<Scalar>> parts) {
  if (parts.empty()) throw ValidationError("nothing to stack");
  Index rows = 0;
  for (const auto& p : parts) {
    if (p.features.cols() != parts.front().features.cols() ||
        p.labels.cols() != parts.front().labels.cols()) {
      throw ValidationError("training sets disagree on n or K");
    }
    rows += p.rows();
  }
  TrainingSet<Scalar> out{MatrixX<Scalar>(rows, parts.front().features.cols()),
                          MatrixX<Scalar>(rows, parts.front().labels.cols())};
  Index at = 0;
  for (const auto& p : parts) {
    out.features.middleRows(at, p.rows()) = p.features;
    out.labels.middleRows(at, p.rows()) = p.labels;
    at += p.rows();
  }
  return out;
}

enum class SolverPath { Cholesky, RankRevealing };

inline const char* to_string(SolverPath path) {
  return path == SolverPath::Cholesky ? "cholesky" : "rank_revealing";
}

struct TrainingMeta {
  std::string spectrum;
  Index rows = 0;
  std::vector<std::uint64_t> seeds;
  SolverPath solver = SolverPath::Cholesky;
  double penalty = 0.0;  // absolute penalty added to the centered Gram diagonal
};

/// Per-horizon affine predictor phi^P(t_k) = w0_k + sum_i w_ik phi^M_i.
template <typename Scalar>
struct PredictorModel {
  Index n = 0;
  Index horizons = 0;
  Scalar ridge = 0;
  VectorX<Scalar> intercepts;  // K
  MatrixX<Scalar> weights;     // n x K, row i is the (i+1)-th oldest feature
  TrainingMeta meta;
};

template <typename Scalar>
struct PredictionSet {
  Index base_index = -1;
  VectorX<Scalar> values;  // k = 1..K
};

namespace detail {

template <typename Scalar>
void require_finite(const Eigen::Ref<const MatrixX<Scalar>>& m, const char* what) {
  if (!m.allFinite()) throw ValidationError(std::string(what) + " contain non-finite values");
}

}  // namespace detail

/// Per-horizon least squares with an unpenalised intercept:
///   min sum_rows (y_k - w0_k - x . w_k)^2 + penalty |w_k|^2,
/// penalty = ridge * trace(Xc^T Xc) / n (ridge itself when that trace is 0).
/// Solved on centered data through one shared factorisation; the
/// rank-revealing path runs when the Cholesky factor is unusable or its
/// reciprocal condition estimate falls below 1e-12.
template <typename DerivedX, typename DerivedY>
PredictorModel<typename DerivedX::Scalar> train(const Eigen::MatrixBase<DerivedX>& features,
                                                const Eigen::MatrixBase<DerivedY>& labels,
                                                typename DerivedX::Scalar ridge) {
  using Scalar = typename DerivedX::Scalar;
  const Index rows = features.rows();
  const Index n = features.cols();
  const Index horizons = labels.cols();
  if (labels.rows() != rows) throw ValidationError("features and labels differ in row count");
  if (n < 1 || horizons < 1) throw ValidationError("need at least one feature and one horizon");
  if (rows < n + 1) {
    throw ValidationError("need at least n + 1 = " + std::to_string(n + 1) + " training rows, got " +
                          std::to_string(rows));
  }
  if (!(ridge >= Scalar(0)) || !std::isfinite(static_cast<double>(ridge))) {
    throw ValidationError("ridge must be finite and >= 0");
  }
  detail::require_finite<Scalar>(features, "features");
  detail::require_finite<Scalar>(labels, "labels");

  const RowVectorX<Scalar> feature_mean = features.colwise().mean();
  const RowVectorX<Scalar> label_mean = labels.colwise().mean();
  const MatrixX<Scalar> xc = features.rowwise() - feature_mean;
  const MatrixX<Scalar> yc = labels.rowwise() - label_mean;

  MatrixX<Scalar> gram = MatrixX<Scalar>::Zero(n, n);
  gram.template selfadjointView<Eigen::Lower>().rankUpdate(xc.adjoint());
  gram.template triangularView<Eigen::StrictlyUpper>() = gram.adjoint();
  const Scalar scale = gram.trace() / Scalar(n);
  const Scalar penalty = ridge * (scale > Scalar(0) ? scale : Scalar(1));
  gram.diagonal().array() += penalty;
  const MatrixX<Scalar> rhs = xc.adjoint() * yc;

  PredictorModel<Scalar> model;
  model.n = n;
  model.horizons = horizons;
  model.ridge = ridge;
  model.meta.rows = rows;
  model.meta.penalty = static_cast<double>(penalty);

  Eigen::LLT<MatrixX<Scalar>> llt(gram);
  const bool cholesky_ok = llt.info() == Eigen::Success && llt.rcond() >= Scalar(1e-12);
  if (cholesky_ok) {
    model.weights = llt.solve(rhs);
    model.meta.solver = SolverPath::Cholesky;
  } else {
    MatrixX<Scalar> design(rows + n, n);
    design.topRows(rows) = xc;
    design.bottomRows(n) = MatrixX<Scalar>::Identity(n, n) * std::sqrt(penalty);
    MatrixX<Scalar> target = MatrixX<Scalar>::Zero(rows + n, horizons);
    target.topRows(rows) = yc;
    Eigen::CompleteOrthogonalDecomposition<MatrixX<Scalar>> cod(design);
    if (cod.rank() < n) {
      throw SingularSystemError("normal equations are rank deficient (rank " +
                                std::to_string(cod.rank()) + " of " + std::to_string(n) +
                                "); train with ridge > 0");
    }
    model.weights = cod.solve(target);
    model.meta.solver = SolverPath::RankRevealing;
  }
  model.intercepts = (label_mean - feature_mean * model.weights).transpose();
  if (!model.weights.allFinite() || !model.intercepts.allFinite()) {
    throw SingularSystemError("training produced non-finite coefficients; train with ridge > 0");
  }
  return model;
}

template <typename Scalar>
PredictorModel<Scalar> train(const TrainingSet<Scalar>& set, Scalar ridge) {
  return train(set.features, set.labels, ridge);
}

/// Predictions for K horizons from the n most recent measurements, oldest
/// first.
template <typename Scalar, typename Derived>
PredictionSet<Scalar> predict(const PredictorModel<Scalar>& model,
                              const Eigen::MatrixBase<Derived>& recent) {
  if (recent.size() != model.n) {
    throw ValidationError("predictor expects " + std::to_string(model.n) + " features, got " +
                          std::to_string(recent.size()));
  }
  if (!recent.allFinite()) throw ValidationError("features contain non-finite values");
  PredictionSet<Scalar> out;
  out.values = model.intercepts;
  out.values.noalias() += model.weights.transpose() * recent.derived().template cast<Scalar>();
  return out;
}

template <typename Scalar>
PredictionSet<Scalar> predict(const PredictorModel<Scalar>& model, std::span<const Scalar> recent) {
  return predict(model, Eigen::Map<const VectorX<Scalar>>(recent.data(), static_cast<Index>(recent.size())));
}

/// Row-wise predict over a feature matrix (rows x n) -> rows x K.
template <typename Scalar, typename Derived>
MatrixX<Scalar> predict_rows(const PredictorModel<Scalar>& model,
                             const Eigen::MatrixBase<Derived>& features) {
  if (features.cols() != model.n) throw ValidationError("feature matrix has the wrong width");
  MatrixX<Scalar> out = features * model.weights;
  out.rowwise() += model.intercepts.transpose();
  return out;
}

/// Baseline: every horizon repeats the last measurement.
template <typename Scalar>
PredictionSet<Scalar> traditional_predict(std::span<const Scalar> recent, Index horizons) {
  if (recent.empty()) throw ValidationError("traditional prediction needs a measurement");
  if (horizons < 1) throw ValidationError("horizon count must be >= 1");
  return {-1, VectorX<Scalar>::Constant(horizons, recent.back())};
}

/// Baseline: the per-horizon training-label mean, whatever the input.
template <typename Derived>
PredictionSet<typename Derived::Scalar> mean_predict(const Eigen::MatrixBase<Derived>& labels) {
  if (labels.rows() < 1) throw ValidationError("mean prediction needs training labels");
  return {-1, labels.colwise().mean().transpose()};
}

/// The model that reproduces traditional_predict: weights (0, ..., 0, 1)
/// and zero intercepts at every horizon.
template <typename Scalar>
PredictorModel<Scalar> traditional_model(Index n, Index horizons) {
  PredictorModel<Scalar> model;
  model.n = n;
  model.horizons = horizons;
  model.intercepts = VectorX<Scalar>::Zero(horizons);
  model.weights = MatrixX<Scalar>::Zero(n, horizons);
  model.weights.row(n - 1).setOnes();
  return model;
}

/// Per-horizon RMS of (label - prediction) over a training set.
template <typename Scalar>
VectorX<Scalar> residual_rms(const PredictorModel<Scalar>& model, const TrainingSet<Scalar>& set) {
  const MatrixX<Scalar> residual = set.labels - predict_rows(model, set.features);
  return (residual.colwise().squaredNorm() / Scalar(set.rows())).cwiseSqrt().transpose();
}

/// Per-horizon RMS of (label - last feature) over a training set.
template <typename Scalar>
VectorX<Scalar> traditional_residual_rms(const TrainingSet<Scalar>& set) {
  const MatrixX<Scalar> residual =
      set.labels.colwise() - set.features.col(set.features.cols() - 1);
  return (residual.colwise().squaredNorm() / Scalar(set.rows())).cwiseSqrt().transpose();
}

}  // namespace qpredict
