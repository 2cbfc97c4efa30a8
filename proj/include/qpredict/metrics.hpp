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

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace qpredict {

/// Pearson product-moment correlation. Throws UndefinedCorrelationError if
/// either input has zero variance.
template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar pearson_r(const Eigen::MatrixBase<DerivedX>& x,
                                    const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  if (x.size() != y.size()) throw ValidationError("pearson_r inputs differ in length");
  if (x.size() < 2) throw ValidationError("pearson_r needs at least 2 points");
  const auto xc = (x.array() - x.mean()).eval();
  const auto yc = (y.array().template cast<Scalar>() - Scalar(y.mean())).eval();
  const Scalar sxx = xc.square().sum();
  const Scalar syy = yc.square().sum();
  if (!(sxx > Scalar(0)) || !(syy > Scalar(0))) {
    throw UndefinedCorrelationError("correlation is undefined for a zero-variance input");
  }
  const Scalar r = (xc * yc).sum() / std::sqrt(sxx * syy);
  return std::clamp(r, Scalar(-1), Scalar(1));
}

/// Unbiased (1/(N-1)) sample variance of the first N values.
template <typename Derived>
typename Derived::Scalar sample_variance(const Eigen::MatrixBase<Derived>& series, Index count) {
  using Scalar = typename Derived::Scalar;
  if (count < 2) throw ValidationError("sample variance needs N >= 2");
  if (count > series.size()) throw ValidationError("N exceeds the series length");
  const auto head = series.derived().head(count);
  const Scalar mean = head.mean();
  return (head.array() - mean).square().sum() / Scalar(count - 1);
}

template <typename Derived>
typename Derived::Scalar sample_variance(const Eigen::MatrixBase<Derived>& series) {
  return sample_variance(series, series.size());
}

/// Non-overlapping Allan variance at an averaging factor of `m` samples.
/// Reported as an extra; the stability comparisons use sample_variance.
template <typename Derived>
typename Derived::Scalar allan_variance(const Eigen::MatrixBase<Derived>& series, Index m = 1) {
  using Scalar = typename Derived::Scalar;
  if (m < 1) throw ValidationError("averaging factor must be >= 1");
  const Index blocks = series.size() / m;
  if (blocks < 2) throw ValidationError("series too short for this averaging factor");
  Scalar sum = 0;
  Scalar previous = series.derived().segment(0, m).mean();
  for (Index b = 1; b < blocks; ++b) {
    const Scalar current = series.derived().segment(b * m, m).mean();
    sum += (current - previous) * (current - previous);
    previous = current;
  }
  return sum / (Scalar(2) * Scalar(blocks - 1));
}

template <typename Scalar>
struct EllipseSummary {
  Scalar r = 0;
  Eigen::Matrix<Scalar, 2, 2> covariance;
  /// Columns are unit axis directions: major first.
  Eigen::Matrix<Scalar, 2, 2> axes;
  /// Standard deviations along the axes (square roots of the eigenvalues).
  Eigen::Matrix<Scalar, 2, 1> lengths;
  /// Set for collinear data (minor axis of zero length, r = +-1).
  bool degenerate = false;
};

/// Covariance ellipse of paired samples.
template <typename DerivedX, typename DerivedY>
EllipseSummary<typename DerivedX::Scalar> ellipse_summary(const Eigen::MatrixBase<DerivedX>& x,
                                                          const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  using Mat2 = Eigen::Matrix<Scalar, 2, 2>;
  if (x.size() != y.size()) throw ValidationError("ellipse inputs differ in length");
  if (x.size() < 3) throw ValidationError("ellipse needs at least 3 points");
  const Scalar count = Scalar(x.size());
  const auto xc = (x.array() - x.mean()).eval();
  const auto yc = (y.array() - y.mean()).eval();
  EllipseSummary<Scalar> out;
  out.covariance << xc.square().sum(), (xc * yc).sum(), (xc * yc).sum(), yc.square().sum();
  out.covariance /= count - Scalar(1);

  Eigen::SelfAdjointEigenSolver<Mat2> eig(out.covariance);
  // Eigen sorts ascending; major axis goes first.
  out.axes.col(0) = eig.eigenvectors().col(1);
  out.axes.col(1) = eig.eigenvectors().col(0);
  for (int c = 0; c < 2; ++c) {
    // Fix the sign so the major axis points into x >= 0.
    const Index lead = std::abs(out.axes(0, c)) > Scalar(1e-12) ? 0 : 1;
    if (out.axes(lead, c) < Scalar(0)) out.axes.col(c) *= Scalar(-1);
  }
  const Scalar major = std::max(eig.eigenvalues()(1), Scalar(0));
  const Scalar minor = std::max(eig.eigenvalues()(0), Scalar(0));
  out.lengths << std::sqrt(major), std::sqrt(minor);
  out.degenerate = minor <= Scalar(1e-12) * major;
  if (out.degenerate) out.lengths(1) = Scalar(0);

  const Scalar sxx = out.covariance(0, 0);
  const Scalar syy = out.covariance(1, 1);
  if (sxx > Scalar(0) && syy > Scalar(0)) {
    out.r = std::clamp(out.covariance(0, 1) / std::sqrt(sxx * syy), Scalar(-1), Scalar(1));
  }
  return out;
}

enum class Normalization { FieldMin, NoiseRms, UncorrectedRms, None };

inline const char* to_string(Normalization mode) {
  switch (mode) {
    case Normalization::FieldMin: return "field-min";
    case Normalization::NoiseRms: return "noise-rms";
    case Normalization::UncorrectedRms: return "uncorrected-rms";
    case Normalization::None: return "none";
  }
  return "none";
}

inline Normalization normalization_from_string(const std::string& name) {
  if (name == "field-min") return Normalization::FieldMin;
  if (name == "noise-rms") return Normalization::NoiseRms;
  if (name == "uncorrected-rms") return Normalization::UncorrectedRms;
  if (name == "none") return Normalization::None;
  throw ValidationError("unknown normalization mode '" + name + "'");
}

/// RMS prediction error over (row, horizon). Row 0 is conventionally the
/// traditional-feedback row tagged "1*".
struct RmsMap {
  std::vector<std::string> row_labels;
  Matrix rms;  // rows x K, raw RMS in rad
  Normalization mode = Normalization::None;
  double normalization = 1.0;

  Matrix normalized() const { return rms / normalization; }
  Index horizons() const { return rms.cols(); }
  Index row(const std::string& label) const {
    for (std::size_t i = 0; i < row_labels.size(); ++i) {
      if (row_labels[i] == label) return static_cast<Index>(i);
    }
    throw ValidationError("RMS map has no row '" + label + "'");
  }
};

/// Builds the map from per-cell mean squared errors. `reference_rms` is the
/// divisor for NoiseRms/UncorrectedRms.
inline RmsMap rms_map_from_mse(std::vector<std::string> labels, const Matrix& mse,
                               Normalization mode, std::optional<double> reference_rms = {}) {
  if (mse.size() == 0) throw ValidationError("RMS map needs at least one cell");
  if (static_cast<Index>(labels.size()) != mse.rows()) {
    throw ValidationError("RMS map labels do not match its rows");
  }
  if (!mse.allFinite() || (mse.array() < 0.0).any()) {
    throw ValidationError("RMS map cells must be finite and >= 0");
  }
  RmsMap map{std::move(labels), mse.cwiseSqrt(), mode, 1.0};
  switch (mode) {
    case Normalization::FieldMin: {
      const double low = map.rms.minCoeff();
      if (!(low > 0.0)) throw ValidationError("field-min normalization needs a positive minimum");
      map.normalization = low;
      break;
    }
    case Normalization::NoiseRms:
    case Normalization::UncorrectedRms:
      if (!reference_rms || !(*reference_rms > 0.0)) {
        throw ValidationError("normalization reference RMS must be > 0");
      }
      map.normalization = *reference_rms;
      break;
    case Normalization::None:
      break;
  }
  return map;
}

/// RMS of (prediction - truth) for each row's windows x K prediction
/// matrix. Without an explicit reference the RMS-based modes use the RMS of
/// the truths about zero.
inline RmsMap rms_error_map(std::vector<std::string> labels, const std::vector<Matrix>& predictions,
                            const Matrix& truths, Normalization mode,
                            std::optional<double> reference_rms = {}) {
  if (predictions.empty() || truths.size() == 0) throw ValidationError("RMS map needs data");
  Matrix mse(static_cast<Index>(predictions.size()), truths.cols());
  for (std::size_t r = 0; r < predictions.size(); ++r) {
    const auto& p = predictions[r];
    if (p.rows() != truths.rows() || p.cols() != truths.cols()) {
      throw ValidationError("prediction grid does not match the truth grid");
    }
    mse.row(static_cast<Index>(r)) = (p - truths).colwise().squaredNorm() / double(truths.rows());
  }
  if (!reference_rms && mode != Normalization::FieldMin && mode != Normalization::None) {
    reference_rms = std::sqrt(truths.squaredNorm() / double(truths.size()));
  }
  return rms_map_from_mse(std::move(labels), mse, mode, reference_rms);
}

/// Bootstrap over `samples` exchangeable units: `statistic` receives the
/// resampled unit indices and returns one value per resample.
struct BootstrapResult {
  double estimate = 0.0;  // statistic on the original sample
  std::vector<double> replicates;

  double standard_error() const {
    if (replicates.size() < 2) return 0.0;
    const Eigen::Map<const Vector> r(replicates.data(), static_cast<Index>(replicates.size()));
    return std::sqrt((r.array() - r.mean()).square().sum() / double(r.size() - 1));
  }
  /// Empirical quantile with linear interpolation, q in [0, 1].
  double quantile(double q) const {
    if (replicates.empty()) return estimate;
    std::vector<double> sorted = replicates;
    std::sort(sorted.begin(), sorted.end());
    const double pos = std::clamp(q, 0.0, 1.0) * double(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - double(lo)) * (sorted[hi] - sorted[lo]);
  }
};

template <typename Statistic>
BootstrapResult bootstrap(Index samples, Index resamples, std::uint64_t seed, Statistic&& statistic) {
  if (samples < 1) throw ValidationError("bootstrap needs at least one unit");
  std::vector<Index> indices(static_cast<std::size_t>(samples));
  for (Index i = 0; i < samples; ++i) indices[static_cast<std::size_t>(i)] = i;
  BootstrapResult out;
  out.estimate = statistic(indices);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> pick(0, samples - 1);
  out.replicates.reserve(static_cast<std::size_t>(resamples));
  for (Index b = 0; b < resamples; ++b) {
    for (auto& i : indices) i = pick(rng);
    out.replicates.push_back(statistic(indices));
  }
  return out;
}

}  // namespace qpredict
