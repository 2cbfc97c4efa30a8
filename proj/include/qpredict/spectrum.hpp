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

#include <string>
#include <variant>
#include <vector>

namespace qpredict {

// All densities are one-sided in angular frequency: the variance of a
// process with density S is the integral of S(w) over w in (0, inf).

/// Constant density `level` (rad^2 s) for w <= `cutoff` (rad/s), zero above.
struct FlatTop {
  double level = 0.0;
  double cutoff = 1.0;
};

/// coefficient / w^2 + white_level for w <= upper_cutoff, zero above.
struct OneOverF2PlusWhite {
  double coefficient = 0.0;
  double white_level = 0.0;
  double upper_cutoff = 1.0;
};

/// Piecewise-linear density through (frequency, density) points; zero
/// outside the tabulated range.
struct Tabulated {
  std::vector<double> frequencies;
  std::vector<double> densities;
};

class PowerSpectrum {
 public:
  using Shape = std::variant<FlatTop, OneOverF2PlusWhite, Tabulated>;

  // Throws ValidationError on negative densities, non-positive cutoffs, or
  // non-increasing tabulated frequencies.
  PowerSpectrum(FlatTop shape);
  PowerSpectrum(OneOverF2PlusWhite shape);
  PowerSpectrum(Tabulated shape);

  double density(double omega) const;

  /// Highest angular frequency at which the density can be nonzero.
  double highest_frequency() const;

  /// The w_c sampling ratios are quoted against: the flat-top cutoff,
  /// the 1/f^2+white upper cutoff, or the tabulated support edge.
  double characteristic_cutoff() const { return highest_frequency(); }

  const Shape& shape() const { return shape_; }
  std::string kind_name() const;
  std::string descriptor() const;

  template <typename Visitor>
  decltype(auto) visit(Visitor&& v) const {
    return std::visit(std::forward<Visitor>(v), shape_);
  }

 private:
  void validate() const;

  Shape shape_;
};

}  // namespace qpredict
