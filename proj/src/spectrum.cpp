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

#include "qpredict/spectrum.hpp"

#include "qpredict/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qpredict {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

}  // namespace

PowerSpectrum::PowerSpectrum(FlatTop shape) : shape_(shape) { validate(); }
PowerSpectrum::PowerSpectrum(OneOverF2PlusWhite shape) : shape_(shape) { validate(); }
PowerSpectrum::PowerSpectrum(Tabulated shape) : shape_(std::move(shape)) { validate(); }

void PowerSpectrum::validate() const {
  visit(Overloaded{
      [](const FlatTop& s) {
        require(std::isfinite(s.level) && s.level >= 0.0, "flat-top level must be finite and >= 0");
        require(std::isfinite(s.cutoff) && s.cutoff > 0.0, "flat-top cutoff must be > 0");
      },
      [](const OneOverF2PlusWhite& s) {
        require(std::isfinite(s.coefficient) && s.coefficient >= 0.0,
                "1/f^2 coefficient must be finite and >= 0");
        require(std::isfinite(s.white_level) && s.white_level >= 0.0,
                "white level must be finite and >= 0");
        require(std::isfinite(s.upper_cutoff) && s.upper_cutoff > 0.0, "upper cutoff must be > 0");
      },
      [](const Tabulated& s) {
        require(!s.frequencies.empty(), "tabulated spectrum needs at least one point");
        require(s.frequencies.size() == s.densities.size(),
                "tabulated frequencies and densities differ in length");
        for (std::size_t i = 0; i < s.frequencies.size(); ++i) {
          require(std::isfinite(s.frequencies[i]) && s.frequencies[i] >= 0.0,
                  "tabulated frequencies must be finite and >= 0");
          require(std::isfinite(s.densities[i]) && s.densities[i] >= 0.0,
                  "tabulated densities must be finite and >= 0");
          if (i > 0) {
            require(s.frequencies[i] > s.frequencies[i - 1],
                    "tabulated frequencies must be strictly increasing");
          }
        }
        require(s.frequencies.back() > 0.0, "tabulated spectrum must extend above 0 rad/s");
      }});
}

double PowerSpectrum::density(double omega) const {
  if (!(omega >= 0.0)) return 0.0;
  return visit(Overloaded{
      [omega](const FlatTop& s) { return omega <= s.cutoff ? s.level : 0.0; },
      [omega](const OneOverF2PlusWhite& s) {
        if (omega > s.upper_cutoff) return 0.0;
        if (omega == 0.0) return s.coefficient > 0.0 ? HUGE_VAL : s.white_level;
        return s.coefficient / (omega * omega) + s.white_level;
      },
      [omega](const Tabulated& s) {
        const auto& f = s.frequencies;
        const auto& d = s.densities;
        if (omega < f.front() || omega > f.back()) return 0.0;
        auto hi = std::upper_bound(f.begin(), f.end(), omega);
        if (hi == f.end()) return d.back();
        const auto j = static_cast<std::size_t>(hi - f.begin());
        const double t = (omega - f[j - 1]) / (f[j] - f[j - 1]);
        return d[j - 1] + t * (d[j] - d[j - 1]);
      }});
}

double PowerSpectrum::highest_frequency() const {
  return visit(Overloaded{
      [](const FlatTop& s) { return s.cutoff; },
      [](const OneOverF2PlusWhite& s) { return s.upper_cutoff; },
      [](const Tabulated& s) {
        // Interpolation stays nonzero up to the next point after the last
        // nonzero density.
        const auto& d = s.densities;
        for (std::size_t i = d.size(); i-- > 0;) {
          if (d[i] > 0.0) return s.frequencies[std::min(i + 1, d.size() - 1)];
        }
        return s.frequencies.back();
      }});
}

std::string PowerSpectrum::kind_name() const {
  return visit(Overloaded{[](const FlatTop&) { return std::string("flat_top"); },
                          [](const OneOverF2PlusWhite&) { return std::string("one_over_f2_plus_white"); },
                          [](const Tabulated&) { return std::string("tabulated"); }});
}

std::string PowerSpectrum::descriptor() const {
  std::ostringstream os;
  os.precision(17);
  visit(Overloaded{
      [&os](const FlatTop& s) {
        os << "flat_top(level_rad2_s=" << s.level << ",cutoff_rad_per_s=" << s.cutoff << ")";
      },
      [&os](const OneOverF2PlusWhite& s) {
        os << "one_over_f2_plus_white(coefficient=" << s.coefficient
           << ",white_level_rad2_s=" << s.white_level << ",upper_cutoff_rad_per_s=" << s.upper_cutoff
           << ")";
      },
      [&os](const Tabulated& s) { os << "tabulated(points=" << s.frequencies.size() << ")"; }});
  return os.str();
}

}  // namespace qpredict
