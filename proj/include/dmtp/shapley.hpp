// Copyright 2026 The DMTP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DMTP_SHAPLEY_HPP_
#define DMTP_SHAPLEY_HPP_

#include <array>
#include <bitset>
#include <cstdint>
#include <string>

#include "dmtp/common.hpp"

namespace dmtp
{

/// The four feature groups the explainability engine attributes error to.
/// Canonical order is fixed; it defines coalition bit positions and the
/// h, n, s, m column order of report CSVs.
enum class FeatureGroup : int {
  kHistory = 0,
  kNeighbors = 1,
  kTrafficSign = 2,
  kMap = 3,
};

inline constexpr int kNumFeatureGroups = 4;
inline constexpr int kNumCoalitions = 16;

inline const char * to_string(FeatureGroup g)
{
  switch (g) {
    case FeatureGroup::kHistory: return "history";
    case FeatureGroup::kNeighbors: return "neighbors";
    case FeatureGroup::kTrafficSign: return "traffic_sign";
    default: return "map";
  }
}

/// Subset of the four feature groups, as a 4-bit mask.
struct Coalition
{
  std::uint8_t bits = 0;

  static Coalition empty() { return {0}; }
  static Coalition full() { return {0b1111}; }
  static Coalition of(FeatureGroup g) { return {static_cast<std::uint8_t>(1u << static_cast<int>(g))}; }

  bool contains(FeatureGroup g) const { return (bits >> static_cast<int>(g)) & 1u; }
  int size() const { return std::bitset<8>(bits).count(); }

  Coalition with(FeatureGroup g) const
  {
    return {static_cast<std::uint8_t>(bits | (1u << static_cast<int>(g)))};
  }
  Coalition without(FeatureGroup g) const
  {
    return {static_cast<std::uint8_t>(bits & ~(1u << static_cast<int>(g)))};
  }

  bool operator==(const Coalition &) const = default;

  std::string label() const
  {
    if (bits == 0) {
      return "none";
    }
    std::string s;
    const char tags[] = {'h', 'n', 's', 'm'};
    for (int g = 0; g < kNumFeatureGroups; ++g) {
      if ((bits >> g) & 1u) {
        s += tags[g];
      }
    }
    return s;
  }
};

/// Value function over all 16 coalitions of the four groups.
class CoalitionValues
{
public:
  void set(Coalition c, double v)
  {
    values_[c.bits] = v;
    present_.set(c.bits);
  }

  double at(Coalition c) const
  {
    if (!present_.test(c.bits)) {
      throw InputError("coalition table: missing value for coalition '" + c.label() + "'");
    }
    return values_[c.bits];
  }

  bool complete() const { return present_.all(); }

private:
  std::array<double, kNumCoalitions> values_{};
  std::bitset<kNumCoalitions> present_;
};

/// Exact Shapley value of the 4-player game: the weighted average marginal
/// contribution over coalitions, with weights |C|! (4-|C|-1)! / 4!
/// (1/4, 1/12, 1/12, 1/4 for |C| = 0..3). The result satisfies the
/// efficiency, symmetry, dummy and additivity axioms by construction.
inline std::array<double, kNumFeatureGroups> exact_shapley(const CoalitionValues & v)
{
  constexpr std::array<double, kNumFeatureGroups> kWeight = {
    1.0 / 4.0, 1.0 / 12.0, 1.0 / 12.0, 1.0 / 4.0};

  std::array<double, kNumFeatureGroups> phi{};
  for (int g = 0; g < kNumFeatureGroups; ++g) {
    const auto group = static_cast<FeatureGroup>(g);
    double total = 0.0;
    for (int mask = 0; mask < kNumCoalitions; ++mask) {
      Coalition c{static_cast<std::uint8_t>(mask)};
      if (c.contains(group)) {
        continue;
      }
      total += kWeight[static_cast<std::size_t>(c.size())] * (v.at(c.with(group)) - v.at(c));
    }
    phi[static_cast<std::size_t>(g)] = total;
  }
  return phi;
}

}  // namespace dmtp

#endif  // DMTP_SHAPLEY_HPP_
