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

#include <catch2/catch_amalgamated.hpp>

#include "dmtp/infotheory.hpp"
#include "dmtp/rng.hpp"

using namespace dmtp;
using Catch::Matchers::WithinAbs;

TEST_CASE("fair coin has one bit of entropy")
{
  CHECK_THAT(tables::fair_coin().entropy({"Y"}), WithinAbs(1.0, 1e-15));
}

TEST_CASE("independent variables share no information")
{
  const auto d = tables::independent_pair();
  CHECK_THAT(d.mutual_information({"X"}, {"Y"}), WithinAbs(0.0, 1e-15));
  CHECK_THAT(d.info_gain("Y", "X"), WithinAbs(0.0, 1e-15));
}

TEST_CASE("xor example: marginal zero, conditional one bit")
{
  const auto d = tables::xor_gate();
  CHECK_THAT(d.mutual_information({"X1"}, {"Y"}), WithinAbs(0.0, 1e-12));
  CHECK_THAT(d.conditional_mutual_information({"X1"}, {"Y"}, {"X2"}), WithinAbs(1.0, 1e-12));
  CHECK_THAT(d.mutual_information({"X1", "X2"}, {"Y"}), WithinAbs(1.0, 1e-12));
}

TEST_CASE("chain rule holds exactly on the test tables")
{
  // I(X1, X2; Y) = I(X1; Y) + I(X2; Y | X1), checked over a corpus of
  // random three-variable tables plus the built-ins.
  auto check_chain = [](const DiscreteDistribution & d) {
    const double joint = d.mutual_information({"X1", "X2"}, {"Y"});
    const double chained = d.mutual_information({"X1"}, {"Y"}) +
                           d.conditional_mutual_information({"X2"}, {"Y"}, {"X1"});
    CHECK_THAT(joint, WithinAbs(chained, 1e-12));
  };
  check_chain(tables::xor_gate());
  check_chain(tables::redundant_copy());

  Rng rng(42);
  for (int round = 0; round < 50; ++round) {
    std::vector<double> p(8);
    double z = 0.0;
    for (double & v : p) {
      v = rng.uniform();
      z += v;
    }
    for (double & v : p) {
      v /= z;
    }
    // Renormalize exactly enough for the 1e-12 constructor gate.
    double z2 = 0.0;
    for (double v : p) {
      z2 += v;
    }
    p[0] += 1.0 - z2;
    check_chain(DiscreteDistribution({"X1", "X2", "Y"}, {2, 2, 2}, p));
  }
}

TEST_CASE("information gain equals mutual information")
{
  const auto d = tables::redundant_copy();
  CHECK_THAT(d.info_gain("Y", "X1"), WithinAbs(d.mutual_information({"X1"}, {"Y"}), 1e-12));
  CHECK_THAT(d.info_gain("Y", "X2"), WithinAbs(d.mutual_information({"X2"}, {"Y"}), 1e-12));
}

TEST_CASE("redundant copy: RFI vanishes while GFI matches the original")
{
  const auto d = tables::redundant_copy();
  CHECK_THAT(d.rfi("X2", "Y"), WithinAbs(0.0, 1e-12));
  const double g1 = d.gfi("X1", "Y");
  const double g2 = d.gfi("X2", "Y");
  CHECK(g1 > 0.0);
  CHECK_THAT(g2, WithinAbs(g1, 1e-12));
}

TEST_CASE("deterministic identity: GFI equals the target entropy")
{
  const auto d = tables::identity_channel();
  CHECK_THAT(d.gfi("X", "Y"), WithinAbs(d.entropy({"Y"}), 1e-12));
  CHECK_THAT(d.entropy({"Y"}), WithinAbs(1.0, 1e-15));
}

TEST_CASE("conditional independence gives zero RFI")
{
  // Y depends only on X1; X2 is independent noise.
  std::vector<double> p(8, 0.0);
  for (int x1 = 0; x1 < 2; ++x1) {
    for (int x2 = 0; x2 < 2; ++x2) {
      for (int y = 0; y < 2; ++y) {
        const double py = (y == x1) ? 0.9 : 0.1;
        p[static_cast<std::size_t>(x1 * 4 + x2 * 2 + y)] = 0.25 * py;
      }
    }
  }
  const DiscreteDistribution d({"X1", "X2", "Y"}, {2, 2, 2}, p);
  CHECK_THAT(d.rfi("X2", "Y"), WithinAbs(0.0, 1e-12));
  CHECK(d.rfi("X1", "Y") > 0.0);
}

TEST_CASE("pointwise scene importance")
{
  const auto d = tables::xor_gate();
  // Given X2 = 0, observing X1 = 1 pins Y = 1: one full bit at this instance.
  const auto r = d.sfi("X1", 1, "Y", 1, {{"X2", 0}});
  CHECK_FALSE(r.zero_probability);
  CHECK_THAT(r.bits, WithinAbs(1.0, 1e-12));

  // Impossible instance (Y = 0 with X1 = 1, X2 = 0) is flagged.
  const auto z = d.sfi("X1", 1, "Y", 0, {{"X2", 0}});
  CHECK(z.zero_probability);
  CHECK(z.bits == 0.0);
}

TEST_CASE("input validation")
{
  CHECK_THROWS_AS(DiscreteDistribution({"A"}, {2}, {0.6, 0.6}), InputError);
  CHECK_THROWS_AS(DiscreteDistribution({"A"}, {2}, {1.2, -0.2}), InputError);
  const auto d = tables::fair_coin();
  CHECK_THROWS_AS(d.entropy({"nope"}), InputError);
}
