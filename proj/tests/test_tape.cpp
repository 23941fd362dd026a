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

#include <cmath>

#include "dmtp/rng.hpp"
#include "dmtp/tape.hpp"

using namespace dmtp;

namespace
{

Tensor random_tensor(std::vector<int> shape, Rng & rng, double lo = -1.0, double hi = 1.0)
{
  Tensor t = Tensor::zeros(std::move(shape));
  for (double & v : t.data) {
    v = rng.uniform(lo, hi);
  }
  return t;
}

}  // namespace

TEST_CASE("matmul identity and row-sum")
{
  Tape tape;
  Var eye = tape.constant(Tensor({2, 2}, {1, 0, 0, 1}));
  Var m = tape.constant(Tensor({2, 2}, {1, 2, 3, 4}));
  Var prod = matmul(eye, m);
  CHECK(prod.value().data == std::vector<double>{1, 2, 3, 4});

  Var row = tape.constant(Tensor({1, 3}, {1, 2, 3}));
  Var ones = tape.constant(Tensor({3, 1}, {1, 1, 1}));
  Var s = matmul(row, ones);
  CHECK(s.value().data[0] == 6.0);
}

TEST_CASE("matmul gradient equals b transposed, numerically")
{
  Rng rng(7);
  const Tensor a0 = random_tensor({3, 4}, rng);
  const Tensor b0 = random_tensor({4, 2}, rng);

  Tape tape;
  Tensor a_leaf = a0;
  a_leaf.requires_grad = true;
  Var a = tape.leaf(a_leaf);
  Var b = tape.constant(b0);
  tape.backward(sum_all(matmul(a, b)));
  const Tensor ga = tape.grad(a);

  // d sum(a.b) / d a[i, j] = sum_k b[j, k]
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 4; ++j) {
      double expect = 0.0;
      for (int k = 0; k < 2; ++k) {
        expect += b0.at(j, k);
      }
      CHECK_THAT(ga.at(i, j), Catch::Matchers::WithinAbs(expect, 1e-12));
    }
  }

  const double err = grad_check(
    [&](Tape & t, const Var & x) { return sum_all(matmul(x, t.constant(b0))); }, a0, 1e-5);
  CHECK(err < 1e-6);
}

TEST_CASE("matmul shape mismatch names both shapes")
{
  Tape tape;
  Var a = tape.constant(Tensor::zeros({2, 3}));
  Var b = tape.constant(Tensor::zeros({4, 5}));
  CHECK_THROWS_WITH(matmul(a, b), Catch::Matchers::ContainsSubstring("[2,3]") &&
                                    Catch::Matchers::ContainsSubstring("[4,5]"));
}

TEST_CASE("softmax uniform, closed form, shift invariance")
{
  Tape tape;
  Var z = tape.constant(Tensor({3}, {0, 0, 0}));
  const Tensor u = softmax(z, 0).value();
  for (double v : u.data) {
    CHECK_THAT(v, Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-15));
  }

  Var x = tape.constant(Tensor({2}, {0.0, std::log(2.0)}));
  const Tensor s = softmax(x, 0).value();
  CHECK_THAT(s.data[0], Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-15));
  CHECK_THAT(s.data[1], Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-15));

  Rng rng(3);
  const Tensor raw = random_tensor({5}, rng, -2.0, 2.0);
  Tensor shifted = raw;
  for (double & v : shifted.data) {
    v += 17.5;
  }
  const Tensor s1 = softmax(tape.constant(raw), 0).value();
  const Tensor s2 = softmax(tape.constant(shifted), 0).value();
  for (int i = 0; i < 5; ++i) {
    CHECK_THAT(s1.data[i], Catch::Matchers::WithinAbs(s2.data[i], 1e-12));
  }

  double total = 0.0;
  for (double v : s1.data) {
    total += v;
  }
  CHECK_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("backward basics")
{
  SECTION("d/dx x^2 at 3 is 6")
  {
    Tape tape;
    Tensor x0 = Tensor::scalar(3.0);
    x0.requires_grad = true;
    Var x = tape.leaf(x0);
    tape.backward(square(x));
    CHECK_THAT(tape.grad(x).data[0], Catch::Matchers::WithinAbs(6.0, 1e-12));
  }
  SECTION("d/dx sigmoid at 0 is 0.25")
  {
    Tape tape;
    Tensor x0 = Tensor::scalar(0.0);
    x0.requires_grad = true;
    Var x = tape.leaf(x0);
    tape.backward(sigmoid(x));
    CHECK_THAT(tape.grad(x).data[0], Catch::Matchers::WithinAbs(0.25, 1e-12));
  }
  SECTION("constant subgraph gets zero gradient")
  {
    Tape tape;
    Tensor x0 = Tensor::scalar(2.0);
    x0.requires_grad = true;
    Var x = tape.leaf(x0);
    Var c = tape.constant(Tensor({2}, {1.0, 4.0}));
    Var dead = sum_all(square(c));
    tape.backward(add(square(x), scale(dead, 0.0)));
    CHECK(tape.grad(c).data == std::vector<double>{0.0, 0.0});
    CHECK_THAT(tape.grad(x).data[0], Catch::Matchers::WithinAbs(4.0, 1e-12));
  }
  SECTION("non-scalar loss rejected")
  {
    Tape tape;
    Var v = tape.constant(Tensor({2}, {1, 2}));
    CHECK_THROWS_AS(tape.backward(v), ContractError);
  }
}

TEST_CASE("backward is bitwise deterministic")
{
  auto run = [](std::vector<double> * grads) {
    Rng rng(11);
    Tape tape;
    Tensor x0 = random_tensor({4, 3}, rng);
    x0.requires_grad = true;
    Var x = tape.leaf(x0);
    Var w = tape.constant(random_tensor({3, 3}, rng));
    Var y = layer_norm(dmtp::tanh(matmul(x, w)));
    tape.backward(mean_all(square(y)));
    *grads = tape.grad(x).data;
  };
  std::vector<double> g1;
  std::vector<double> g2;
  run(&g1);
  run(&g2);
  CHECK(g1 == g2);
}

TEST_CASE("grad_check on analytic oracles")
{
  Rng rng(5);
  SECTION("sum of squares: exact gradient 2x")
  {
    const Tensor x = random_tensor({6}, rng);
    const double err = grad_check(
      [](Tape &, const Var & v) { return sum_all(square(v)); }, x, 1e-5);
    CHECK(err < 1e-6);
  }
  SECTION("sum of softmax: analytic gradient zero")
  {
    const Tensor x = random_tensor({5}, rng, -2.0, 2.0);
    Tape tape;
    Tensor leaf = x;
    leaf.requires_grad = true;
    Var v = tape.leaf(leaf);
    tape.backward(sum_all(softmax(v, 0)));
    for (double g : tape.grad(v).data) {
      CHECK_THAT(g, Catch::Matchers::WithinAbs(0.0, 1e-12));
    }
    const double err = grad_check(
      [](Tape &, const Var & v2) { return sum_all(softmax(v2, 0)); }, x, 1e-5);
    CHECK(err < 1e-6);
  }
}

// Every registered operation passes a finite-difference check on 10 seeds.
// Inputs are kept away from the relu kink and the sqrt/log domain edges;
// those are genuine non-smooth points, not gradient bugs.
TEST_CASE("gradient suite over the full operation set")
{
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const Tensor m34 = random_tensor({3, 4}, rng);
    const Tensor m43 = random_tensor({4, 3}, rng);
    const Tensor v6 = random_tensor({6}, rng);
    Tensor pos = random_tensor({5}, rng, 0.5, 2.0);
    Tensor off_kink = random_tensor({6}, rng, 0.1, 1.0);
    for (std::size_t i = 0; i < off_kink.data.size(); ++i) {
      if (i % 2 == 0) {
        off_kink.data[i] = -off_kink.data[i];
      }
    }

    auto check = [&](const char * name, const std::function<Var(Tape &, const Var &)> & f,
                     const Tensor & x) {
      INFO(name << " seed " << seed);
      CHECK(grad_check(f, x, 1e-5) < 1e-4);
    };

    check("matmul", [&](Tape & t, const Var & x) { return sum_all(square(matmul(x, t.constant(m43)))); }, m34);
    check("add", [&](Tape & t, const Var & x) { return sum_all(square(add(x, t.constant(m34)))); }, m34);
    check("add_broadcast", [&](Tape & t, const Var & x) {
      return sum_all(square(add(t.constant(m34), slice(x, 0, 0, 4))));
    }, random_tensor({5}, rng));
    check("sub", [&](Tape & t, const Var & x) { return sum_all(square(sub(t.constant(m34), x))); }, m34);
    check("mul", [&](Tape & t, const Var & x) { return sum_all(square(mul(x, t.constant(m34)))); }, m34);
    check("div_scalar", [&](Tape &, const Var & x) { return sum_all(square(div_scalar(x, 3.7))); }, v6);
    check("concat", [&](Tape & t, const Var & x) {
      return sum_all(square(concat({x, t.constant(m34)}, 0)));
    }, m34);
    check("slice", [&](Tape &, const Var & x) { return sum_all(square(slice(x, 1, 1, 2))); }, m34);
    check("gather", [&](Tape &, const Var & x) {
      return sum_all(square(gather_rows(x, {2, 0, 2})));
    }, m34);
    check("transpose", [&](Tape & t, const Var & x) {
      return sum_all(square(matmul(transpose(x), t.constant(m34))));
    }, m34);
    check("sum_axis", [&](Tape &, const Var & x) { return sum_all(square(sum(x, 1))); }, m34);
    check("mean_axis", [&](Tape &, const Var & x) { return sum_all(square(mean(x, 0))); }, m34);
    check("softmax", [&](Tape &, const Var & x) {
      return sum_all(square(softmax(x, 1)));
    }, m34);
    check("sigmoid", [&](Tape &, const Var & x) { return sum_all(square(sigmoid(x))); }, v6);
    check("tanh", [&](Tape &, const Var & x) { return sum_all(square(dmtp::tanh(x))); }, v6);
    check("relu", [&](Tape &, const Var & x) { return sum_all(square(relu(x))); }, off_kink);
    check("layer_norm", [&](Tape &, const Var & x) {
      return sum_all(square(layer_norm(x)));
    }, m34);
    check("embedding", [&](Tape &, const Var & x) {
      return sum_all(square(embedding(x, {1, 1, 3})));
    }, m43);
    check("sqrt", [&](Tape &, const Var & x) { return sum_all(square(dmtp::sqrt(x))); }, pos);
    check("log", [&](Tape &, const Var & x) { return sum_all(square(dmtp::log(x))); }, pos);

    const BSplineGrid grid = BSplineGrid::uniform(8, 3, -3.0, 3.0);
    check("spline_basis", [&](Tape &, const Var & x) {
      return sum_all(square(spline_basis(x, grid)));
    }, random_tensor({7}, rng, -2.5, 2.5));
  }
}

TEST_CASE("b-spline basis partitions unity inside the grid")
{
  for (int order = 1; order <= 4; ++order) {
    const BSplineGrid grid = BSplineGrid::uniform(10, order, -3.0, 3.0);
    for (int i = 0; i <= 60; ++i) {
      const double x = -3.0 + 0.1 * i;
      std::vector<double> row(static_cast<std::size_t>(grid.num_basis()));
      grid.basis_row(x, row.data());
      double total = 0.0;
      for (double v : row) {
        CHECK(v >= -1e-12);
        total += v;
      }
      INFO("order " << order << " x " << x);
      CHECK_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
  }
}

TEST_CASE("spline basis clamps out-of-range inputs and counts them")
{
  const BSplineGrid grid = BSplineGrid::uniform(8, 3, -3.0, 3.0);
  Tape tape;
  Var x = tape.constant(Tensor({3}, {-5.0, 0.0, 4.0}));
  Var b = spline_basis(x, grid);
  CHECK(tape.spline_clamp_count == 2);

  std::vector<double> at_edge(static_cast<std::size_t>(grid.num_basis()));
  grid.basis_row(-3.0, at_edge.data());
  for (int m = 0; m < grid.num_basis(); ++m) {
    CHECK_THAT(b.value().at(0, m), Catch::Matchers::WithinAbs(at_edge[static_cast<std::size_t>(m)], 1e-15));
  }
}

TEST_CASE("layer_norm output is normalized per row")
{
  Rng rng(9);
  Tape tape;
  const Tensor x = random_tensor({4, 8}, rng, -3.0, 3.0);
  const Tensor y = layer_norm(tape.constant(x)).value();
  for (int r = 0; r < 4; ++r) {
    double mu = 0.0;
    for (int j = 0; j < 8; ++j) {
      mu += y.at(r, j);
    }
    CHECK_THAT(mu / 8.0, Catch::Matchers::WithinAbs(0.0, 1e-12));
  }
}
