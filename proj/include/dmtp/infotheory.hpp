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

#ifndef DMTP_INFOTHEORY_HPP_
#define DMTP_INFOTHEORY_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "dmtp/common.hpp"

namespace dmtp
{

/// Finite joint probability table over named discrete variables. All
/// information quantities are exact summations over the table, in bits,
/// with the 0 log 0 = 0 convention.
class DiscreteDistribution
{
public:
  DiscreteDistribution(
    std::vector<std::string> names, std::vector<int> cardinalities, std::vector<double> probs)
  : names_(std::move(names)), card_(std::move(cardinalities)), p_(std::move(probs))
  {
    if (names_.size() != card_.size()) {
      throw InputError("distribution: names and cardinalities disagree");
    }
    std::int64_t total = 1;
    for (int c : card_) {
      if (c < 1) {
        throw InputError("distribution: cardinality must be >= 1");
      }
      total *= c;
    }
    if (static_cast<std::int64_t>(p_.size()) != total) {
      throw InputError(
        "distribution: table size " + std::to_string(p_.size()) + " does not match " +
        std::to_string(total));
    }
    double z = 0.0;
    for (double v : p_) {
      if (v < 0.0) {
        throw InputError("distribution: negative probability");
      }
      z += v;
    }
    if (std::abs(z - 1.0) > 1e-12) {
      throw InputError("distribution: probabilities sum to " + std::to_string(z) + ", not 1");
    }
  }

  const std::vector<std::string> & names() const { return names_; }
  int cardinality(const std::string & var) const { return card_[index_of(var)]; }

  /// Marginal entropy H(vars) in bits.
  double entropy(const std::vector<std::string> & vars) const
  {
    const std::vector<double> marg = marginal(vars);
    double h = 0.0;
    for (double v : marg) {
      if (v > 0.0) {
        h -= v * std::log2(v);
      }
    }
    return h;
  }

  /// H(Y | X) = H(Y, X) - H(X).
  double conditional_entropy(
    const std::vector<std::string> & y_vars, const std::vector<std::string> & x_vars) const
  {
    return entropy(join(y_vars, x_vars)) - entropy(x_vars);
  }

  /// I(X; Y) = H(X) + H(Y) - H(X, Y).
  double mutual_information(
    const std::vector<std::string> & x_vars, const std::vector<std::string> & y_vars) const
  {
    return entropy(x_vars) + entropy(y_vars) - entropy(join(x_vars, y_vars));
  }

  /// I(X; Y | Z) = H(X, Z) + H(Y, Z) - H(X, Y, Z) - H(Z).
  double conditional_mutual_information(
    const std::vector<std::string> & x_vars, const std::vector<std::string> & y_vars,
    const std::vector<std::string> & z_vars) const
  {
    if (z_vars.empty()) {
      return mutual_information(x_vars, y_vars);
    }
    return entropy(join(x_vars, z_vars)) + entropy(join(y_vars, z_vars)) -
           entropy(join(join(x_vars, y_vars), z_vars)) - entropy(z_vars);
  }

  /// Information gain of Y from X: H(Y) - H(Y | X). Equals I(X; Y).
  double info_gain(const std::string & y, const std::string & x) const
  {
    return entropy({y}) - conditional_entropy({y}, {x});
  }

  /// Relative feature importance: I(X_i; Y | X \ X_i).
  double rfi(const std::string & x_i, const std::string & y) const
  {
    return conditional_mutual_information({x_i}, {y}, rest_of(x_i, y));
  }

  /// Global feature importance: I(X_i; Y).
  double gfi(const std::string & x_i, const std::string & y) const
  {
    return mutual_information({x_i}, {y});
  }

  struct PointwiseResult
  {
    double bits = 0.0;
    bool zero_probability = false;  // conditioning instance unobserved
  };

  /// Scene feature importance at one instance: the pointwise conditional
  /// mutual-information contribution
  ///   log2 p(x_i, y | rest) / (p(x_i | rest) p(y | rest))
  /// evaluated at the given values. Zero-probability instances yield 0
  /// with the flag set.
  PointwiseResult sfi(
    const std::string & x_i, int x_value, const std::string & y, int y_value,
    const std::map<std::string, int> & rest_values) const
  {
    std::map<std::string, int> fixed_rest = rest_values;
    fixed_rest.erase(x_i);
    fixed_rest.erase(y);

    const double p_rest = prob_of(fixed_rest);
    if (p_rest <= 0.0) {
      return {0.0, true};
    }
    std::map<std::string, int> with_x = fixed_rest;
    with_x[x_i] = x_value;
    std::map<std::string, int> with_y = fixed_rest;
    with_y[y] = y_value;
    std::map<std::string, int> with_xy = with_x;
    with_xy[y] = y_value;

    const double p_x = prob_of(with_x) / p_rest;
    const double p_y = prob_of(with_y) / p_rest;
    const double p_xy = prob_of(with_xy) / p_rest;
    if (p_xy <= 0.0 || p_x <= 0.0 || p_y <= 0.0) {
      return {0.0, true};
    }
    return {std::log2(p_xy / (p_x * p_y)), false};
  }

  /// Marginal probability of a partial assignment.
  double prob_of(const std::map<std::string, int> & assignment) const
  {
    for (const auto & [var, val] : assignment) {
      const int c = card_[index_of(var)];
      if (val < 0 || val >= c) {
        throw InputError("distribution: value " + std::to_string(val) + " out of range for '" + var + "'");
      }
    }
    double total = 0.0;
    const std::int64_t n = static_cast<std::int64_t>(p_.size());
    for (std::int64_t idx = 0; idx < n; ++idx) {
      bool match = true;
      for (const auto & [var, val] : assignment) {
        if (value_at(idx, index_of(var)) != val) {
          match = false;
          break;
        }
      }
      if (match) {
        total += p_[static_cast<std::size_t>(idx)];
      }
    }
    return total;
  }

private:
  std::size_t index_of(const std::string & var) const
  {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i] == var) {
        return i;
      }
    }
    throw InputError("distribution: unknown variable '" + var + "'");
  }

  int value_at(std::int64_t flat, std::size_t var_idx) const
  {
    std::int64_t stride = 1;
    for (std::size_t i = names_.size(); i-- > var_idx + 1;) {
      stride *= card_[i];
    }
    return static_cast<int>((flat / stride) % card_[var_idx]);
  }

  std::vector<double> marginal(const std::vector<std::string> & vars) const
  {
    std::vector<std::size_t> idx;
    idx.reserve(vars.size());
    for (const std::string & v : vars) {
      idx.push_back(index_of(v));
    }
    std::int64_t bins = 1;
    for (std::size_t i : idx) {
      bins *= card_[i];
    }
    std::vector<double> out(static_cast<std::size_t>(bins), 0.0);
    const std::int64_t n = static_cast<std::int64_t>(p_.size());
    for (std::int64_t flat = 0; flat < n; ++flat) {
      std::int64_t bin = 0;
      for (std::size_t i : idx) {
        bin = bin * card_[i] + value_at(flat, i);
      }
      out[static_cast<std::size_t>(bin)] += p_[static_cast<std::size_t>(flat)];
    }
    return out;
  }

  std::vector<std::string> rest_of(const std::string & x_i, const std::string & y) const
  {
    index_of(x_i);
    index_of(y);
    std::vector<std::string> rest;
    for (const std::string & n : names_) {
      if (n != x_i && n != y) {
        rest.push_back(n);
      }
    }
    return rest;
  }

  static std::vector<std::string> join(
    const std::vector<std::string> & a, const std::vector<std::string> & b)
  {
    std::vector<std::string> out = a;
    for (const std::string & v : b) {
      if (std::find(out.begin(), out.end(), v) == out.end()) {
        out.push_back(v);
      }
    }
    return out;
  }

  std::vector<std::string> names_;
  std::vector<int> card_;
  std::vector<double> p_;
};

namespace tables
{

/// Fair coin: one binary variable.
inline DiscreteDistribution fair_coin()
{
  return DiscreteDistribution({"Y"}, {2}, {0.5, 0.5});
}

/// Y = X1 xor X2 with independent uniform bits.
inline DiscreteDistribution xor_gate()
{
  std::vector<double> p(8, 0.0);
  for (int x1 = 0; x1 < 2; ++x1) {
    for (int x2 = 0; x2 < 2; ++x2) {
      const int y = x1 ^ x2;
      p[static_cast<std::size_t>(x1 * 4 + x2 * 2 + y)] = 0.25;
    }
  }
  return DiscreteDistribution({"X1", "X2", "Y"}, {2, 2, 2}, std::move(p));
}

/// X2 is a copy of X1; Y is X1 observed through a 25% bit flip. X2 carries
/// the same marginal information as X1 and none beyond it.
inline DiscreteDistribution redundant_copy()
{
  std::vector<double> p(8, 0.0);
  for (int x1 = 0; x1 < 2; ++x1) {
    const int x2 = x1;
    for (int y = 0; y < 2; ++y) {
      const double py = (y == x1) ? 0.75 : 0.25;
      p[static_cast<std::size_t>(x1 * 4 + x2 * 2 + y)] = 0.5 * py;
    }
  }
  return DiscreteDistribution({"X1", "X2", "Y"}, {2, 2, 2}, std::move(p));
}

/// Independent X and Y, both uniform bits.
inline DiscreteDistribution independent_pair()
{
  return DiscreteDistribution({"X", "Y"}, {2, 2}, {0.25, 0.25, 0.25, 0.25});
}

/// Y equals X (uniform): the identity channel.
inline DiscreteDistribution identity_channel()
{
  return DiscreteDistribution({"X", "Y"}, {2, 2}, {0.5, 0.0, 0.0, 0.5});
}

}  // namespace tables

}  // namespace dmtp

#endif  // DMTP_INFOTHEORY_HPP_
