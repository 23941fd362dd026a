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

#ifndef DMTP_RNG_HPP_
#define DMTP_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

#include "dmtp/common.hpp"

namespace dmtp
{

/// Deterministic random source. The standard <random> distributions are
/// implementation-defined, so uniform and normal draws are derived from the
/// raw mt19937_64 stream directly; identical seeds give identical sequences
/// on every platform.
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : gen_(mix64(seed)), lineage_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform draw in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Integer in [0, n), unbiased via widening multiply.
  std::uint64_t below(std::uint64_t n)
  {
    const unsigned __int128 wide = static_cast<unsigned __int128>(gen_()) * n;
    return static_cast<std::uint64_t>(wide >> 64);
  }

  int below_int(int n) { return static_cast<int>(below(static_cast<std::uint64_t>(n))); }

  /// Standard normal draw (Box-Muller, cached spare).
  double normal()
  {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) {
      u1 = uniform();
    }
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Independent stream keyed by this rng's seed and `stream`. Forking does
  /// not consume draws from the parent.
  Rng fork(std::uint64_t stream) const { return Rng(mix_seed(lineage_, stream)); }

private:
  std::mt19937_64 gen_;
  std::uint64_t lineage_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dmtp

#endif  // DMTP_RNG_HPP_
