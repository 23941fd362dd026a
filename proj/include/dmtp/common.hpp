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

#ifndef DMTP_COMMON_HPP_
#define DMTP_COMMON_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dmtp
{

inline constexpr const char * kToolVersion = "0.1.0";

struct Error : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

/// Tensor shape disagreement; message names both shapes.
struct ShapeError : Error
{
  using Error::Error;
};

/// Violated operation precondition (e.g. non-scalar loss passed to backward).
struct ContractError : Error
{
  using Error::Error;
};

/// Invalid configuration value.
struct ConfigError : Error
{
  using Error::Error;
};

/// Malformed persisted data; message carries the field path.
struct ParseError : Error
{
  using Error::Error;
};

/// Filesystem failure (missing file, unwritable path).
struct IoError : Error
{
  using Error::Error;
};

/// Checkpoint could not be restored.
struct LoadError : Error
{
  using Error::Error;
};

/// Training aborted; message names the offending loss component.
struct TrainError : Error
{
  using Error::Error;
};

/// Bad input to an analysis routine (e.g. incomplete coalition table).
struct InputError : Error
{
  using Error::Error;
};

/// A scene that cannot be scored (e.g. no valid future step).
struct MetricError : Error
{
  using Error::Error;
};

inline std::uint64_t fnv1a(const std::string & s)
{
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// 64-bit mix used to derive independent seed streams.
inline std::uint64_t mix64(std::uint64_t z)
{
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b)
{
  return mix64(a ^ mix64(b));
}

/// Writes `content` to `path` atomically (temp file + rename).
inline void atomic_write(const std::filesystem::path & path, const std::string & content)
{
  namespace fs = std::filesystem;
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("io error: cannot open for writing: " + tmp.string());
    }
    out << content;
    if (!out) {
      throw IoError("io error: short write: " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    throw IoError("io error: rename failed for " + path.string() + ": " + ec.message());
  }
}

inline std::string read_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("io error: cannot open: " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace dmtp

#endif  // DMTP_COMMON_HPP_
