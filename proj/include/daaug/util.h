// Copyright 2026 The daaug Authors.
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

// Small shared helpers: digests, deterministic random streams, text
// normalization and file IO.

#ifndef DAAUG_UTIL_H_
#define DAAUG_UTIL_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace daaug {

// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

// 64-bit FNV-1a; used for feature hashing and stable orderings, never for
// anything that needs collision resistance.
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t seed = 14695981039346656037ull) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// SplitMix64 finalizer; mixes seeds for derived streams.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Deterministic random stream. Draws are built directly from the engine's
// 64-bit output so results do not depend on the standard library's
// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Uniform integer in [0, n); n > 0.
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n));
  }
  bool bernoulli(double p) { return uniform() < p; }
  // Index drawn proportionally to non-negative `weights` (sum > 0).
  std::size_t categorical(std::span<const double> weights);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[index(v.size())];
  }

 private:
  std::mt19937_64 engine_;
};

// Collapses runs of whitespace to one space and trims both ends.
std::string normalize_space(std::string_view text);
std::string to_lower(std::string_view text);
std::string_view trim(std::string_view text);
bool starts_with_ci(std::string_view text, std::string_view prefix);
std::vector<std::string> split_lines(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string read_file(const std::filesystem::path& path);
// Writes via a temporary file and rename so readers never see partial data.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

// Fixed-precision decimal rendering ("%.4f"), locale independent.
std::string format_fixed(double value, int precision);

// Sample mean and (n-1) standard deviation; std is 0 for fewer than 2 values.
std::pair<double, double> mean_and_sample_std(std::span<const double> values);

}  // namespace daaug

#endif  // DAAUG_UTIL_H_
