// Copyright 2026 The crowdplan Authors.
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

#ifndef CROWDPLAN_RNG_H_
#define CROWDPLAN_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>

namespace crowdplan {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a over the bytes of `text`.
constexpr std::uint64_t hash_string(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Counter-based generator: the stream is a pure function of the key, so any
// (seed, task, path, ...) tuple addresses its own reproducible stream
// regardless of evaluation order or thread count. Integer-only arithmetic up
// to the final 53-bit scaling keeps results identical across platforms.
class KeyedRng {
 public:
  KeyedRng(std::initializer_list<std::uint64_t> key) {
    std::uint64_t k = 0x243f6a8885a308d3ULL;
    for (std::uint64_t part : key) k = mix64(k ^ mix64(part));
    key_ = k;
  }

  std::uint64_t next() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Requires n > 0.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  // Draws an index from a probability vector (need not be exactly
  // normalized). Zero-probability entries are never returned.
  std::size_t categorical(std::span<const double> probs) {
    const double u = uniform();
    double total = 0.0;
    for (double p : probs) total += p;
    double cum = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] <= 0.0) continue;
      last_positive = i;
      cum += probs[i];
      if (u * total < cum) return i;
    }
    return last_positive;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace crowdplan

#endif  // CROWDPLAN_RNG_H_
