// Copyright 2026 The OpsArena Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OPSARENA_HASHING_H_
#define OPSARENA_HASHING_H_

#include <cstdint>
#include <string>
#include <string_view>

namespace opsarena {

// FNV-1a; stable across platforms and runs, unlike std::hash.
constexpr uint64_t Fnv1a64(std::string_view data,
                           uint64_t basis = 0xcbf29ce484222325ULL) {
  uint64_t h = basis;
  for (char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr uint64_t MixKeys(uint64_t a, uint64_t b) {
  return SplitMix64(a ^ SplitMix64(b));
}

// Uniform double in [0, 1) from the top 53 bits.
constexpr double ToUnitInterval(uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Splittable counter-based generator. A stream is identified by its key;
// Split() derives an independent child stream, and Bits(i) is a pure function
// of (key, i), so any draw can be reproduced without replaying the sequence.
class SeededStream {
 public:
  explicit constexpr SeededStream(uint64_t seed) : key_(SplitMix64(seed)) {}

  constexpr SeededStream Split(uint64_t label) const {
    return SeededStream(MixKeys(key_, label), /*raw=*/true);
  }
  SeededStream Split(std::string_view label) const {
    return Split(Fnv1a64(label));
  }

  constexpr uint64_t Bits(uint64_t index) const {
    return MixKeys(key_, index + 0x632be59bd9b4e019ULL);
  }
  constexpr double Unit(uint64_t index) const {
    return ToUnitInterval(Bits(index));
  }
  constexpr uint64_t key() const { return key_; }

 private:
  constexpr SeededStream(uint64_t key, bool) : key_(key) {}
  uint64_t key_;
};

// Sequential generator over a SeededStream, for policies that just need
// "the next number".
class SeededSequence {
 public:
  explicit SeededSequence(uint64_t seed) : stream_(seed) {}
  uint64_t Next() { return stream_.Bits(counter_++); }
  // Uniform in [0, n); n must be > 0. Modulo bias is below 2^-40 for the
  // small n used by agent policies.
  uint64_t Below(uint64_t n) { return Next() % n; }
  double Unit() { return ToUnitInterval(Next()); }

 private:
  SeededStream stream_;
  uint64_t counter_ = 0;
};

std::string HexDigits(uint64_t value, int width);

}  // namespace opsarena

#endif  // OPSARENA_HASHING_H_
