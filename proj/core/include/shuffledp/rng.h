// Copyright 2026 The ShuffleDP Authors.
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

#ifndef SHUFFLEDP_RNG_H_
#define SHUFFLEDP_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace shuffledp {

// All randomness flows through this engine. Streams are derived from a root
// seed and a stream index so that results do not depend on execution order.
using Rng = std::mt19937_64;

// SplitMix64 finalizer. Also used as a keyed hash for public-coin mappings.
uint64_t Mix64(uint64_t x);

// Seed of stream `index` under `root`.
uint64_t StreamSeed(uint64_t root, uint64_t index);

// Engine for stream `index` under `root`.
Rng StreamRng(uint64_t root, uint64_t index);

// Stable 64-bit hash of an opaque byte string (FNV-1a followed by Mix64).
uint64_t HashBytes(std::string_view bytes);

// Uniform double in [0, 1).
double UniformDouble(Rng& rng);

// Uniform integer in [0, bound). Requires bound > 0.
uint64_t UniformIndex(Rng& rng, uint64_t bound);

}  // namespace shuffledp

#endif  // SHUFFLEDP_RNG_H_
