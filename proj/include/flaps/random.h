// Copyright 2026 The FLaPS Simulator Authors
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

#ifndef FLAPS_RANDOM_H_
#define FLAPS_RANDOM_H_

#include <cstdint>
#include <random>

namespace flaps {

using Rng = std::mt19937_64;

// Independent stream tags. Every consumer of randomness derives its own
// engine from (seed, tag, index) so that draws in one place never shift the
// sequence seen by another.
enum class Stream : std::uint64_t {
  kPartition = 1,
  kSplit,
  kBudget,
  kKMeans,
  kDataShuffle,
  kWeightShuffle,
  kTrain,
  kInit,
  kDrop,
  kLatency,
  kRestart,
  kSynthetic,
};

// SplitMix64 finalizer.
constexpr std::uint64_t MixBits(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t DeriveSeed(std::uint64_t seed, Stream stream,
                                   std::uint64_t index = 0) {
  return MixBits(MixBits(seed ^ MixBits(static_cast<std::uint64_t>(stream))) +
                 index);
}

inline Rng MakeRng(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  return Rng(DeriveSeed(seed, stream, index));
}

}  // namespace flaps

#endif  // FLAPS_RANDOM_H_
