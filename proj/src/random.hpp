/*
 * Copyright 2026 The rdfl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RDFL_RANDOM_HPP_
#define RDFL_RANDOM_HPP_

#include <cstdint>
#include <random>

namespace rdfl {

using Rng = std::mt19937_64;

inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream seed for (seed, stream, index); every random draw in the
// library goes through one of these so results never depend on call order
// across streams.
inline std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream,
                                std::uint64_t index = 0) {
  return SplitMix64(SplitMix64(SplitMix64(seed) ^ stream) + index);
}

inline Rng MakeRng(std::uint64_t seed, std::uint64_t stream,
                   std::uint64_t index = 0) {
  return Rng(DeriveSeed(seed, stream, index));
}

// Stream tags.
enum : std::uint64_t {
  kStreamTask = 0x7461736b,          // class centers shared by all owners
  kStreamOwnerData = 0x6f776e72,     // per-owner sample pools
  kStreamValidation = 0x76616c69,    // held-out clean data
  kStreamSubsample = 0x73756273,     // per-owner transfer order
  kStreamMarket = 0x6d726b74,        // drawn qualities and sigmas
  kStreamBaseline = 0x62617365,      // random-payment baseline
};

}  // namespace rdfl

#endif  // RDFL_RANDOM_HPP_
