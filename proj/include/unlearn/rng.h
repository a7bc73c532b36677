// Copyright 2026 The Unlearn Lab Authors
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

#ifndef UNLEARN_RNG_H_
#define UNLEARN_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace unlearn {

using Rng = std::mt19937_64;

// Derives an independent stream seed from a base seed and a purpose tag, so
// that adding draws to one stream never shifts another.
std::uint64_t DeriveSeed(std::uint64_t base, std::string_view tag);
std::uint64_t DeriveSeed(std::uint64_t base, std::string_view tag,
                         std::uint64_t index);

// 64-bit FNV-1a.
std::uint64_t Fnv1a(std::string_view bytes);

}  // namespace unlearn

#endif  // UNLEARN_RNG_H_
