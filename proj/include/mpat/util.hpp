// Copyright 2026 The MPAT Authors
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace mpat {

using Tokens = std::vector<std::string>;

/// Engine used for every stochastic stage. Streams are derived with
/// derive_seed so that results never depend on evaluation order.
using Rng = std::mt19937_64;

std::uint64_t fnv1a64(std::string_view bytes);

/// Mixes a base seed with a string key and a numeric salt (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::string_view key, std::uint64_t salt = 0);

/// Uniform integer in [0, n). n must be positive.
std::size_t uniform_index(Rng& rng, std::size_t n);

std::string join(const Tokens& tokens, std::string_view sep = " ");
Tokens split(std::string_view text, char sep);
std::string trim(std::string_view text);

std::string read_file(const std::filesystem::path& path);

/// Writes via a temporary sibling file followed by rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string hex64(std::uint64_t value);

/// Shortest decimal representation that round-trips a double.
std::string format_double(double value);

}  // namespace mpat
