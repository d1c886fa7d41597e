// Copyright 2026 The tspd Authors
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "tspd/parameters.hpp"

namespace tspd::nn {

/// Parameters plus string metadata. `config` entries feed the config hash;
/// `info` entries (epoch, validation cost, ...) do not.
struct Checkpoint {
  std::map<std::string, std::string> config;
  std::map<std::string, std::string> info;
  ParameterSet params;
};

/// FNV-1a 64 over "key=value\n" lines in key order.
std::uint64_t config_hash(const std::map<std::string, std::string>& config);

/// Layout:
///   TSPD1
///   config <key> <value>      (one per entry)
///   config_hash <16 hex>
///   info <key> <value>
///   dtype f64
///   tensors <count>
///   <name> <rows> <cols>      (one per tensor)
///   data
/// followed by the raw little-endian values of every tensor in manifest order.
void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
/// Throws LoadError for a bad magic, hash mismatch, or truncated data.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tspd::nn
