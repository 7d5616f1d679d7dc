/* Copyright 2026 The SMN Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef SMN_CHECKPOINT_HPP_
#define SMN_CHECKPOINT_HPP_

// Checkpoint container:
//
//   SMNCKPT 1\n
//   config <canonical JSON on one line>\n
//   seed <u64>\n
//   params <count>\n
//   <name> <shape, e.g. 3x4, or "scalar"> <byte offset> <element count>\n   (count lines)
//   data <byte length>\n
//   <raw little-endian IEEE-754 f64 values, parameters in manifest order>
//
// Offsets are relative to the first byte after the "data" line. Parameters are
// written in lexicographic name order.

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "smn/parameters.hpp"

namespace smn {

struct Checkpoint {
  nlohmann::json config;
  ParameterSet params;
};

std::string serialize_checkpoint(const nlohmann::json& config, const ParameterSet& params);
Checkpoint parse_checkpoint(const std::string& bytes, const std::string& origin = "<memory>");

void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& config,
                     const ParameterSet& params);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace smn

#endif  // SMN_CHECKPOINT_HPP_
