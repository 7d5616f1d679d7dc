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

#ifndef SMN_SYNTHETIC_HPP_
#define SMN_SYNTHETIC_HPP_

// Template-driven toy corpora. Every sample is filler statements around one
// key statement, and the summary is a function of the key statement alone.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smn/corpus.hpp"

namespace smn {

struct SummaryTemplate {
  std::string name;
  std::string code;     // space separated tokens, "{slot}" substituted
  std::string summary;  // likewise
};

struct SyntheticSpec {
  std::size_t projects = 10;
  std::size_t samples_per_project = 20;
  std::size_t min_statements = 4;
  std::size_t max_statements = 8;
  // Each project draws this many names from filler_vars.
  std::size_t vars_per_project = 4;
  std::vector<SummaryTemplate> templates;
  std::vector<std::string> slot_words;
  std::vector<std::string> filler_statements;  // "{var}" and "{num}" substituted
  std::vector<std::string> filler_vars;

  // Throws ConfigError if the grammar cannot produce a sample.
  void validate() const;
};

SyntheticSpec default_synthetic_spec();

// Keys missing from the object keep their default_synthetic_spec() value;
// unknown keys throw ConfigError.
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SyntheticSpec& spec);

// Ids are "p003_s0004"-style. The key statement is never first or last when
// the function has three or more statements.
std::vector<Sample> generate_synthetic_corpus(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace smn

#endif  // SMN_SYNTHETIC_HPP_
