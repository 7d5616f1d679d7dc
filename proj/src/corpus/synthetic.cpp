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

#include "smn/synthetic.hpp"

#include <algorithm>
#include <cstdio>

#include "smn/error.hpp"
#include "smn/random.hpp"

namespace smn {
namespace {

std::string substitute(const std::string& text, const std::string& key, const std::string& value) {
  std::string out = text;
  for (std::size_t pos = out.find(key); pos != std::string::npos;
       pos = out.find(key, pos + value.size())) {
    out.replace(pos, key.size(), value);
  }
  return out;
}

void append_statement(std::vector<std::string>& code, const std::string& statement) {
  for (std::string& t : split_tokens(statement)) code.push_back(std::move(t));
  code.emplace_back(kNewlineToken);
}

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic spec key '") + key + "': " + e.what());
  }
}

}  // namespace

void SyntheticSpec::validate() const {
  if (projects == 0 || samples_per_project == 0) {
    throw ConfigError("synthetic spec needs at least one project and one sample per project");
  }
  if (min_statements == 0 || min_statements > max_statements) {
    throw ConfigError("synthetic spec needs 1 <= min_statements <= max_statements");
  }
  if (templates.empty() || slot_words.empty()) {
    throw ConfigError("synthetic spec needs templates and slot words");
  }
  if (min_statements > 1 && filler_statements.empty()) {
    throw ConfigError("synthetic spec needs filler statements when functions have several lines");
  }
  if (vars_per_project == 0 || vars_per_project > filler_vars.size()) {
    throw ConfigError("vars_per_project must be in [1, filler_vars.size()]");
  }
  for (const SummaryTemplate& t : templates) {
    if (split_tokens(t.code).empty() || split_tokens(t.summary).empty()) {
      throw ConfigError("template '" + t.name + "' has empty code or summary");
    }
  }
}

SyntheticSpec default_synthetic_spec() {
  SyntheticSpec spec;
  spec.templates = {
      {"getter", "return this . {slot} ;", "returns the {slot}"},
      {"setter", "this . {slot} = value ;", "sets the {slot}"},
      {"add", "{slot} . add ( item ) ;", "adds an item to the {slot}"},
      {"remove", "{slot} . remove ( item ) ;", "removes an item from the {slot}"},
      {"null_check", "if ( {slot} == null ) return false ;", "checks whether the {slot} is set"},
      {"print", "System . out . println ( {slot} ) ;", "prints the {slot}"},
      {"clear", "{slot} . clear ( ) ;", "clears the {slot}"},
      {"compute", "total = compute ( {slot} ) ;", "computes the total of the {slot}"},
  };
  spec.slot_words = {"name",   "count", "buffer", "list",  "size",   "index", "value", "queue",
                     "config", "cache", "status", "owner", "parent", "width", "height", "label"};
  spec.filler_statements = {
      "int {var} = {num} ;",
      "{var} ++ ;",
      "log . debug ( {var} ) ;",
      "{var} = {var} + {num} ;",
      "if ( {var} > {num} ) {var} = 0 ;",
      "assert {var} >= 0 ;",
  };
  spec.filler_vars = {"i", "j", "k", "n", "tmp", "acc", "pos", "idx", "cnt", "off", "len", "res"};
  return spec;
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("synthetic spec must be a JSON object");
  static const char* const kKeys[] = {"projects",          "samples_per_project", "min_statements",
                                      "max_statements",    "vars_per_project",    "templates",
                                      "slot_words",        "filler_statements",   "filler_vars"};
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(std::begin(kKeys), std::end(kKeys),
                     [&](const char* k) { return key == k; }) == std::end(kKeys)) {
      throw ConfigError("unknown synthetic spec key '" + key + "'");
    }
  }
  SyntheticSpec spec = default_synthetic_spec();
  read_key(j, "projects", spec.projects);
  read_key(j, "samples_per_project", spec.samples_per_project);
  read_key(j, "min_statements", spec.min_statements);
  read_key(j, "max_statements", spec.max_statements);
  read_key(j, "vars_per_project", spec.vars_per_project);
  read_key(j, "slot_words", spec.slot_words);
  read_key(j, "filler_statements", spec.filler_statements);
  read_key(j, "filler_vars", spec.filler_vars);
  if (j.contains("templates")) {
    const nlohmann::json& arr = j.at("templates");
    if (!arr.is_array()) throw ConfigError("synthetic spec 'templates' must be an array");
    spec.templates.clear();
    for (const nlohmann::json& t : arr) {
      SummaryTemplate tmpl;
      read_key(t, "name", tmpl.name);
      read_key(t, "code", tmpl.code);
      read_key(t, "summary", tmpl.summary);
      spec.templates.push_back(std::move(tmpl));
    }
  }
  spec.validate();
  return spec;
}

nlohmann::json to_json(const SyntheticSpec& spec) {
  nlohmann::json templates = nlohmann::json::array();
  for (const SummaryTemplate& t : spec.templates) {
    templates.push_back({{"name", t.name}, {"code", t.code}, {"summary", t.summary}});
  }
  return {{"projects", spec.projects},
          {"samples_per_project", spec.samples_per_project},
          {"min_statements", spec.min_statements},
          {"max_statements", spec.max_statements},
          {"vars_per_project", spec.vars_per_project},
          {"templates", templates},
          {"slot_words", spec.slot_words},
          {"filler_statements", spec.filler_statements},
          {"filler_vars", spec.filler_vars}};
}

std::vector<Sample> generate_synthetic_corpus(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  std::vector<Sample> samples;
  samples.reserve(spec.projects * spec.samples_per_project);
  char id[48];
  for (std::size_t p = 0; p < spec.projects; ++p) {
    std::vector<std::string> vars = spec.filler_vars;
    rng.shuffle(std::span<std::string>(vars));
    vars.resize(spec.vars_per_project);
    std::snprintf(id, sizeof(id), "p%03zu", p);
    const std::string project_id = id;

    for (std::size_t s = 0; s < spec.samples_per_project; ++s) {
      const std::size_t count =
          spec.min_statements + rng.index(spec.max_statements - spec.min_statements + 1);
      const std::size_t key = count >= 3 ? 1 + rng.index(count - 2) : rng.index(count);
      const SummaryTemplate& tmpl = spec.templates[rng.index(spec.templates.size())];
      const std::string& slot = spec.slot_words[rng.index(spec.slot_words.size())];

      Sample sample;
      std::snprintf(id, sizeof(id), "p%03zu_s%04zu", p, s);
      sample.sample_id = id;
      sample.project_id = project_id;
      for (std::size_t line = 0; line < count; ++line) {
        if (line == key) {
          append_statement(sample.code_tokens, substitute(tmpl.code, "{slot}", slot));
          continue;
        }
        std::string filler = spec.filler_statements[rng.index(spec.filler_statements.size())];
        // Each placeholder occurrence draws independently.
        for (const std::string key_name : {"{var}", "{num}"}) {
          for (std::size_t pos = filler.find(key_name); pos != std::string::npos;
               pos = filler.find(key_name, pos)) {
            const std::string value = key_name == "{var}" ? vars[rng.index(vars.size())]
                                                          : std::to_string(rng.index(10));
            filler.replace(pos, key_name.size(), value);
            pos += value.size();
          }
        }
        append_statement(sample.code_tokens, filler);
      }
      sample.summary_tokens = split_tokens(substitute(tmpl.summary, "{slot}", slot));
      samples.push_back(std::move(sample));
    }
  }
  return samples;
}

}  // namespace smn
