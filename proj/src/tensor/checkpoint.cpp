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

#include "smn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "smn/error.hpp"
#include "smn/io.hpp"

namespace smn {
namespace {

constexpr const char* kMagic = "SMNCKPT 1";

void append_le(std::string& out, double value) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(value);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>(bits & 0xffu));
    bits >>= 8;
  }
}

double read_le(const char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | static_cast<unsigned char>(p[i]);
  return std::bit_cast<double>(bits);
}

std::string shape_token(const Shape& shape) {
  if (shape.empty()) return "scalar";
  std::string s;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) s += 'x';
    s += std::to_string(shape[i]);
  }
  return s;
}

Shape parse_shape(const std::string& token, const std::string& origin) {
  if (token == "scalar") return {};
  Shape shape;
  std::stringstream in(token);
  std::string part;
  while (std::getline(in, part, 'x')) {
    try {
      std::size_t used = 0;
      shape.push_back(std::stoull(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw DataError(origin + ": bad shape '" + token + "'");
    }
  }
  return shape;
}

}  // namespace

std::string serialize_checkpoint(const nlohmann::json& config, const ParameterSet& params) {
  std::string header;
  header += kMagic;
  header += '\n';
  header += "config " + config.dump() + "\n";
  header += "seed " + std::to_string(params.seed()) + "\n";
  header += "params " + std::to_string(params.size()) + "\n";
  std::size_t offset = 0;
  for (const auto& [name, t] : params) {
    header += name + " " + shape_token(t.shape()) + " " + std::to_string(offset) + " " +
              std::to_string(t.size()) + "\n";
    offset += t.size() * sizeof(double);
  }
  header += "data " + std::to_string(offset) + "\n";
  std::string out = std::move(header);
  out.reserve(out.size() + offset);
  for (const auto& [name, t] : params) {
    for (double v : t.data()) append_le(out, v);
  }
  return out;
}

Checkpoint parse_checkpoint(const std::string& bytes, const std::string& origin) {
  std::size_t pos = 0;
  auto next_line = [&]() {
    const std::size_t end = bytes.find('\n', pos);
    if (end == std::string::npos) throw DataError(origin + ": truncated checkpoint header");
    std::string line = bytes.substr(pos, end - pos);
    pos = end + 1;
    return line;
  };
  auto expect_prefix = [&](const std::string& line, const std::string& prefix) {
    if (line.rfind(prefix, 0) != 0) {
      throw DataError(origin + ": expected '" + prefix + "' line in checkpoint header");
    }
    return line.substr(prefix.size());
  };

  if (next_line() != kMagic) throw DataError(origin + ": not an SMN checkpoint (bad magic)");
  Checkpoint ckpt{nlohmann::json(), ParameterSet()};
  try {
    ckpt.config = nlohmann::json::parse(expect_prefix(next_line(), "config "));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(origin + ": checkpoint config is not valid JSON: " + e.what());
  }
  std::uint64_t seed = 0;
  std::size_t count = 0;
  try {
    seed = std::stoull(expect_prefix(next_line(), "seed "));
    count = std::stoull(expect_prefix(next_line(), "params "));
  } catch (const std::logic_error&) {
    throw DataError(origin + ": malformed seed/params line");
  }

  struct Entry {
    std::string name;
    Shape shape;
    std::size_t offset;
    std::size_t size;
  };
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < count; ++i) {
    std::istringstream line(next_line());
    Entry e;
    std::string shape;
    if (!(line >> e.name >> shape >> e.offset >> e.size)) {
      throw DataError(origin + ": malformed parameter manifest line " + std::to_string(i));
    }
    e.shape = parse_shape(shape, origin);
    if (shape_size(e.shape) != e.size) {
      throw DataError(origin + ": parameter '" + e.name + "' shape does not match its size");
    }
    entries.push_back(std::move(e));
  }
  std::size_t data_len = 0;
  try {
    data_len = std::stoull(expect_prefix(next_line(), "data "));
  } catch (const std::logic_error&) {
    throw DataError(origin + ": malformed data line");
  }
  if (bytes.size() - pos != data_len) {
    throw DataError(origin + ": expected " + std::to_string(data_len) + " data bytes, found " +
                    std::to_string(bytes.size() - pos));
  }
  const char* base = bytes.data() + pos;
  ParameterSet params(seed);
  for (const Entry& e : entries) {
    if (e.offset + e.size * sizeof(double) > data_len) {
      throw DataError(origin + ": parameter '" + e.name + "' runs past the data section");
    }
    std::vector<double> values(e.size);
    for (std::size_t i = 0; i < e.size; ++i) values[i] = read_le(base + e.offset + 8 * i);
    params.insert(e.name, Tensor::from_data(e.shape, std::move(values)));
  }
  ckpt.params = std::move(params);
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& config,
                     const ParameterSet& params) {
  write_text_file(path, serialize_checkpoint(config, params), "checkpoint");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot read checkpoint '" + path.string() + "' (produced by `smn train`)");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_checkpoint(buffer.str(), path.string());
}

}  // namespace smn
