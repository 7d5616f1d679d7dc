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

#include "smn/model.hpp"

#include <algorithm>
#include <cmath>

#include "smn/error.hpp"
#include "smn/kernels.hpp"

namespace smn {
namespace {

template <typename Enum>
struct EnumName {
  Enum value;
  const char* name;
};

constexpr EnumName<EncoderKind> kEncoderKinds[] = {{EncoderKind::kSmn, "smn"},
                                                   {EncoderKind::kAttendGruOnly, "attendgru_only"}};
constexpr EnumName<StatementEncoding> kStatementEncodings[] = {
    {StatementEncoding::kPositional, "positional"}, {StatementEncoding::kEos, "eos"}};
constexpr EnumName<GateQuery> kGateQueries[] = {{GateQuery::kConstantQ, "constant_q"},
                                                {GateQuery::kSummaryVector, "summary_vector"}};
constexpr EnumName<GateSquash> kGateSquashes[] = {{GateSquash::kNone, "none"},
                                                  {GateSquash::kSigmoid, "sigmoid"}};

template <typename Enum, std::size_t N>
std::string enum_name(const EnumName<Enum> (&table)[N], Enum v) {
  for (const auto& e : table) {
    if (e.value == v) return e.name;
  }
  return "?";
}

template <typename Enum, std::size_t N>
Enum parse_enum(const EnumName<Enum> (&table)[N], const nlohmann::json& j, const char* key) {
  if (!j.is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
  const std::string s = j.get<std::string>();
  std::string allowed;
  for (const auto& e : table) {
    if (s == e.name) return e.value;
    allowed += allowed.empty() ? e.name : std::string(", ") + e.name;
  }
  throw ConfigError(std::string("'") + key + "' must be one of " + allowed + ", got '" + s + "'");
}

bool non_negative_integer(const nlohmann::json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

void read_size(const nlohmann::json& j, const char* key, std::size_t& out) {
  if (!j.contains(key)) return;
  const nlohmann::json& v = j.at(key);
  if (!non_negative_integer(v)) {
    throw ConfigError(std::string("'") + key + "' must be a non-negative integer");
  }
  out = v.get<std::size_t>();
}

void require_vector(const Tensor& t, std::size_t d, const char* what) {
  if (t.rank() != 1 || t.dim(0) != d) {
    throw DimensionError(std::string(what) + ": expected [" + std::to_string(d) + "], got " +
                         shape_to_string(t.shape()));
  }
}

void kernels_add(const Tensor& t, std::span<const double> delta) {
  kernels::axpy(1.0, delta, t.grad_buffer());
}

}  // namespace

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(tdatlen, "tdatlen");
  positive(e_dim, "e_dim");
  positive(l_dim, "l_dim");
  positive(h, "h");
  positive(n, "n");
  positive(Y, "Y");
  positive(batch, "batch");
  positive(projection_dim, "projection_dim");
  if (comlen < 2) throw ConfigError("comlen must be at least 2 to hold <s> and </s>");
  if (code_vocab_size <= 4 || summary_vocab_size <= 4) {
    throw ConfigError("vocabulary sizes must exceed the 4 reserved ids (code " +
                      std::to_string(code_vocab_size) + ", summary " +
                      std::to_string(summary_vocab_size) + ")");
  }
  if (e_dim != l_dim) {
    throw ConfigError("e_dim (" + std::to_string(e_dim) + ") must equal l_dim (" +
                      std::to_string(l_dim) + ")");
  }
  if (!std::isfinite(q_fill)) throw ConfigError("q_fill must be finite");
}

const std::vector<std::string>& model_config_keys() {
  static const std::vector<std::string> keys = {
      "Y",         "batch",          "code_vocab_size", "comlen",     "e_dim",
      "encoder_kind", "gate_query",  "gate_squash",     "h",          "l_dim",
      "n",         "projection_dim", "q_fill",          "rng_seed",   "statement_encoding",
      "summary_vocab_size", "tdatlen"};
  return keys;
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"Y", c.Y},
          {"batch", c.batch},
          {"code_vocab_size", c.code_vocab_size},
          {"comlen", c.comlen},
          {"e_dim", c.e_dim},
          {"encoder_kind", to_string(c.encoder_kind)},
          {"gate_query", to_string(c.gate_query)},
          {"gate_squash", to_string(c.gate_squash)},
          {"h", c.h},
          {"l_dim", c.l_dim},
          {"n", c.n},
          {"projection_dim", c.projection_dim},
          {"q_fill", c.q_fill},
          {"rng_seed", c.rng_seed},
          {"statement_encoding", to_string(c.statement_encoding)},
          {"summary_vocab_size", c.summary_vocab_size},
          {"tdatlen", c.tdatlen}};
}

ModelConfig model_config_from_json(const nlohmann::json& j, bool allow_other_keys) {
  if (!j.is_object()) throw ConfigError("model config must be a JSON object");
  const auto& keys = model_config_keys();
  if (!allow_other_keys) {
    for (const auto& [key, value] : j.items()) {
      if (!std::binary_search(keys.begin(), keys.end(), key)) {
        throw ConfigError("unknown model config key '" + key + "'");
      }
    }
  }
  ModelConfig c;
  read_size(j, "tdatlen", c.tdatlen);
  read_size(j, "comlen", c.comlen);
  read_size(j, "e_dim", c.e_dim);
  read_size(j, "l_dim", c.l_dim);
  read_size(j, "h", c.h);
  read_size(j, "n", c.n);
  read_size(j, "Y", c.Y);
  read_size(j, "batch", c.batch);
  read_size(j, "code_vocab_size", c.code_vocab_size);
  read_size(j, "summary_vocab_size", c.summary_vocab_size);
  read_size(j, "projection_dim", c.projection_dim);
  if (j.contains("encoder_kind")) {
    c.encoder_kind = parse_enum(kEncoderKinds, j.at("encoder_kind"), "encoder_kind");
  }
  if (j.contains("statement_encoding")) {
    c.statement_encoding =
        parse_enum(kStatementEncodings, j.at("statement_encoding"), "statement_encoding");
  }
  if (j.contains("gate_query")) {
    c.gate_query = parse_enum(kGateQueries, j.at("gate_query"), "gate_query");
  }
  if (j.contains("gate_squash")) {
    c.gate_squash = parse_enum(kGateSquashes, j.at("gate_squash"), "gate_squash");
  }
  if (j.contains("q_fill")) {
    if (!j.at("q_fill").is_number()) throw ConfigError("'q_fill' must be a number");
    c.q_fill = j.at("q_fill").get<double>();
  }
  if (j.contains("rng_seed")) {
    if (!non_negative_integer(j.at("rng_seed"))) {
      throw ConfigError("'rng_seed' must be a non-negative integer");
    }
    c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  }
  return c;
}

std::string to_string(EncoderKind v) { return enum_name(kEncoderKinds, v); }
std::string to_string(StatementEncoding v) { return enum_name(kStatementEncodings, v); }
std::string to_string(GateQuery v) { return enum_name(kGateQueries, v); }
std::string to_string(GateSquash v) { return enum_name(kGateSquashes, v); }

// ---------------------------------------------------------------------------

Tensor positional_matrix(std::size_t X, std::size_t Y) {
  if (X == 0 || Y == 0) throw DimensionError("positional_matrix needs X, Y >= 1");
  std::vector<double> p(X * Y);
  const double xd = static_cast<double>(X);
  const double yd = static_cast<double>(Y);
  for (std::size_t x = 1; x <= X; ++x) {
    for (std::size_t y = 1; y <= Y; ++y) {
      const double fy = static_cast<double>(y) / yd;
      p[(x - 1) * Y + (y - 1)] = (1.0 - fy) - (static_cast<double>(x) / xd) * (1.0 - 2.0 * fy);
    }
  }
  return Tensor::from_data({X, Y}, std::move(p));
}

Tensor encode_statements_positional(const StatementMatrix& statements, const Tensor& embedding,
                                    const Tensor& P) {
  const std::size_t e = embedding.dim(1);
  if (P.rank() != 2 || P.dim(0) != e || P.dim(1) < statements.statement_len) {
    throw DimensionError("positional matrix " + shape_to_string(P.shape()) +
                         " does not cover embedding width " + std::to_string(e) +
                         " and statement length " + std::to_string(statements.statement_len));
  }
  const std::size_t Y = P.dim(1);
  auto pv = P.data();
  std::vector<Tensor> rows;
  rows.reserve(statements.max_statements);
  for (std::size_t t = 0; t < statements.max_statements; ++t) {
    if (t >= statements.statement_count) {
      rows.push_back(Tensor::zeros({e}));
      continue;
    }
    std::span<const int> ids = statements.statement(t);
    // Word y of the statement is weighted by column y of P.
    std::vector<double> weights(ids.size() * e);
    for (std::size_t y = 0; y < ids.size(); ++y) {
      for (std::size_t x = 0; x < e; ++x) weights[y * e + x] = pv[x * Y + y];
    }
    Tensor words = embedding_lookup(embedding, ids);
    rows.push_back(sum_rows(mul(words, Tensor::from_data({ids.size(), e}, std::move(weights)))));
  }
  return stack(rows);
}

Tensor gru_sequence(const Tensor& inputs, const Tensor& h0, const GruWeights& weights) {
  if (inputs.rank() != 2) {
    throw DimensionError("gru_sequence: inputs must be [T x E], got " +
                         shape_to_string(inputs.shape()));
  }
  std::vector<Tensor> states;
  states.reserve(inputs.dim(0));
  Tensor h = h0;
  for (std::size_t i = 0; i < inputs.dim(0); ++i) {
    h = gru_cell(row(inputs, i), h, weights);
    states.push_back(h);
  }
  return stack(states);
}

Tensor encode_statements_eos(const StatementMatrix& statements, const Tensor& embedding,
                             const GruWeights& weights) {
  const std::size_t hid = weights.hidden_dim();
  std::vector<Tensor> rows;
  rows.reserve(statements.max_statements);
  for (std::size_t t = 0; t < statements.max_statements; ++t) {
    Tensor h = Tensor::zeros({hid});
    if (t < statements.statement_count) {
      Tensor words = embedding_lookup(embedding, statements.statement(t));
      for (std::size_t y = 0; y < words.dim(0); ++y) h = gru_cell(row(words, y), h, weights);
    }
    rows.push_back(h);
  }
  return stack(rows);
}

Tensor gate(const Tensor& F, const Tensor& Q, const Tensor& M) {
  if (F.rank() != 1) throw DimensionError("gate: F must be rank 1, got " + shape_to_string(F.shape()));
  const std::size_t d = F.dim(0);
  require_vector(Q, d, "gate query");
  require_vector(M, d, "gate memory");
  auto f = F.data();
  auto q = Q.data();
  auto m = M.data();
  // tanh of the four feature blocks, in concatenation order.
  std::vector<double> t(4 * d);
  for (std::size_t i = 0; i < d; ++i) {
    t[i] = std::tanh(f[i] * q[i]);
    t[d + i] = std::tanh(f[i] * m[i]);
    t[2 * d + i] = std::tanh(std::fabs(f[i] - q[i]));
    t[3 * d + i] = std::tanh(std::fabs(f[i] - m[i]));
  }
  double total = 0.0;
  for (double v : t) total += v;

  auto backward = [d, t = std::move(t)](const Tensor& o, std::span<const Tensor> in) {
    const double g = o.grad()[0];
    auto f = in[0].data();
    auto q = in[1].data();
    auto m = in[2].data();
    auto sign = [](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); };
    std::vector<double> df(d), dq(d), dm(d);
    for (std::size_t i = 0; i < d; ++i) {
      const double d1 = g * (1.0 - t[i] * t[i]);
      const double d2 = g * (1.0 - t[d + i] * t[d + i]);
      const double d3 = g * (1.0 - t[2 * d + i] * t[2 * d + i]) * sign(f[i] - q[i]);
      const double d4 = g * (1.0 - t[3 * d + i] * t[3 * d + i]) * sign(f[i] - m[i]);
      df[i] = d1 * q[i] + d2 * m[i] + d3 + d4;
      dq[i] = d1 * f[i] - d3;
      dm[i] = d2 * f[i] - d4;
    }
    if (in[0].requires_grad()) kernels_add(in[0], df);
    if (in[1].requires_grad()) kernels_add(in[1], dq);
    if (in[2].requires_grad()) kernels_add(in[2], dm);
  };
  return Tensor::from_op({}, {total}, {F, Q, M}, std::move(backward));
}

Tensor gated_update(const Tensor& g, const Tensor& candidate, const Tensor& m) {
  if (g.size() != 1) throw DimensionError("gated_update: gate must be a scalar, got " + shape_to_string(g.shape()));
  if (candidate.shape() != m.shape()) {
    throw DimensionError("gated_update: candidate " + shape_to_string(candidate.shape()) +
                         " and memory " + shape_to_string(m.shape()) + " differ");
  }
  const double gv = g.data()[0];
  auto c = candidate.data();
  auto mv = m.data();
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = gv * c[i] + (1.0 - gv) * mv[i];
  return Tensor::from_op(m.shape(), std::move(out), {g, candidate, m},
                         [](const Tensor& o, std::span<const Tensor> in) {
                           auto go = o.grad();
                           const double gv = in[0].data()[0];
                           auto c = in[1].data();
                           auto mv = in[2].data();
                           if (in[0].requires_grad()) {
                             double dg = 0.0;
                             for (std::size_t i = 0; i < go.size(); ++i) dg += go[i] * (c[i] - mv[i]);
                             in[0].grad_buffer()[0] += dg;
                           }
                           if (in[1].requires_grad()) {
                             auto dc = in[1].grad_buffer();
                             for (std::size_t i = 0; i < go.size(); ++i) dc[i] += gv * go[i];
                           }
                           if (in[2].requires_grad()) {
                             auto dm = in[2].grad_buffer();
                             for (std::size_t i = 0; i < go.size(); ++i) dm[i] += (1.0 - gv) * go[i];
                           }
                         });
}

MemoryTrace memory_hops(const Tensor& F, const Tensor& Q, std::size_t hops,
                        const GruWeights& weights, std::size_t statement_count, GateSquash squash,
                        const GateFn& gate_fn) {
  if (hops == 0) throw UsageError("memory_hops needs at least one hop");
  if (F.rank() != 2) throw DimensionError("memory_hops: F must be [n x d], got " + shape_to_string(F.shape()));
  const std::size_t n = F.dim(0);
  const std::size_t d = F.dim(1);
  require_vector(Q, d, "memory_hops query");
  if (statement_count > n) {
    throw DimensionError("memory_hops: statement_count " + std::to_string(statement_count) +
                         " exceeds " + std::to_string(n) + " rows");
  }
  std::vector<Tensor> facts;
  facts.reserve(statement_count);
  for (std::size_t t = 0; t < statement_count; ++t) facts.push_back(row(F, t));

  MemoryTrace trace;
  trace.gates.assign(hops, std::vector<double>(n, 0.0));
  std::vector<Tensor> memories;
  Tensor previous = Tensor::zeros({d});
  for (std::size_t i = 0; i < hops; ++i) {
    Tensor m = Tensor::zeros({d});
    for (std::size_t t = 0; t < statement_count; ++t) {
      Tensor g = gate_fn(facts[t], Q, previous);
      if (squash == GateSquash::kSigmoid) g = sigmoid(g);
      trace.gates[i][t] = g.data()[0];
      m = gated_update(g, gru_cell(facts[t], m, weights), m);
    }
    memories.push_back(m);
    previous = m;
  }
  trace.memories = stack(memories);
  return trace;
}

// ---------------------------------------------------------------------------

namespace {

void add_gru(ParameterSet& params, const std::string& prefix, std::size_t in, std::size_t hid) {
  params.add(prefix + ".input_kernel", {in, 3 * hid}, Init::kGlorotUniform);
  params.add(prefix + ".recurrent_kernel", {hid, 3 * hid}, Init::kGlorotUniform);
  params.add(prefix + ".bias", {3 * hid}, Init::kZeros);
}

std::size_t context_width(const ModelConfig& c) {
  return (c.uses_statements() ? 3 : 2) * c.l_dim;
}

}  // namespace

ParameterSet init_parameters(const ModelConfig& c) {
  c.validate();
  ParameterSet params(c.rng_seed);
  params.add("code_embedding", {c.code_vocab_size, c.e_dim}, Init::kUniformEmbedding);
  params.add("summary_embedding", {c.summary_vocab_size, c.e_dim}, Init::kUniformEmbedding);
  add_gru(params, "code_gru", c.e_dim, c.l_dim);
  add_gru(params, "summary_gru", c.e_dim, c.l_dim);
  if (c.uses_statements()) {
    add_gru(params, "memory_gru", c.e_dim, c.l_dim);
    if (c.statement_encoding == StatementEncoding::kEos) {
      add_gru(params, "statement_gru", c.e_dim, c.l_dim);
    }
  }
  params.add("projection.kernel", {context_width(c), c.projection_dim}, Init::kGlorotUniform);
  params.add("projection.bias", {c.projection_dim}, Init::kZeros);
  params.add("output.kernel", {c.comlen * c.projection_dim, c.summary_vocab_size},
             Init::kGlorotUniform);
  params.add("output.bias", {c.summary_vocab_size}, Init::kZeros);
  return params;
}

std::size_t parameter_count(const ModelConfig& c) {
  c.validate();
  auto gru = [](std::size_t in, std::size_t hid) { return in * 3 * hid + hid * 3 * hid + 3 * hid; };
  std::size_t total = (c.code_vocab_size + c.summary_vocab_size) * c.e_dim;
  std::size_t grus = 2;
  if (c.uses_statements()) grus += c.statement_encoding == StatementEncoding::kEos ? 2 : 1;
  total += grus * gru(c.e_dim, c.l_dim);
  total += (context_width(c) + 1) * c.projection_dim;
  total += (c.comlen * c.projection_dim + 1) * c.summary_vocab_size;
  return total;
}

GruWeights gru_weights(const ParameterSet& params, const std::string& prefix) {
  return {params.get(prefix + ".input_kernel"), params.get(prefix + ".recurrent_kernel"),
          params.get(prefix + ".bias")};
}

Model::Model(ModelConfig config, const ParameterSet& params, GateFn gate_fn)
    : config_(std::move(config)), params_(&params), gate_fn_(std::move(gate_fn)) {
  config_.validate();
  const ParameterSet expected = init_parameters(config_);
  for (const auto& [name, t] : expected) {
    if (!params.contains(name)) {
      throw ConfigError("parameters lack '" + name + "' required by the model config");
    }
    if (params.get(name).shape() != t.shape()) {
      throw ConfigError("parameter '" + name + "' has shape " +
                        shape_to_string(params.get(name).shape()) + ", config expects " +
                        shape_to_string(t.shape()));
    }
  }
  if (params.size() != expected.size()) {
    throw ConfigError("parameters hold " + std::to_string(params.size()) +
                      " tensors, config expects " + std::to_string(expected.size()));
  }
  P_ = positional_matrix(config_.e_dim, config_.Y);
  Q_ = Tensor::full({config_.l_dim}, config_.q_fill);
}

EncoderState Model::encode(const EncodedSample& sample) const {
  const ModelConfig& c = config_;
  if (sample.code_ids.size() != c.tdatlen) {
    throw DimensionError("code input has " + std::to_string(sample.code_ids.size()) +
                         " ids, tdatlen is " + std::to_string(c.tdatlen));
  }
  EncoderState state;
  Tensor code = embedding_lookup(params_->get("code_embedding"), sample.code_ids);
  state.code_states = gru_sequence(code, Tensor::zeros({c.l_dim}), gru_weights(*params_, "code_gru"));
  state.final_state = row(state.code_states, c.tdatlen - 1);
  if (!c.uses_statements()) return state;

  const StatementMatrix& s = sample.statements;
  if (s.max_statements != c.n || s.statement_len != c.Y) {
    throw DimensionError("statement matrix is " + std::to_string(s.max_statements) + "x" +
                         std::to_string(s.statement_len) + ", config expects " +
                         std::to_string(c.n) + "x" + std::to_string(c.Y));
  }
  state.statement_count = s.statement_count;
  state.facts = c.statement_encoding == StatementEncoding::kPositional
                    ? encode_statements_positional(s, params_->get("code_embedding"), P_)
                    : encode_statements_eos(s, params_->get("code_embedding"),
                                            gru_weights(*params_, "statement_gru"));
  if (c.gate_query == GateQuery::kConstantQ) {
    state.memory = memory_hops(state.facts, Q_, c.h, gru_weights(*params_, "memory_gru"),
                               state.statement_count, c.gate_squash, gate_fn_);
  }
  return state;
}

ForwardOutput Model::decode(const EncoderState& state, std::span<const int> prefix) const {
  const ModelConfig& c = config_;
  if (prefix.empty() || prefix.size() > c.comlen) {
    throw UsageError("summary prefix of length " + std::to_string(prefix.size()) +
                     " does not fit comlen " + std::to_string(c.comlen));
  }
  std::vector<int> ids(c.comlen, Vocabulary::kPad);
  std::copy(prefix.begin(), prefix.end(), ids.begin());
  Tensor summary = embedding_lookup(params_->get("summary_embedding"), ids);
  Tensor dec = gru_sequence(summary, state.final_state, gru_weights(*params_, "summary_gru"));

  const Tensor& enc = state.code_states;
  Tensor ctx1 = matmul(softmax(matmul_nt(dec, enc)), enc);
  ForwardOutput out;
  Tensor context;
  if (c.uses_statements()) {
    if (state.memory) {
      out.trace = *state.memory;
    } else {
      out.trace = memory_hops(state.facts, row(dec, c.comlen - 1), c.h,
                              gru_weights(*params_, "memory_gru"), state.statement_count,
                              c.gate_squash, gate_fn_);
    }
    const Tensor& M = out.trace->memories;
    Tensor ctx2 = matmul(softmax(matmul_nt(dec, M)), M);
    const Tensor parts[] = {ctx1, ctx2, dec};
    context = concat(parts, 1);
  } else {
    const Tensor parts[] = {ctx1, dec};
    context = concat(parts, 1);
  }
  Tensor hidden = relu(add_rowwise(matmul(context, params_->get("projection.kernel")),
                                   params_->get("projection.bias")));
  Tensor flat = reshape(hidden, {c.comlen * c.projection_dim});
  Tensor logits = add(matmul(flat, params_->get("output.kernel")), params_->get("output.bias"));
  out.next_word_dist = softmax(logits);
  return out;
}

ForwardOutput Model::forward(const EncodedSample& sample, std::span<const int> prefix) const {
  return decode(encode(sample), prefix);
}

}  // namespace smn
