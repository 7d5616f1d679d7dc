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

#ifndef SMN_MODEL_HPP_
#define SMN_MODEL_HPP_

// Statement-based memory network encoder with an attendgru-style decoder.
//
//   code ids ---- embed -- code GRU ------------ H_enc --.
//                                                         attention 1 -- ctx1 --.
//   prefix ---- embed -- summary GRU ----------- H_dec --+                        concat -- dense(relu)
//                                                         attention 2 -- ctx2 --'   -- flatten -- dense -- softmax
//   statements -- F -- memory hops (gated GRU) --- M ---'
//
// encoder_kind = attendgru_only drops the statement path and ctx2.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smn/corpus.hpp"
#include "smn/ops.hpp"
#include "smn/parameters.hpp"

namespace smn {

enum class EncoderKind { kSmn, kAttendGruOnly };
enum class StatementEncoding { kPositional, kEos };
enum class GateQuery { kConstantQ, kSummaryVector };
enum class GateSquash { kNone, kSigmoid };

struct ModelConfig {
  std::size_t tdatlen = 200;
  std::size_t comlen = 13;
  std::size_t e_dim = 100;
  std::size_t l_dim = 100;
  std::size_t h = 3;   // memory hops
  std::size_t n = 70;  // max statements
  std::size_t Y = 30;  // max statement length
  std::size_t batch = 100;
  std::size_t code_vocab_size = 0;
  std::size_t summary_vocab_size = 0;
  std::size_t projection_dim = 256;
  EncoderKind encoder_kind = EncoderKind::kSmn;
  StatementEncoding statement_encoding = StatementEncoding::kPositional;
  GateQuery gate_query = GateQuery::kConstantQ;
  GateSquash gate_squash = GateSquash::kNone;
  double q_fill = 0.1;
  std::uint64_t rng_seed = 0;

  // Throws ConfigError.
  void validate() const;
  EncodingShape encoding_shape() const { return {tdatlen, comlen, n, Y}; }
  bool uses_statements() const { return encoder_kind == EncoderKind::kSmn; }
};

// Keys of the serialized ModelConfig, sorted.
const std::vector<std::string>& model_config_keys();
nlohmann::json to_json(const ModelConfig& config);
// Missing keys keep their defaults. With allow_other_keys, keys outside
// model_config_keys() are ignored instead of rejected.
ModelConfig model_config_from_json(const nlohmann::json& j, bool allow_other_keys = false);

std::string to_string(EncoderKind v);
std::string to_string(StatementEncoding v);
std::string to_string(GateQuery v);
std::string to_string(GateSquash v);

// ---------------------------------------------------------------------------
// Building blocks

// P[x][y] = (1 - y/Y) - (x/X)(1 - 2y/Y) with 1-based x, y; shape [X x Y].
Tensor positional_matrix(std::size_t X, std::size_t Y);

// F[t] = sum over the words of statement t of emb(word_y) * P[:, y]; rows at or
// past statement_count are zero. Shape [n x e_dim].
Tensor encode_statements_positional(const StatementMatrix& statements, const Tensor& embedding,
                                    const Tensor& P);

// F[t] = final state of a GRU (zero initial state) over the words of statement t.
Tensor encode_statements_eos(const StatementMatrix& statements, const Tensor& embedding,
                             const GruWeights& weights);

// G' = sum(tanh([F*Q, F*M, |F-Q|, |F-M|])) as a scalar, not clamped.
Tensor gate(const Tensor& F, const Tensor& Q, const Tensor& M);

// g * candidate + (1 - g) * m for a scalar g.
Tensor gated_update(const Tensor& g, const Tensor& candidate, const Tensor& m);

using GateFn = std::function<Tensor(const Tensor& F, const Tensor& Q, const Tensor& M)>;

struct MemoryTrace {
  Tensor memories;                         // [h x d]
  std::vector<std::vector<double>> gates;  // h x n; entries for pad statements are 0
};

// M_0 = 0; for hop i, m starts at zero and each real statement t applies
// m = g * GRU(F_t, m) + (1 - g) * m with g = gate(F_t, Q, M_{i-1}).
MemoryTrace memory_hops(const Tensor& F, const Tensor& Q, std::size_t hops,
                        const GruWeights& weights, std::size_t statement_count,
                        GateSquash squash = GateSquash::kNone, const GateFn& gate_fn = gate);

// Runs a GRU over the rows of inputs from h0; returns the stacked states
// [T x H].
Tensor gru_sequence(const Tensor& inputs, const Tensor& h0, const GruWeights& weights);

// ---------------------------------------------------------------------------
// Full model

// Adds every weight of the configuration in a fixed order.
ParameterSet init_parameters(const ModelConfig& config);
// Number of weights init_parameters(config) allocates, without allocating them.
std::size_t parameter_count(const ModelConfig& config);
GruWeights gru_weights(const ParameterSet& params, const std::string& prefix);

// Parts of the forward pass that do not depend on the summary prefix.
struct EncoderState {
  Tensor code_states;  // H_enc [tdatlen x l_dim]
  Tensor final_state;  // [l_dim], seeds the summary GRU
  Tensor facts;        // F [n x d], undefined for attendgru_only
  std::size_t statement_count = 0;
  std::optional<MemoryTrace> memory;  // precomputed when the gate query is constant
};

struct ForwardOutput {
  Tensor next_word_dist;  // [v]
  std::optional<MemoryTrace> trace;
};

class Model {
 public:
  // config.validate() must pass; params must hold init_parameters(config)'s names and shapes.
  Model(ModelConfig config, const ParameterSet& params, GateFn gate_fn = gate);

  const ModelConfig& config() const { return config_; }
  const ParameterSet& params() const { return *params_; }

  EncoderState encode(const EncodedSample& sample) const;
  // prefix starts with <s>; its length must be in [1, comlen].
  ForwardOutput decode(const EncoderState& state, std::span<const int> prefix) const;
  ForwardOutput forward(const EncodedSample& sample, std::span<const int> prefix) const;

 private:
  ModelConfig config_;
  const ParameterSet* params_;
  GateFn gate_fn_;
  Tensor P_;
  Tensor Q_;
};

}  // namespace smn

#endif  // SMN_MODEL_HPP_
