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

#include "smn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "smn/error.hpp"
#include "smn/ops.hpp"
#include "smn/random.hpp"

namespace smn {
namespace {

Tensor random_tensor(Rng& rng, Shape shape, bool requires_grad = true, double lo = -1.0,
                     double hi = 1.0) {
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = rng.uniform(lo, hi);
  return Tensor::from_data(std::move(shape), std::move(v), requires_grad);
}

// Scalar probe of a non-scalar output so that every element gets its own weight.
Tensor probe(const Tensor& out, const Tensor& weights) { return sum(mul(out, weights)); }

GruWeights random_gru(Rng& rng, std::size_t in, std::size_t hid) {
  return {random_tensor(rng, {in, 3 * hid}), random_tensor(rng, {hid, 3 * hid}),
          random_tensor(rng, {3 * hid})};
}

StatementMatrix random_statements(Rng& rng, std::size_t n, std::size_t Y, std::size_t vocab,
                                  std::size_t count) {
  StatementMatrix m;
  m.max_statements = n;
  m.statement_len = Y;
  m.statement_count = count;
  m.ids.assign(n * Y, 0);
  m.lengths.assign(n, 0);
  for (std::size_t t = 0; t < count; ++t) {
    m.lengths[t] = 1 + rng.index(Y);
    for (std::size_t y = 0; y < m.lengths[t]; ++y) {
      m.ids[t * Y + y] = 1 + static_cast<int>(rng.index(vocab - 1));
    }
  }
  return m;
}

class Checker {
 public:
  Checker(const GradcheckOptions& options) : options_(options) {}

  void check(const std::string& name, std::vector<Tensor> inputs,
             const std::function<Tensor()>& loss) {
    double err = max_gradient_error(std::move(inputs), loss, options_.step);
    auto it = std::find_if(worst_.begin(), worst_.end(),
                           [&](const auto& e) { return e.first == name; });
    if (it == worst_.end()) {
      worst_.emplace_back(name, err);
    } else {
      // NaN must stick, std::max would drop it.
      if (!(err <= it->second)) it->second = err;
    }
  }

  GradcheckReport report() const {
    GradcheckReport r;
    r.tolerance = options_.tolerance;
    for (const auto& [name, err] : worst_) {
      r.entries.push_back({name, err, std::isfinite(err) && err < options_.tolerance});
    }
    return r;
  }

 private:
  GradcheckOptions options_;
  std::vector<std::pair<std::string, double>> worst_;
};

void check_ops(Checker& ck, Rng& rng, const ModelConfig& c, const GateFn& gate_fn) {
  const std::size_t r = 2, k = c.e_dim, h = c.l_dim;
  Tensor a = random_tensor(rng, {r, k});
  Tensor b = random_tensor(rng, {k, h});
  Tensor bt = random_tensor(rng, {h, k});
  Tensor w_rh = random_tensor(rng, {r, h}, false);
  ck.check("matmul", {a, b}, [&] { return probe(matmul(a, b), w_rh); });
  ck.check("matmul_nt", {a, bt}, [&] { return probe(matmul_nt(a, bt), w_rh); });

  Tensor u = random_tensor(rng, {r, k});
  Tensor v = random_tensor(rng, {r, k});
  Tensor w = random_tensor(rng, {r, k}, false);
  ck.check("add", {u, v}, [&] { return probe(add(u, v), w); });
  ck.check("sub", {u, v}, [&] { return probe(sub(u, v), w); });
  ck.check("mul", {u, v}, [&] { return probe(mul(u, v), w); });
  ck.check("abs", {u}, [&] { return probe(abs(u), w); });
  ck.check("tanh", {u}, [&] { return probe(tanh(u), w); });
  ck.check("sigmoid", {u}, [&] { return probe(sigmoid(u), w); });
  ck.check("relu", {u}, [&] { return probe(relu(u), w); });
  ck.check("scale", {u}, [&] { return probe(scale(u, -1.7), w); });
  ck.check("softmax", {u}, [&] { return probe(softmax(u), w); });
  ck.check("sum", {u}, [&] { return sum(u); });

  Tensor parts[] = {u, v};
  Tensor w_cols = random_tensor(rng, {r, 2 * k}, false);
  Tensor w_rows = random_tensor(rng, {2 * r, k}, false);
  ck.check("concat", {u, v}, [&] {
    return add(probe(concat(parts, 1), w_cols), probe(concat(parts, 0), w_rows));
  });
  Tensor u0 = random_tensor(rng, {k});
  Tensor u1 = random_tensor(rng, {k});
  Tensor rows[] = {u0, u1};
  ck.check("stack", {u0, u1}, [&] { return probe(stack(rows), w); });
  Tensor w_k = random_tensor(rng, {k}, false);
  ck.check("row", {u}, [&] { return probe(row(u, r - 1), w_k); });
  Tensor w_flat = random_tensor(rng, {r * k}, false);
  ck.check("reshape", {u}, [&] { return probe(reshape(u, {r * k}), w_flat); });
  ck.check("sum_rows", {u}, [&] { return probe(sum_rows(u), w_k); });
  Tensor bias = random_tensor(rng, {k});
  ck.check("add_rowwise", {u, bias}, [&] { return probe(add_rowwise(u, bias), w); });

  Tensor table = random_tensor(rng, {c.code_vocab_size, k});
  std::vector<int> ids = {static_cast<int>(rng.index(c.code_vocab_size)),
                          static_cast<int>(rng.index(c.code_vocab_size)), 1, 1};
  Tensor w_ids = random_tensor(rng, {ids.size(), k}, false);
  ck.check("embedding_lookup", {table},
           [&] { return probe(embedding_lookup(table, ids), w_ids); });

  Tensor logits = random_tensor(rng, {c.summary_vocab_size}, true, -2, 2);
  const int target = static_cast<int>(rng.index(c.summary_vocab_size));
  ck.check("cross_entropy", {logits}, [&] { return cross_entropy(softmax(logits), target); });

  GruWeights gw = random_gru(rng, k, h);
  Tensor x = random_tensor(rng, {k});
  Tensor h0 = random_tensor(rng, {h});
  Tensor w_h = random_tensor(rng, {h}, false);
  ck.check("gru_cell", {x, h0, gw.input_kernel, gw.recurrent_kernel, gw.bias},
           [&] { return probe(gru_cell(x, h0, gw), w_h); });
  Tensor seq = random_tensor(rng, {3, k});
  Tensor w_seq = random_tensor(rng, {3, h}, false);
  ck.check("gru_sequence", {seq, h0, gw.input_kernel, gw.recurrent_kernel, gw.bias},
           [&] { return probe(gru_sequence(seq, h0, gw), w_seq); });

  // Statement encoders over a full statement matrix.
  const StatementMatrix sm = random_statements(rng, c.n, c.Y, c.code_vocab_size, c.n);
  Tensor emb = random_tensor(rng, {c.code_vocab_size, k});
  Tensor P = positional_matrix(k, c.Y);
  Tensor w_facts = random_tensor(rng, {c.n, k}, false);
  ck.check("encode_statements_positional", {emb},
           [&] { return probe(encode_statements_positional(sm, emb, P), w_facts); });
  GruWeights sgw = random_gru(rng, k, k);
  ck.check("encode_statements_eos", {emb, sgw.input_kernel, sgw.recurrent_kernel, sgw.bias},
           [&] { return probe(encode_statements_eos(sm, emb, sgw), w_facts); });

  Tensor F = random_tensor(rng, {k});
  Tensor Q = random_tensor(rng, {k});
  Tensor M = random_tensor(rng, {k});
  ck.check("gate", {F, Q, M}, [&] { return gate_fn(F, Q, M); });
  Tensor g = Tensor::scalar(rng.uniform(-1, 2), true);
  Tensor cand = random_tensor(rng, {k});
  ck.check("gated_update", {g, cand, M}, [&] { return probe(gated_update(g, cand, M), w_k); });

  Tensor facts = random_tensor(rng, {c.n, k});
  GruWeights mgw = random_gru(rng, k, k);
  Tensor w_mem = random_tensor(rng, {c.h, k}, false);
  for (GateSquash squash : {GateSquash::kNone, GateSquash::kSigmoid}) {
    ck.check("memory_hops/" + to_string(squash),
             {facts, Q, mgw.input_kernel, mgw.recurrent_kernel, mgw.bias}, [&] {
               return probe(memory_hops(facts, Q, c.h, mgw, c.n, squash, gate_fn).memories, w_mem);
             });
  }
}

std::vector<std::pair<std::string, ModelConfig>> model_variants(const ModelConfig& base) {
  std::vector<std::pair<std::string, ModelConfig>> out;
  ModelConfig smn = base;
  smn.encoder_kind = EncoderKind::kSmn;
  out.emplace_back("model/config", base);
  ModelConfig v = smn;
  v.statement_encoding = base.statement_encoding == StatementEncoding::kEos
                             ? StatementEncoding::kPositional
                             : StatementEncoding::kEos;
  out.emplace_back("model/" + to_string(v.statement_encoding), v);
  v = smn;
  v.gate_query = base.gate_query == GateQuery::kSummaryVector ? GateQuery::kConstantQ
                                                              : GateQuery::kSummaryVector;
  out.emplace_back("model/" + to_string(v.gate_query), v);
  v = smn;
  v.gate_squash =
      base.gate_squash == GateSquash::kSigmoid ? GateSquash::kNone : GateSquash::kSigmoid;
  out.emplace_back("model/gate_squash_" + to_string(v.gate_squash), v);
  v = base;
  v.encoder_kind = EncoderKind::kAttendGruOnly;
  out.emplace_back("model/attendgru_only", v);
  return out;
}

void check_model(Checker& ck, Rng& rng, const std::string& name, ModelConfig c,
                 const GateFn& gate_fn) {
  c.rng_seed = rng.next();
  ParameterSet params = init_parameters(c);
  // Default initial weights leave some paths with gradients near noise level.
  for (auto& [pname, t] : params) {
    for (double& x : t.mutable_data()) x = rng.uniform(-0.8, 0.8);
  }
  Model model(c, params, gate_fn);
  EncodedSample s;
  s.sample_id = "gradcheck";
  s.code_ids.assign(c.tdatlen, 0);
  for (std::size_t i = 0; i < c.tdatlen; ++i) {
    s.code_ids[i] = 1 + static_cast<int>(rng.index(c.code_vocab_size - 1));
  }
  s.statements = random_statements(rng, c.n, c.Y, c.code_vocab_size, c.n);
  std::vector<int> prefix = {Vocabulary::kStart};
  if (c.comlen > 2) {
    prefix.push_back(Vocabulary::kReservedCount +
                     static_cast<int>(rng.index(c.summary_vocab_size - Vocabulary::kReservedCount)));
  }
  const int target = Vocabulary::kEnd;
  std::vector<Tensor> leaves;
  for (auto& [pname, t] : params) leaves.push_back(t);
  ck.check(name, leaves,
           [&] { return cross_entropy(model.forward(s, prefix).next_word_dist, target); });
}

}  // namespace

double max_gradient_error(std::vector<Tensor> inputs, const std::function<Tensor()>& loss,
                          double step) {
  for (Tensor& t : inputs) t.drop_grad();
  loss().backward();
  std::vector<std::vector<double>> analytic;
  for (const Tensor& t : inputs) {
    auto g = t.grad();
    analytic.emplace_back(g.begin(), g.end());
    if (analytic.back().empty()) analytic.back().assign(t.size(), 0.0);
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto values = inputs[k].mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + step;
      const double up = loss().item();
      values[i] = saved - step;
      const double down = loss().item();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[k][i];
      const double err = std::fabs(a - numeric) / std::max({std::fabs(a), std::fabs(numeric), 1e-6});
      if (!(err <= worst)) worst = err;
    }
  }
  for (Tensor& t : inputs) t.drop_grad();
  return worst;
}

bool GradcheckReport::passed() const {
  return !entries.empty() &&
         std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed; });
}

ModelConfig gradcheck_toy_config() {
  ModelConfig c;
  c.tdatlen = 8;
  c.comlen = 4;
  c.e_dim = 3;
  c.l_dim = 3;
  c.n = 2;
  c.Y = 3;
  c.h = 2;
  c.code_vocab_size = 7;
  c.summary_vocab_size = 5;
  c.projection_dim = 4;
  c.batch = 4;
  return c;
}

GradcheckReport run_gradcheck(const ModelConfig& config, const GradcheckOptions& options,
                              const GateFn& gate_fn) {
  config.validate();
  if (!(options.step > 0) || !(options.tolerance > 0) || options.trials == 0) {
    throw ConfigError("gradcheck needs a positive step, tolerance and trial count");
  }
  std::size_t largest = 0;
  for (const auto& [name, c] : model_variants(config)) largest = std::max(largest, parameter_count(c));
  if (largest >= kGradcheckMaxParameters) {
    throw ConfigError("gradcheck needs toy dimensions: a variant has " + std::to_string(largest) +
                      " weights, limit " + std::to_string(kGradcheckMaxParameters));
  }
  Rng rng(options.seed);
  Checker ck(options);
  for (std::size_t trial = 0; trial < options.trials; ++trial) check_ops(ck, rng, config, gate_fn);
  for (const auto& [name, c] : model_variants(config)) check_model(ck, rng, name, c, gate_fn);
  return ck.report();
}

std::string format_gradcheck_report(const GradcheckReport& report) {
  std::string out = "check                                max_rel_error  status\n";
  char line[160];
  for (const auto& e : report.entries) {
    std::snprintf(line, sizeof line, "%-36s %13.3e  %s\n", e.name.c_str(), e.max_relative_error,
                  e.passed ? "ok" : "FAIL");
    out += line;
  }
  std::snprintf(line, sizeof line, "tolerance %.1e: %s\n", report.tolerance,
                report.passed() ? "all checks passed" : "FAILED");
  out += line;
  return out;
}

nlohmann::json to_json(const GradcheckReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& e : report.entries) {
    nlohmann::json err = std::isfinite(e.max_relative_error) ? nlohmann::json(e.max_relative_error)
                                                              : nlohmann::json(nullptr);
    checks.push_back({{"max_relative_error", err}, {"name", e.name}, {"passed", e.passed}});
  }
  return {{"checks", checks}, {"passed", report.passed()}, {"tolerance", report.tolerance}};
}

}  // namespace smn
