// Copyright 2026 The KDMN Authors.
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

#include "kdmn/memory.hpp"

#include <stdexcept>

namespace kdmn::mem {

using num::Add;
using num::AddBias;
using num::Concat;
using num::MatMul;
using num::MatMulNT;

void RegisterMemoryParams(ParameterStore &params, const MemoryDims &d) {
  params.Add("mem.w1", {d.slot, d.image + d.question + d.answer});
  params.Add("mem.b1", {d.slot});
  params.Add("mem.w2", {d.attention, 3 * d.slot});
  params.Add("mem.b2", {d.attention});
  params.Add("mem.w", {d.attention});
  params.Add("mem.w3", {d.slot, 3 * d.slot});
  params.Add("mem.b3", {d.slot});
}

MemoryWeights MemoryWeights::Bind(Tape &tape) {
  MemoryWeights w;
  w.w1 = tape.Param("mem.w1");
  w.b1 = tape.Param("mem.b1");
  w.w2 = tape.Param("mem.w2");
  w.b2 = tape.Param("mem.b2");
  w.w = tape.Param("mem.w");
  w.w3 = tape.Param("mem.w3");
  w.b3 = tape.Param("mem.b3");
  return w;
}

Var MakeQuery(Var image, Var question, Var answer, const MemoryWeights &weights) {
  return num::Tanh(AddBias(MatMulNT(Concat({image, question, answer}), weights.w1),
                           weights.b1));
}

PreparedBank PrepareBank(Var bank, const MemoryWeights &weights) {
  if (bank.shape().size() != 2 || bank.shape()[0] == 0) {
    throw num::DimensionError("memory bank must be a non-empty matrix, got " +
                              num::ShapeString(bank.shape()));
  }
  const std::size_t slot = bank.shape()[1];
  if (weights.w2.shape().size() != 2 || weights.w2.shape()[1] != 3 * slot) {
    throw num::DimensionError("attention", bank.shape(), weights.w2.shape());
  }
  PreparedBank prepared;
  prepared.slots = bank;
  prepared.projected = MatMulNT(bank, num::Slice(weights.w2, 0, slot));
  prepared.w2_memory = num::Slice(weights.w2, slot, slot);
  prepared.w2_query = num::Slice(weights.w2, 2 * slot, slot);
  return prepared;
}

AttentionResult Attend(const PreparedBank &bank, Var memory, Var query,
                       const MemoryWeights &weights) {
  Var shared = AddBias(
      Add(MatMulNT(memory, bank.w2_memory), MatMulNT(query, bank.w2_query)), weights.b2);
  Var hidden = num::Tanh(AddBias(bank.projected, shared));
  Var logits = MatMul(hidden, weights.w);
  Var alpha = num::Softmax(logits);
  Var context = MatMul(alpha, bank.slots);
  return {context, alpha};
}

AttentionResult Attend(Var bank, Var memory, Var query, const MemoryWeights &weights) {
  return Attend(PrepareBank(bank, weights), memory, query, weights);
}

Var UpdateMemory(Var memory, Var context, Var query, const MemoryWeights &weights) {
  return num::Relu(
      AddBias(MatMulNT(Concat({memory, context, query}), weights.w3), weights.b3));
}

EpisodicState RunEpisodes(const PreparedBank &bank, Var query, std::size_t episodes,
                          const MemoryWeights &weights) {
  if (episodes == 0) throw std::invalid_argument("episode count must be at least 1");
  EpisodicState state;
  state.memory = query;
  for (std::size_t t = 0; t < episodes; ++t) {
    AttentionResult att = Attend(bank, state.memory, query, weights);
    state.attention.push_back(att.alpha.value());
    state.memory = UpdateMemory(state.memory, att.context, query, weights);
    ++state.iterations;
  }
  return state;
}

EpisodicState RunEpisodes(Var bank, Var query, std::size_t episodes,
                          const MemoryWeights &weights) {
  return RunEpisodes(PrepareBank(bank, weights), query, episodes, weights);
}

}  // namespace kdmn::mem
