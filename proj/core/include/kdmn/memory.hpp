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

// Dynamic memory network over knowledge memory slots.
//
//   q     = tanh(W1 [f_I; f_Q; f_A] + b1)
//   z_i   = [M_i; m; q]
//   alpha = softmax_i(w . tanh(W2 z_i + b2))
//   c     = sum_i alpha_i M_i
//   m'    = ReLU(W3 [m; c; q] + b3)
//
// starting from m = q and repeated for a fixed number of episodes with the
// same attention and update weights on every episode.

#ifndef KDMN_MEMORY_HPP_
#define KDMN_MEMORY_HPP_

#include <vector>

#include "kdmn/autodiff.hpp"

namespace kdmn::mem {

using num::ParameterStore;
using num::Tape;
using num::Tensor;
using num::Var;

struct MemoryDims {
  std::size_t slot = 2048;  // memory slot, query and episodic memory width
  std::size_t image = 2048;
  std::size_t question = 512;
  std::size_t answer = 512;
  std::size_t attention = 512;  // rows of W2, length of w
};

// Registers mem.{w1,b1,w2,b2,w,w3,b3}.
void RegisterMemoryParams(ParameterStore &params, const MemoryDims &dims);

struct MemoryWeights {
  Var w1, b1;  // [slot, image+question+answer], [slot]
  Var w2, b2;  // [attention, 3*slot], [attention]
  Var w;       // [attention]
  Var w3, b3;  // [slot, 3*slot], [slot]

  static MemoryWeights Bind(Tape &tape);
};

Var MakeQuery(Var image, Var question, Var answer, const MemoryWeights &weights);

// W2 applied to the slot block of every z_i once, shared by every episode
// and candidate answer attending over the same bank. W2 z_i splits
// exactly into W2[:, slot] M_i + W2[:, mem] m + W2[:, query] q.
struct PreparedBank {
  Var slots;      // [N, slot]
  Var projected;  // [N, attention]
  Var w2_memory;  // [attention, slot]
  Var w2_query;   // [attention, slot]
};

PreparedBank PrepareBank(Var bank, const MemoryWeights &weights);

struct AttentionResult {
  Var context;  // [slot]
  Var alpha;    // [N]
};

AttentionResult Attend(const PreparedBank &bank, Var memory, Var query,
                       const MemoryWeights &weights);
AttentionResult Attend(Var bank, Var memory, Var query, const MemoryWeights &weights);

Var UpdateMemory(Var memory, Var context, Var query, const MemoryWeights &weights);

struct EpisodicState {
  Var memory;                      // m after the last episode
  std::vector<Tensor> attention;   // alpha of every episode, in order
  std::size_t iterations = 0;
};

// Throws std::invalid_argument when episodes is 0.
EpisodicState RunEpisodes(const PreparedBank &bank, Var query, std::size_t episodes,
                          const MemoryWeights &weights);
EpisodicState RunEpisodes(Var bank, Var query, std::size_t episodes,
                          const MemoryWeights &weights);

}  // namespace kdmn::mem

#endif  // KDMN_MEMORY_HPP_
