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

// Word embeddings and stacked LSTM encoders.
//
// Knowledge triples are read as three-word (subject, verb, object) phrases
// and run through a two-layer LSTM; the memory slot for a triple is the
// concatenation of the final hidden and cell states of both layers, so a
// slot is 4x the LSTM width (2048 for the default width of 512). Question
// and answer text go through their own LSTMs and are summarized by the top
// layer's final hidden state. All three share one embedding matrix.

#ifndef KDMN_ENCODERS_HPP_
#define KDMN_ENCODERS_HPP_

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kdmn/autodiff.hpp"
#include "kdmn/kg.hpp"
#include "kdmn/retrieval.hpp"

namespace kdmn::enc {

using num::LstmState;
using num::ParameterStore;
using num::Tape;
using num::Tensor;
using num::Var;

// Word <-> index map. Index 0 is reserved for unknown words.
class Vocabulary {
 public:
  static constexpr std::size_t kUnknown = 0;
  static constexpr std::string_view kUnknownToken = "<unk>";

  Vocabulary();

  // Index of word, adding it if new.
  std::size_t Add(std::string_view word);
  // Index of word, or kUnknown.
  std::size_t Lookup(std::string_view word) const;
  bool Contains(std::string_view word) const;
  const std::string &Word(std::size_t index) const { return words_.at(index); }
  std::size_t size() const { return words_.size(); }

  std::vector<std::size_t> Encode(std::span<const std::string> tokens) const;

  // One known word per line; the word on 0-based line k has index k + 1.
  void Write(std::ostream &out) const;
  static Vocabulary Read(std::istream &in);
  void WriteFile(const std::string &path) const;
  static Vocabulary ReadFile(const std::string &path);

  bool operator==(const Vocabulary &other) const { return words_ == other.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Token used for a relation label inside a triple phrase ("UsedFor" ->
// "usedfor").
std::string RelationToken(std::string_view relation);

// The three tokens a triple is encoded from.
std::vector<std::string> TripleTokens(const kg::KnowledgeTriple &triple);

struct EmbeddingLoadResult {
  Tensor matrix;                // vocab.size() x dim
  std::size_t covered = 0;      // rows copied from the file
  std::size_t random_rows = 0;  // rows drawn from U[-bound, bound]
};

// Reads a GloVe-style text file ("word v1 ... v_dim" per line). Rows for
// words missing from the file are drawn uniformly from [-bound, bound].
// An empty path means no file. A line whose vector length differs from dim
// raises std::runtime_error.
EmbeddingLoadResult LoadEmbeddings(const std::string &path, const Vocabulary &vocab,
                                   std::size_t dim, std::mt19937_64 &rng,
                                   double bound = 0.08);
EmbeddingLoadResult LoadEmbeddings(std::istream &in, const Vocabulary &vocab,
                                   std::size_t dim, std::mt19937_64 &rng,
                                   double bound = 0.08);

// Multi-layer LSTM whose weights live in a ParameterStore under
// "<prefix>.l<k>.{wx,wh,b}".
class StackedLstm {
 public:
  StackedLstm() = default;
  StackedLstm(std::string prefix, std::size_t input_dim, std::size_t hidden,
              std::size_t layers = 2);

  void Register(ParameterStore &params) const;

  // Runs the steps (each [in] or [batch, in]) from zero state and returns
  // the final state of every layer, bottom first. No steps yields zero
  // states shaped for the given batch (0 means a single vector).
  std::vector<LstmState> Run(Tape &tape, std::span<const Var> steps,
                             std::size_t batch = 0) const;

  const std::string &prefix() const { return prefix_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden() const { return hidden_; }
  std::size_t layers() const { return layers_; }

 private:
  std::string prefix_;
  std::size_t input_dim_ = 0;
  std::size_t hidden_ = 0;
  std::size_t layers_ = 2;
};

// Memory slot of one triple: concat(h_1, c_1, h_2, ...), length
// layers * 2 * hidden.
Var EncodeSvo(Tape &tape, const kg::KnowledgeTriple &triple, const Vocabulary &vocab,
              const StackedLstm &encoder, Var embedding);

// Top-layer final hidden state; an empty sequence gives a zero vector.
Var EncodeText(Tape &tape, std::span<const std::string> tokens, const Vocabulary &vocab,
               const StackedLstm &encoder, Var embedding);

// One slot per ranked triple, row i for triple i, computed as a single
// batch. An empty ranking yields one all-zero slot.
Var BuildMemoryBank(Tape &tape, const retrieval::RankedKnowledge &knowledge,
                    const Vocabulary &vocab, const StackedLstm &encoder, Var embedding);

}  // namespace kdmn::enc

#endif  // KDMN_ENCODERS_HPP_
