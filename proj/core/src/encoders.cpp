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

#include "kdmn/encoders.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace kdmn::enc {

Vocabulary::Vocabulary() {
  words_.emplace_back(kUnknownToken);
  index_.emplace(std::string(kUnknownToken), kUnknown);
}

std::size_t Vocabulary::Add(std::string_view word) {
  auto [it, inserted] = index_.emplace(std::string(word), words_.size());
  if (inserted) words_.emplace_back(word);
  return it->second;
}

std::size_t Vocabulary::Lookup(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? kUnknown : it->second;
}

bool Vocabulary::Contains(std::string_view word) const {
  return index_.count(std::string(word)) > 0;
}

std::vector<std::size_t> Vocabulary::Encode(std::span<const std::string> tokens) const {
  std::vector<std::size_t> ids;
  ids.reserve(tokens.size());
  for (const auto &t : tokens) ids.push_back(Lookup(t));
  return ids;
}

void Vocabulary::Write(std::ostream &out) const {
  for (std::size_t i = 1; i < words_.size(); ++i) out << words_[i] << '\n';
}

Vocabulary Vocabulary::Read(std::istream &in) {
  Vocabulary vocab;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      throw std::runtime_error("vocabulary line " + std::to_string(number) + " is empty");
    }
    if (vocab.Contains(line)) {
      throw std::runtime_error("vocabulary line " + std::to_string(number) +
                               " repeats word '" + line + "'");
    }
    vocab.Add(line);
  }
  return vocab;
}

void Vocabulary::WriteFile(const std::string &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  Write(out);
}

Vocabulary Vocabulary::ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open vocabulary: " + path);
  return Read(in);
}

std::string RelationToken(std::string_view relation) {
  return kg::NormalizeSurface(relation);
}

std::vector<std::string> TripleTokens(const kg::KnowledgeTriple &triple) {
  return {triple.head, RelationToken(triple.relation), triple.tail};
}

EmbeddingLoadResult LoadEmbeddings(const std::string &path, const Vocabulary &vocab,
                                   std::size_t dim, std::mt19937_64 &rng, double bound) {
  if (path.empty()) {
    std::istringstream none;
    return LoadEmbeddings(none, vocab, dim, rng, bound);
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding file: " + path);
  return LoadEmbeddings(in, vocab, dim, rng, bound);
}

EmbeddingLoadResult LoadEmbeddings(std::istream &in, const Vocabulary &vocab,
                                   std::size_t dim, std::mt19937_64 &rng, double bound) {
  EmbeddingLoadResult result;
  result.matrix = Tensor({vocab.size(), dim});
  std::vector<bool> seen(vocab.size(), false);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word)) continue;
    std::vector<double> values;
    double v = 0.0;
    while (fields >> v) values.push_back(v);
    if (values.size() != dim) {
      throw std::runtime_error("embedding line " + std::to_string(number) + " has " +
                               std::to_string(values.size()) + " values, expected " +
                               std::to_string(dim));
    }
    if (!vocab.Contains(word)) continue;
    const std::size_t row = vocab.Lookup(word);
    for (std::size_t j = 0; j < dim; ++j) result.matrix.at(row, j) = values[j];
    seen[row] = true;
  }
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (std::size_t row = 0; row < vocab.size(); ++row) {
    if (seen[row]) {
      ++result.covered;
      continue;
    }
    ++result.random_rows;
    for (std::size_t j = 0; j < dim; ++j) result.matrix.at(row, j) = dist(rng);
  }
  return result;
}

StackedLstm::StackedLstm(std::string prefix, std::size_t input_dim, std::size_t hidden,
                         std::size_t layers)
    : prefix_(std::move(prefix)), input_dim_(input_dim), hidden_(hidden), layers_(layers) {
  if (input_dim_ == 0 || hidden_ == 0 || layers_ == 0) {
    throw std::invalid_argument("LSTM dimensions must be positive");
  }
}

void StackedLstm::Register(ParameterStore &params) const {
  for (std::size_t l = 0; l < layers_; ++l) {
    const std::string base = prefix_ + ".l" + std::to_string(l);
    const std::size_t in = l == 0 ? input_dim_ : hidden_;
    params.Add(base + ".wx", {4 * hidden_, in});
    params.Add(base + ".wh", {4 * hidden_, hidden_});
    params.Add(base + ".b", {4 * hidden_});
  }
}

std::vector<LstmState> StackedLstm::Run(Tape &tape, std::span<const Var> steps,
                                        std::size_t batch) const {
  std::vector<num::LstmWeights> weights;
  for (std::size_t l = 0; l < layers_; ++l) {
    const std::string base = prefix_ + ".l" + std::to_string(l);
    weights.push_back(
        {tape.Param(base + ".wx"), tape.Param(base + ".wh"), tape.Param(base + ".b")});
  }
  num::Shape state_shape = batch == 0 ? num::Shape{hidden_} : num::Shape{batch, hidden_};
  std::vector<LstmState> states;
  for (std::size_t l = 0; l < layers_; ++l) {
    Var zero = tape.Constant(Tensor(state_shape));
    states.push_back({zero, zero});
  }
  for (Var x : steps) {
    Var input = x;
    for (std::size_t l = 0; l < layers_; ++l) {
      states[l] = num::LstmCell(input, states[l], weights[l]);
      input = states[l].h;
    }
  }
  return states;
}

Var EncodeSvo(Tape &tape, const kg::KnowledgeTriple &triple, const Vocabulary &vocab,
              const StackedLstm &encoder, Var embedding) {
  std::vector<Var> steps;
  for (const auto &token : TripleTokens(triple)) {
    steps.push_back(num::Row(embedding, vocab.Lookup(token)));
  }
  auto states = encoder.Run(tape, steps);
  std::vector<Var> parts;
  for (const auto &s : states) {
    parts.push_back(s.h);
    parts.push_back(s.c);
  }
  return num::Concat(parts);
}

Var EncodeText(Tape &tape, std::span<const std::string> tokens, const Vocabulary &vocab,
               const StackedLstm &encoder, Var embedding) {
  if (tokens.empty()) return tape.Constant(Tensor({encoder.hidden()}));
  std::vector<Var> steps;
  steps.reserve(tokens.size());
  for (const auto &token : tokens) steps.push_back(num::Row(embedding, vocab.Lookup(token)));
  return encoder.Run(tape, steps).back().h;
}

Var BuildMemoryBank(Tape &tape, const retrieval::RankedKnowledge &knowledge,
                    const Vocabulary &vocab, const StackedLstm &encoder, Var embedding) {
  const std::size_t slot = 2 * encoder.layers() * encoder.hidden();
  if (knowledge.empty()) return tape.Constant(Tensor({1, slot}));
  const std::size_t n = knowledge.size();
  std::vector<Var> steps;
  for (std::size_t position = 0; position < 3; ++position) {
    std::vector<std::size_t> ids;
    ids.reserve(n);
    for (const auto &ranked : knowledge.triples) {
      ids.push_back(vocab.Lookup(TripleTokens(ranked.triple)[position]));
    }
    steps.push_back(num::GatherRows(embedding, ids));
  }
  auto states = encoder.Run(tape, steps, n);
  std::vector<Var> parts;
  for (const auto &s : states) {
    parts.push_back(s.h);
    parts.push_back(s.c);
  }
  return num::ConcatCols(parts);
}

}  // namespace kdmn::enc
