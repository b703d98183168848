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

#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "kdmn/gradcheck.hpp"
#include "test_support.hpp"

namespace kdmn::enc {
namespace {

using kg::KnowledgeTriple;

Vocabulary SmallVocab() {
  Vocabulary v;
  for (const char *w : {"giraffe", "atlocation", "zoo", "isa", "animal", "tall"}) v.Add(w);
  return v;
}

struct Fixture {
  Vocabulary vocab = SmallVocab();
  ParameterStore params;
  StackedLstm lstm;

  explicit Fixture(std::size_t hidden, std::size_t word = 5, double bound = 0.5) {
    lstm = StackedLstm("enc", word, hidden);
    lstm.Register(params);
    params.Add("emb", {vocab.size(), word});
    std::mt19937_64 rng(21);
    params.InitUniform(rng, bound);
  }
};

TEST(VocabularyTest, UnknownIsZero) {
  Vocabulary v;
  EXPECT_EQ(v.size(), 1u);
  EXPECT_EQ(v.Word(0), "<unk>");
  EXPECT_EQ(v.Add("cat"), 1u);
  EXPECT_EQ(v.Add("cat"), 1u);
  EXPECT_EQ(v.Lookup("dog"), Vocabulary::kUnknown);
  const std::vector<std::string> tokens = {"cat", "dog"};
  EXPECT_EQ(v.Encode(tokens), (std::vector<std::size_t>{1, 0}));
}

TEST(VocabularyTest, RoundTripAndErrors) {
  const Vocabulary v = SmallVocab();
  std::ostringstream out;
  v.Write(out);
  EXPECT_EQ(out.str().substr(0, 8), "giraffe\n");
  std::istringstream in(out.str());
  EXPECT_EQ(Vocabulary::Read(in), v);
  std::istringstream dup("a\nb\na\n");
  EXPECT_THROW(Vocabulary::Read(dup), std::runtime_error);
  std::istringstream blank("a\n\nb\n");
  EXPECT_THROW(Vocabulary::Read(blank), std::runtime_error);
}

TEST(TripleTokensTest, RelationIsLowercased) {
  EXPECT_EQ(TripleTokens({"giraffe", "AtLocation", "zoo"}),
            (std::vector<std::string>{"giraffe", "atlocation", "zoo"}));
}

TEST(LoadEmbeddingsTest, CoveredAndRandomRows) {
  const Vocabulary v = SmallVocab();
  std::istringstream file("zoo 1 2 3\nmissing 0 0 0\ngiraffe -1 -2 -3\n");
  std::mt19937_64 rng(1);
  const auto r = LoadEmbeddings(file, v, 3, rng, 0.1);
  EXPECT_EQ(r.covered, 2u);
  EXPECT_EQ(r.random_rows, v.size() - 2);
  EXPECT_EQ(r.matrix.at(v.Lookup("zoo"), 1), 2.0);
  EXPECT_EQ(r.matrix.at(v.Lookup("giraffe"), 2), -3.0);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_LE(std::abs(r.matrix.at(v.Lookup("tall"), j)), 0.1);
}

TEST(LoadEmbeddingsTest, EmptyFileAndWrongWidth) {
  const Vocabulary v = SmallVocab();
  std::mt19937_64 rng(2);
  const auto none = LoadEmbeddings(std::string(), v, 4, rng);
  EXPECT_EQ(none.covered, 0u);
  EXPECT_EQ(none.matrix.shape(), (num::Shape{v.size(), 4}));
  std::istringstream bad("zoo 1 2\n");
  EXPECT_THROW(LoadEmbeddings(bad, v, 3, rng), std::runtime_error);
}

TEST(EncodeSvoTest, SlotIsFourTimesHidden) {
  for (std::size_t hidden : {8u, 512u}) {
    Fixture f(hidden);
    Tape tape(f.params);
    Var slot = EncodeSvo(tape, {"giraffe", "AtLocation", "zoo"}, f.vocab, f.lstm,
                         tape.Param("emb"));
    EXPECT_EQ(slot.shape(), (num::Shape{4 * hidden}));
  }
}

TEST(EncodeSvoTest, ZeroEncoderGivesZeroSlot) {
  Fixture f(6);
  for (auto &e : f.params.entries()) {
    if (e.name != "emb") e.value.Fill(0.0);
  }
  Tape tape(f.params);
  Var slot = EncodeSvo(tape, {"giraffe", "IsA", "animal"}, f.vocab, f.lstm, tape.Param("emb"));
  for (double v : slot.value().data()) EXPECT_EQ(v, 0.0);
}

TEST(EncodeSvoTest, DeterministicAndUnknownWordsAllowed) {
  Fixture f(6);
  Tape tape(f.params);
  Var emb = tape.Param("emb");
  Var a = EncodeSvo(tape, {"giraffe", "IsA", "animal"}, f.vocab, f.lstm, emb);
  Var b = EncodeSvo(tape, {"giraffe", "IsA", "animal"}, f.vocab, f.lstm, emb);
  Var c = EncodeSvo(tape, {"zebra", "Eats", "grass"}, f.vocab, f.lstm, emb);
  EXPECT_EQ(a.value(), b.value());
  EXPECT_NE(a.value(), c.value());
}

TEST(EncodeSvoTest, GradientReachesEmbeddingsAndPassesCheck) {
  Fixture f(4, 3);
  const num::LossFn loss = [&](Tape &t) {
    Var slot = EncodeSvo(t, {"giraffe", "AtLocation", "zoo"}, f.vocab, f.lstm, t.Param("emb"));
    return num::Sum(num::Hadamard(slot, slot));
  };
  f.params.ZeroGrad();
  {
    Tape tape(&f.params);
    tape.Backward(loss(tape));
  }
  const Tensor &g = f.params.Grad("emb");
  for (const char *w : {"giraffe", "atlocation", "zoo"}) {
    double norm = 0.0;
    for (std::size_t j = 0; j < 3; ++j) norm += std::abs(g.at(f.vocab.Lookup(w), j));
    EXPECT_GT(norm, 0.0) << w;
  }
  double other = 0.0;
  for (std::size_t j = 0; j < 3; ++j) other += std::abs(g.at(f.vocab.Lookup("tall"), j));
  EXPECT_EQ(other, 0.0);
  EXPECT_LT(num::GradCheckParams(f.params, loss).max_relative_error, 1e-4);
}

TEST(EncodeTextTest, EmptyIsZeroVector) {
  Fixture f(7);
  Tape tape(f.params);
  Var v = EncodeText(tape, {}, f.vocab, f.lstm, tape.Param("emb"));
  EXPECT_EQ(v.value(), Tensor({7}));
}

TEST(EncodeTextTest, SingleTokenIsOneStackedStep) {
  Fixture f(5);
  Tape tape(f.params);
  Var emb = tape.Param("emb");
  const std::vector<std::string> tokens = {"tall"};
  Var got = EncodeText(tape, tokens, f.vocab, f.lstm, emb);

  Var zero = tape.Constant(Tensor({5}));
  Var x = num::Row(emb, f.vocab.Lookup("tall"));
  auto s0 = num::LstmCell(x, {zero, zero},
                          {tape.Param("enc.l0.wx"), tape.Param("enc.l0.wh"), tape.Param("enc.l0.b")});
  auto s1 = num::LstmCell(s0.h, {zero, zero},
                          {tape.Param("enc.l1.wx"), tape.Param("enc.l1.wh"), tape.Param("enc.l1.b")});
  EXPECT_EQ(got.value(), s1.h.value());
}

TEST(EncodeTextTest, Deterministic) {
  Fixture f(5);
  Tape tape(f.params);
  Var emb = tape.Param("emb");
  const std::vector<std::string> tokens = {"giraffe", "tall"};
  EXPECT_EQ(EncodeText(tape, tokens, f.vocab, f.lstm, emb).value(),
            EncodeText(tape, tokens, f.vocab, f.lstm, emb).value());
}

retrieval::RankedKnowledge Ranked(std::vector<KnowledgeTriple> triples) {
  retrieval::RankedKnowledge r;
  for (auto &t : triples) r.triples.push_back({std::move(t), 1.0});
  return r;
}

TEST(BuildMemoryBankTest, RowsMatchSingleEncodings) {
  Fixture f(6);
  Tape tape(f.params);
  Var emb = tape.Param("emb");
  const auto r = Ranked({{"giraffe", "AtLocation", "zoo"},
                         {"giraffe", "IsA", "animal"},
                         {"zoo", "HasProperty", "tall"}});
  Var bank = BuildMemoryBank(tape, r, f.vocab, f.lstm, emb);
  ASSERT_EQ(bank.shape(), (num::Shape{3, 24}));
  for (std::size_t i = 0; i < 3; ++i) {
    Var single = EncodeSvo(tape, r.triples[i].triple, f.vocab, f.lstm, emb);
    for (std::size_t j = 0; j < 24; ++j) {
      EXPECT_NEAR(bank.value().at(i, j), single.value()[j], 1e-14);
    }
  }
}

TEST(BuildMemoryBankTest, EmptyGivesOneZeroSlot) {
  Fixture f(6);
  Tape tape(f.params);
  Var bank = BuildMemoryBank(tape, {}, f.vocab, f.lstm, tape.Param("emb"));
  EXPECT_EQ(bank.value(), Tensor({1, 24}));
}

TEST(BuildMemoryBankTest, PermutingTriplesPermutesRows) {
  Fixture f(4);
  Tape tape(f.params);
  Var emb = tape.Param("emb");
  const auto a = Ranked({{"giraffe", "AtLocation", "zoo"}, {"giraffe", "IsA", "animal"}});
  const auto b = Ranked({{"giraffe", "IsA", "animal"}, {"giraffe", "AtLocation", "zoo"}});
  const Tensor ba = BuildMemoryBank(tape, a, f.vocab, f.lstm, emb).value();
  const Tensor bb = BuildMemoryBank(tape, b, f.vocab, f.lstm, emb).value();
  for (std::size_t j = 0; j < 16; ++j) {
    EXPECT_EQ(ba.at(0, j), bb.at(1, j));
    EXPECT_EQ(ba.at(1, j), bb.at(0, j));
  }
}

TEST(BuildMemoryBankTest, DefaultWidthTwentySlots) {
  Fixture f(512, 8, 0.05);
  Tape tape(f.params);
  std::vector<KnowledgeTriple> triples;
  for (int i = 0; i < 20; ++i) triples.push_back({"giraffe", "R" + std::to_string(i), "zoo"});
  Var bank = BuildMemoryBank(tape, Ranked(triples), f.vocab, f.lstm, tape.Param("emb"));
  EXPECT_EQ(bank.shape(), (num::Shape{20, 2048}));
}

}  // namespace
}  // namespace kdmn::enc
