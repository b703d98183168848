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

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "kdmn/gradcheck.hpp"
#include "test_support.hpp"

namespace kdmn::mem {
namespace {

using testing::RandomTensor;

MemoryDims Small(std::size_t slot = 6, std::size_t attention = 4) {
  MemoryDims d;
  d.slot = slot;
  d.image = 3;
  d.question = 2;
  d.answer = 2;
  d.attention = attention;
  return d;
}

ParameterStore RandomParams(const MemoryDims &dims, std::uint64_t seed, double bound = 0.6) {
  ParameterStore p;
  RegisterMemoryParams(p, dims);
  std::mt19937_64 rng(seed);
  p.InitUniform(rng, bound);
  return p;
}

TEST(RegisterMemoryParamsTest, Shapes) {
  const auto p = RandomParams(Small(6, 4), 1);
  EXPECT_EQ(p.Value("mem.w1").shape(), (num::Shape{6, 7}));
  EXPECT_EQ(p.Value("mem.w2").shape(), (num::Shape{4, 18}));
  EXPECT_EQ(p.Value("mem.w").shape(), (num::Shape{4}));
  EXPECT_EQ(p.Value("mem.w3").shape(), (num::Shape{6, 18}));
  EXPECT_EQ(p.Value("mem.b3").shape(), (num::Shape{6}));
}

TEST(MakeQueryTest, ZeroWeightsGiveZero) {
  ParameterStore p;
  RegisterMemoryParams(p, Small());
  Tape t(p);
  auto w = MemoryWeights::Bind(t);
  std::mt19937_64 rng(2);
  Var q = MakeQuery(t.Constant(RandomTensor({3}, rng)), t.Constant(RandomTensor({2}, rng)),
                    t.Constant(RandomTensor({2}, rng)), w);
  EXPECT_EQ(q.value(), Tensor({6}));
}

TEST(MakeQueryTest, RangeAndSaturation) {
  auto p = RandomParams(Small(), 3, 3.0);
  std::mt19937_64 rng(4);
  {
    Tape t(p);
    auto w = MemoryWeights::Bind(t);
    for (int i = 0; i < 50; ++i) {
      Var q = MakeQuery(t.Constant(RandomTensor({3}, rng, -5, 5)),
                        t.Constant(RandomTensor({2}, rng, -5, 5)),
                        t.Constant(RandomTensor({2}, rng, -5, 5)), w);
      for (double v : q.value().data()) EXPECT_LE(std::abs(v), 1.0);
    }
  }
  p.Value("mem.w1").Fill(0.0);
  p.Value("mem.b1").Fill(20.0);
  Tape t(p);
  Var q = MakeQuery(t.Constant(Tensor({3})), t.Constant(Tensor({2})), t.Constant(Tensor({2})),
                    MemoryWeights::Bind(t));
  for (double v : q.value().data()) EXPECT_NEAR(v, 1.0, 1e-15);
}

TEST(MakeQueryTest, ConcatenationOrderIsImageQuestionAnswer) {
  ParameterStore p;
  RegisterMemoryParams(p, Small());
  // Row k of W1 picks input coordinate k.
  for (std::size_t k = 0; k < 6; ++k) p.Value("mem.w1").at(k, k) = 1.0;
  Tape t(p);
  Var q = MakeQuery(t.Constant(Tensor::Vector({0.1, 0.2, 0.3})),
                    t.Constant(Tensor::Vector({0.4, 0.5})),
                    t.Constant(Tensor::Vector({0.6, 0.7})), MemoryWeights::Bind(t));
  for (std::size_t k = 0; k < 6; ++k) {
    EXPECT_DOUBLE_EQ(q.value()[k], std::tanh(0.1 * static_cast<double>(k + 1)));
  }
}

TEST(MakeQueryTest, DimensionMismatchThrows) {
  auto p = RandomParams(Small(), 5);
  Tape t(p);
  EXPECT_THROW(MakeQuery(t.Constant(Tensor({4})), t.Constant(Tensor({2})),
                         t.Constant(Tensor({2})), MemoryWeights::Bind(t)),
               num::DimensionError);
}

TEST(AttendTest, SingleSlotIsCopiedExactly) {
  auto p = RandomParams(Small(), 6);
  std::mt19937_64 rng(7);
  Tape t(p);
  auto w = MemoryWeights::Bind(t);
  const Tensor slot = RandomTensor({1, 6}, rng);
  const auto r = Attend(t.Constant(slot), t.Constant(RandomTensor({6}, rng)),
                        t.Constant(RandomTensor({6}, rng)), w);
  EXPECT_EQ(r.alpha.value(), Tensor::Vector({1.0}));
  for (std::size_t k = 0; k < 6; ++k) EXPECT_EQ(r.context.value()[k], slot[k]);
}

TEST(AttendTest, IdenticalSlotsShareEqually) {
  auto p = RandomParams(Small(), 8);
  std::mt19937_64 rng(9);
  const Tensor row = RandomTensor({6}, rng);
  Tensor bank({2, 6});
  for (std::size_t k = 0; k < 6; ++k) bank.at(0, k) = bank.at(1, k) = row[k];
  Tape t(p);
  const auto r = Attend(t.Constant(bank), t.Constant(RandomTensor({6}, rng)),
                        t.Constant(RandomTensor({6}, rng)), MemoryWeights::Bind(t));
  EXPECT_DOUBLE_EQ(r.alpha.value()[0], 0.5);
  EXPECT_DOUBLE_EQ(r.alpha.value()[1], 0.5);
}

TEST(AttendTest, EngineeredLogitsGiveThreeToOne) {
  const MemoryDims d = Small(1, 1);
  ParameterStore p;
  RegisterMemoryParams(p, d);
  p.Value("mem.w2").at(0, 0) = 1.0;  // slot block only
  p.Value("mem.w")[0] = std::log(3.0) / std::tanh(0.5);
  Tape t(p);
  const auto r = Attend(t.Constant(Tensor::Matrix(2, 1, {0.5, 0.0})),
                        t.Constant(Tensor::Vector({0.3})), t.Constant(Tensor::Vector({-0.2})),
                        MemoryWeights::Bind(t));
  EXPECT_NEAR(r.alpha.value()[0], 0.75, 1e-15);
  EXPECT_NEAR(r.alpha.value()[1], 0.25, 1e-15);
  EXPECT_NEAR(r.context.value()[0], 0.375, 1e-15);
}

TEST(AttendTest, SplitProjectionMatchesFullConcatenation) {
  const MemoryDims d = Small(5, 3);
  auto p = RandomParams(d, 10);
  std::mt19937_64 rng(11);
  const Tensor bank = RandomTensor({4, 5}, rng);
  const Tensor m = RandomTensor({5}, rng), q = RandomTensor({5}, rng);
  Tape t(p);
  const auto r = Attend(t.Constant(bank), t.Constant(m), t.Constant(q), MemoryWeights::Bind(t));
  const Tensor &w2 = p.Value("mem.w2");
  const Tensor &b2 = p.Value("mem.b2");
  const Tensor &w = p.Value("mem.w");
  std::vector<double> logits(4);
  for (std::size_t i = 0; i < 4; ++i) {
    std::vector<double> z;
    for (std::size_t k = 0; k < 5; ++k) z.push_back(bank.at(i, k));
    for (std::size_t k = 0; k < 5; ++k) z.push_back(m[k]);
    for (std::size_t k = 0; k < 5; ++k) z.push_back(q[k]);
    double s = 0.0;
    for (std::size_t a = 0; a < 3; ++a) {
      double u = b2[a];
      for (std::size_t j = 0; j < 15; ++j) u += w2.at(a, j) * z[j];
      s += w[a] * std::tanh(u);
    }
    logits[i] = s;
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double &l : logits) total += (l = std::exp(l - mx));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(r.alpha.value()[i], logits[i] / total, 1e-12);
}

TEST(AttendTest, RandomDrawInvariants) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 8;
    auto p = RandomParams(Small(), 100 + trial, 1.5);
    const Tensor bank = RandomTensor({n, 6}, rng, -2, 2);
    Tape t(p);
    const auto r = Attend(t.Constant(bank), t.Constant(RandomTensor({6}, rng)),
                          t.Constant(RandomTensor({6}, rng)), MemoryWeights::Bind(t));
    double sum = 0.0;
    for (double a : r.alpha.value().data()) {
      EXPECT_GE(a, 0.0);
      sum += a;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    for (std::size_t k = 0; k < 6; ++k) {
      double lo = bank.at(0, k), hi = bank.at(0, k);
      for (std::size_t i = 1; i < n; ++i) {
        lo = std::min(lo, bank.at(i, k));
        hi = std::max(hi, bank.at(i, k));
      }
      EXPECT_GE(r.context.value()[k], lo - 1e-12);
      EXPECT_LE(r.context.value()[k], hi + 1e-12);
    }
  }
}

TEST(UpdateMemoryTest, Examples) {
  ParameterStore p;
  RegisterMemoryParams(p, Small());
  std::mt19937_64 rng(15);
  const Tensor m = RandomTensor({6}, rng), c = RandomTensor({6}, rng), q = RandomTensor({6}, rng);
  auto run = [&] {
    Tape t(p);
    return UpdateMemory(t.Constant(m), t.Constant(c), t.Constant(q), MemoryWeights::Bind(t))
        .value();
  };
  EXPECT_EQ(run(), Tensor({6}));
  p.Value("mem.b3").Fill(-1.0);
  EXPECT_EQ(run(), Tensor({6}));
  p.Value("mem.b3").Fill(1.0);
  EXPECT_EQ(run(), Tensor::Filled({6}, 1.0));
}

TEST(RunEpisodesTest, OneEpisodeIsAttendThenUpdate) {
  auto p = RandomParams(Small(), 16);
  std::mt19937_64 rng(17);
  const Tensor bank = RandomTensor({3, 6}, rng), q = RandomTensor({6}, rng, -0.9, 0.9);
  Tape t(p);
  auto w = MemoryWeights::Bind(t);
  Var bv = t.Constant(bank), qv = t.Constant(q);
  const auto state = RunEpisodes(bv, qv, 1, w);
  const auto att = Attend(bv, qv, qv, w);
  EXPECT_EQ(state.memory.value(), UpdateMemory(qv, att.context, qv, w).value());
  EXPECT_EQ(state.iterations, 1u);
  ASSERT_EQ(state.attention.size(), 1u);
  EXPECT_EQ(state.attention[0], att.alpha.value());
}

TEST(RunEpisodesTest, TrajectoryLengthAndNonNegativeMemory) {
  auto p = RandomParams(Small(), 18);
  std::mt19937_64 rng(19);
  Tape t(p);
  auto w = MemoryWeights::Bind(t);
  for (std::size_t episodes = 1; episodes <= 4; ++episodes) {
    const auto s = RunEpisodes(t.Constant(RandomTensor({4, 6}, rng)),
                               t.Constant(RandomTensor({6}, rng)), episodes, w);
    EXPECT_EQ(s.attention.size(), episodes);
    for (double v : s.memory.value().data()) EXPECT_GE(v, 0.0);
  }
  EXPECT_THROW(RunEpisodes(t.Constant(Tensor({1, 6})), t.Constant(Tensor({6})), 0, w),
               std::invalid_argument);
}

TEST(RunEpisodesTest, ZeroUpdateIsAbsorbing) {
  auto p = RandomParams(Small(), 20);
  p.Value("mem.w3").Fill(0.0);
  p.Value("mem.b3").Fill(0.0);
  std::mt19937_64 rng(21);
  Tape t(p);
  for (std::size_t episodes : {1u, 2u, 5u}) {
    const auto s = RunEpisodes(t.Constant(RandomTensor({3, 6}, rng)),
                               t.Constant(RandomTensor({6}, rng)), episodes,
                               MemoryWeights::Bind(t));
    EXPECT_EQ(s.memory.value(), Tensor({6}));
  }
}

TEST(RunEpisodesTest, PermutingSlotsPermutesAttention) {
  auto p = RandomParams(Small(), 22);
  std::mt19937_64 rng(23);
  const Tensor bank = RandomTensor({3, 6}, rng), q = RandomTensor({6}, rng);
  Tensor perm({3, 6});
  const std::size_t order[] = {2, 0, 1};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 6; ++k) perm.at(i, k) = bank.at(order[i], k);
  Tape t(p);
  auto w = MemoryWeights::Bind(t);
  const auto a = RunEpisodes(t.Constant(bank), t.Constant(q), 2, w);
  const auto b = RunEpisodes(t.Constant(perm), t.Constant(q), 2, w);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(a.memory.value()[k], b.memory.value()[k], 1e-14);
  for (std::size_t e = 0; e < 2; ++e)
    for (std::size_t i = 0; i < 3; ++i)
      EXPECT_NEAR(b.attention[e][i], a.attention[e][order[i]], 1e-14);
}

TEST(RunEpisodesTest, PreparedBankMatchesDirect) {
  auto p = RandomParams(Small(), 24);
  std::mt19937_64 rng(25);
  Tape t(p);
  auto w = MemoryWeights::Bind(t);
  Var bank = t.Constant(RandomTensor({4, 6}, rng));
  Var q = t.Constant(RandomTensor({6}, rng));
  const auto direct = RunEpisodes(bank, q, 2, w);
  const auto prepared = RunEpisodes(PrepareBank(bank, w), q, 2, w);
  for (std::size_t k = 0; k < 6; ++k) {
    EXPECT_NEAR(direct.memory.value()[k], prepared.memory.value()[k], 1e-14);
  }
}

TEST(RunEpisodesTest, GradientCheckTwoEpisodes) {
  const MemoryDims d = Small(5, 3);
  auto p = RandomParams(d, 26, 0.8);
  std::mt19937_64 rng(27);
  const Tensor bank = RandomTensor({3, 5}, rng);
  const Tensor img = RandomTensor({3}, rng), qs = RandomTensor({2}, rng), an = RandomTensor({2}, rng);
  // Bias the update so the ReLU stays away from its kink.
  p.Value("mem.b3").Fill(0.7);
  const num::LossFn loss = [&](Tape &t) {
    auto w = MemoryWeights::Bind(t);
    Var q = MakeQuery(t.Constant(img), t.Constant(qs), t.Constant(an), w);
    const auto s = RunEpisodes(t.Constant(bank), q, 2, w);
    Tensor coef({5});
    for (std::size_t k = 0; k < 5; ++k) coef[k] = 0.5 + 0.3 * static_cast<double>(k);
    return num::Sum(num::Hadamard(s.memory, t.Constant(coef)));
  };
  const auto r = num::GradCheckParams(p, loss);
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst;
}

}  // namespace
}  // namespace kdmn::mem
