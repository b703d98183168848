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

#include "kdmn/gradsuite.hpp"

#include <algorithm>
#include <functional>
#include <random>

#include "kdmn/autodiff.hpp"
#include "kdmn/datagen.hpp"
#include "kdmn/dataset.hpp"
#include "kdmn/encoders.hpp"
#include "kdmn/memory.hpp"
#include "kdmn/model.hpp"

namespace kdmn {
namespace {

using num::InputFn;
using num::Shape;
using num::Tape;
using num::Tensor;
using num::Var;

struct Primitive {
  std::string name;
  std::vector<Shape> shapes;
  double lo;
  double hi;
  InputFn f;
};

// Weighted sum with a distinct weight per output coordinate.
Var Reduce(Tape &t, Var y) {
  Tensor w(y.shape());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.3 + 0.17 * static_cast<double>(i % 7);
  return num::Sum(num::Hadamard(y, t.Constant(w)));
}

std::vector<Primitive> Primitives() {
  using std::span;
  return {
      {"matmul", {{3, 4}, {4, 2}}, -1.5, 1.5,
       [](Tape &t, span<const Var> x) { return Reduce(t, num::MatMul(x[0], x[1])); }},
      {"matmul_nt", {{3, 4}, {2, 4}}, -1.5, 1.5,
       [](Tape &t, span<const Var> x) { return Reduce(t, num::MatMulNT(x[0], x[1])); }},
      {"add", {{2, 3}, {2, 3}}, -1.5, 1.5,
       [](Tape &t, span<const Var> x) { return Reduce(t, num::Add(x[0], x[1])); }},
      {"add_bias", {{3, 2}, {2}}, -1.5, 1.5,
       [](Tape &t, span<const Var> x) { return Reduce(t, num::AddBias(x[0], x[1])); }},
      {"hadamard", {{5}, {5}}, -1.5, 1.5,
       [](Tape &t, span<const Var> x) { return Reduce(t, num::Hadamard(x[0], x[1])); }},
      {"scale_sum_element", {{4}}, -1.5, 1.5,
       [](Tape &, span<const Var> x) {
         return num::Add(num::Scale(num::Sum(x[0]), -0.7), num::Element(x[0], 2));
       }},
      {"tanh", {{6}}, -2.0, 2.0,
       [](Tape &t, span<const Var> x) { return Reduce(t, num::Tanh(x[0])); }},
      {"relu", {{6}}, 0.05, 1.5,
       [](Tape &t, span<const Var> x) {
         Var signs = t.Constant(Tensor::Vector({1, -1, 1, -1, 1, -1}));
         return Reduce(t, num::Relu(num::Hadamard(x[0], signs)));
       }},
      {"sigmoid", {{6}}, -3.0, 3.0,
       [](Tape &t, span<const Var> x) { return Reduce(t, num::Sigmoid(x[0])); }},
      {"softmax", {{5}}, -2.0, 2.0,
       [](Tape &t, span<const Var> x) { return Reduce(t, num::Softmax(x[0])); }},
      {"concat", {{2}, {3}}, -1.5, 1.5,
       [](Tape &t, span<const Var> x) { return Reduce(t, num::Concat({x[0], x[1], x[0]})); }},
      {"concat_cols", {{2, 2}, {2, 3}}, -1.5, 1.5,
       [](Tape &t, span<const Var> x) { return Reduce(t, num::ConcatCols({x[0], x[1]})); }},
      {"slice", {{3, 5}}, -1.5, 1.5,
       [](Tape &t, span<const Var> x) { return Reduce(t, num::Slice(x[0], 1, 3)); }},
      {"gather_rows", {{4, 3}}, -1.5, 1.5,
       [](Tape &t, span<const Var> x) {
         const std::size_t rows[] = {3, 1, 3};
         return Reduce(t, num::GatherRows(x[0], rows));
       }},
      {"row", {{4, 3}}, -1.5, 1.5,
       [](Tape &t, span<const Var> x) { return Reduce(t, num::Row(x[0], 2)); }},
      {"binary_cross_entropy", {{1}}, 0.05, 0.95,
       [](Tape &, span<const Var> x) {
         return num::Add(num::BinaryCrossEntropy(num::Element(x[0], 0), 1.0),
                         num::BinaryCrossEntropy(num::Element(x[0], 0), 0.0));
       }},
      {"lstm_cell", {{3}, {2}, {2}, {8, 3}, {8, 2}, {8}}, -1.0, 1.0,
       [](Tape &t, span<const Var> x) {
         num::LstmState s = num::LstmCell(x[0], {x[1], x[2]}, {x[3], x[4], x[5]});
         return num::Add(Reduce(t, s.h), Reduce(t, s.c));
       }},
      {"lstm_cell_batch", {{2, 3}, {2, 2}, {2, 2}, {8, 3}, {8, 2}, {8}}, -1.0, 1.0,
       [](Tape &t, span<const Var> x) {
         num::LstmState s = num::LstmCell(x[0], {x[1], x[2]}, {x[3], x[4], x[5]});
         return num::Add(Reduce(t, s.h), Reduce(t, s.c));
       }},
  };
}

Tensor Uniform(const Shape &shape, std::mt19937_64 &rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(shape);
  for (double &v : t.data()) v = dist(rng);
  return t;
}

void Worst(num::GradCheckResult &into, const num::GradCheckResult &r) {
  const std::size_t seen = into.coordinates + r.coordinates;
  const std::size_t kinks = into.kinks + r.kinks;
  if (into.coordinates == 0 || r.max_relative_error > into.max_relative_error) into = r;
  into.coordinates = seen;
  into.kinks = kinks;
}

GradSuiteEntry EncoderEntry(const GradSuiteOptions &o) {
  enc::Vocabulary vocab;
  for (const char *w : {"candle", "usedfor", "light", "cake"}) vocab.Add(w);
  num::ParameterStore params;
  enc::StackedLstm lstm("triple", 4, o.hidden);
  lstm.Register(params);
  params.Add("embedding", {vocab.size(), 4});
  std::mt19937_64 rng(o.seed);
  params.InitUniform(rng, 1.0);
  const num::LossFn f = [&](Tape &t) {
    Var slot = enc::EncodeSvo(t, {"candle", "UsedFor", "light"}, vocab, lstm,
                              t.Param("embedding"));
    return Reduce(t, slot);
  };
  return {"encode_svo", o.model_epsilon, num::GradCheckParams(params, f, o.model_epsilon)};
}

GradSuiteEntry MemoryEntry(const GradSuiteOptions &o) {
  mem::MemoryDims dims;
  dims.slot = 6;
  dims.image = 4;
  dims.question = 3;
  dims.answer = 3;
  dims.attention = 5;
  num::ParameterStore params;
  mem::RegisterMemoryParams(params, dims);
  std::mt19937_64 rng(o.seed + 1);
  params.InitUniform(rng, 0.8);
  // Keeps the update's ReLU units away from their kink.
  params.Value("mem.b3").Fill(0.7);
  const Tensor bank = Uniform({o.top_n, dims.slot}, rng, -1, 1);
  const Tensor image = Uniform({dims.image}, rng, -1, 1);
  const Tensor question = Uniform({dims.question}, rng, -1, 1);
  const Tensor answer = Uniform({dims.answer}, rng, -1, 1);
  const num::LossFn f = [&](Tape &t) {
    auto w = mem::MemoryWeights::Bind(t);
    Var q = mem::MakeQuery(t.Constant(image), t.Constant(question), t.Constant(answer), w);
    return Reduce(t, mem::RunEpisodes(t.Constant(bank), q, 2, w).memory);
  };
  return {"run_episodes(T=2)", o.primitive_epsilon,
          num::GradCheckParams(params, f, o.primitive_epsilon)};
}

std::vector<GradSuiteEntry> ModelEntries(const GradSuiteOptions &o) {
  datagen::ToyWorldConfig world_config;
  world_config.scenes = 40;
  const auto world = datagen::MakeToyWorld(world_config, o.seed);
  const auto records =
      datagen::GenerateDataset(world.scenes, world.graph, o.model_contexts, o.seed).records;
  model::FeatureTable features;
  for (const auto &s : world.scenes) {
    features.Set(s.image_id, model::PresenceFeatures(s.objects, world.graph));
  }
  retrieval::RetrievalConfig rc;
  rc.top_n = o.top_n;
  const auto contexts = model::PrepareContexts(records, world.graph, features, rc);
  const auto vocab = model::BuildVocabulary(world.graph, contexts);

  model::ModelDims dims;
  dims.word = dims.hidden = dims.common = dims.attention = o.hidden;
  dims.image = features.dim();
  std::vector<GradSuiteEntry> out;
  for (model::Mode mode : {model::Mode::kFull, model::Mode::kNoMem, model::Mode::kNoKG}) {
    model::KdmnModel m(dims, mode, vocab, o.seed, o.init_bound);
    GradSuiteEntry entry{"kdmn_loss(" + std::string(model::ModeName(mode)) + ")",
                         o.model_epsilon, {}};
    for (const auto &c : contexts) {
      const num::LossFn f = [&](Tape &t) { return m.ContextLoss(t, c); };
      Worst(entry.result,
            num::GradCheckParams(m.params(), f, o.model_epsilon, o.max_per_param, nullptr,
                                       true));
    }
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace

std::vector<GradSuiteEntry> RunGradientSuite(const GradSuiteOptions &options) {
  std::vector<GradSuiteEntry> entries;
  std::mt19937_64 rng(options.seed);
  for (const auto &p : Primitives()) {
    GradSuiteEntry entry{p.name, options.primitive_epsilon, {}};
    for (std::size_t k = 0; k < options.primitive_points; ++k) {
      std::vector<Tensor> point;
      for (const auto &s : p.shapes) point.push_back(Uniform(s, rng, p.lo, p.hi));
      Worst(entry.result, num::GradCheck(p.f, point, options.primitive_epsilon));
    }
    entries.push_back(std::move(entry));
  }
  entries.push_back(EncoderEntry(options));
  entries.push_back(MemoryEntry(options));
  for (auto &e : ModelEntries(options)) entries.push_back(std::move(e));
  return entries;
}

double MaxRelativeError(const std::vector<GradSuiteEntry> &entries) {
  double worst = 0.0;
  for (const auto &e : entries) worst = std::max(worst, e.result.max_relative_error);
  return worst;
}

}  // namespace kdmn
