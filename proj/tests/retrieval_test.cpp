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

#include "kdmn/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace kdmn::retrieval {
namespace {

using testing::GraphFromText;
using testing::PathGraph;

WeightedSubgraph PathSubgraph(double wa, double wb, double wc) {
  WeightedSubgraph sub;
  sub.edges = PathGraph().triples();
  sub.nodes = {{"a", wa}, {"b", wb}, {"c", wc}};
  return sub;
}

// All-pairs hop counts by Floyd-Warshall, then direct summation.
ScoreMap OracleScores(const WeightedSubgraph &sub, const RetrievalConfig &config) {
  std::vector<std::string> names;
  for (const auto &[n, w] : sub.nodes) names.push_back(n);
  const std::size_t n = names.size();
  const auto index = [&](const std::string &s) {
    return static_cast<std::size_t>(std::find(names.begin(), names.end(), s) - names.begin());
  };
  constexpr std::size_t kInf = 1u << 20;
  std::vector<std::vector<std::size_t>> d(n, std::vector<std::size_t>(n, kInf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (const auto &t : sub.edges) {
    const std::size_t a = index(t.head), b = index(t.tail);
    if (a != b) d[a][b] = d[b][a] = 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  ScoreMap scores;
  for (std::size_t i = 0; i < n; ++i) {
    double s = sub.nodes.at(names[i]);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || d[i][j] > config.max_hops) continue;
      s += std::pow(config.decay, static_cast<double>(d[i][j])) * sub.nodes.at(names[j]);
    }
    scores[names[i]] = s;
  }
  return scores;
}

WeightedSubgraph RandomSubgraph(std::mt19937_64 &rng) {
  const std::size_t nodes = 1 + rng() % 12;
  const std::size_t edges = rng() % 21;
  std::uniform_real_distribution<double> weight(0.0, 2.0);
  WeightedSubgraph sub;
  for (std::size_t i = 0; i < nodes; ++i) {
    sub.nodes["n" + std::to_string(i)] = rng() % 4 == 0 ? 0.0 : weight(rng);
  }
  for (std::size_t e = 0; e < edges; ++e) {
    const std::string h = "n" + std::to_string(rng() % nodes);
    const std::string t = "n" + std::to_string(rng() % nodes);
    sub.edges.push_back({h, "R" + std::to_string(rng() % 3), t});
  }
  std::sort(sub.edges.begin(), sub.edges.end());
  sub.edges.erase(std::unique(sub.edges.begin(), sub.edges.end()), sub.edges.end());
  return sub;
}

TEST(RetrievalConfigTest, Validate) {
  RetrievalConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.decay = 1.0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c.decay = 0.0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = {};
  c.max_hops = 0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = {};
  c.top_n = 0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = {};
  c.visual_mass = 0.0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
}

TEST(ExtractKeywordsTest, Examples) {
  EXPECT_EQ(ExtractKeywords("What is the giraffe eating?"),
            (std::vector<std::string>{"giraffe", "eating"}));
  EXPECT_TRUE(ExtractKeywords("").empty());
  EXPECT_TRUE(ExtractKeywords("the the the").empty());
  EXPECT_EQ(ExtractKeywords("Dog, dog; DOG"), (std::vector<std::string>{"dog", "dog", "dog"}));
}

TEST(TokenizeTest, SplitsOnNonAlphanumeric) {
  EXPECT_EQ(Tokenize("hot-dog's 2x"), (std::vector<std::string>{"hot", "dog", "s", "2x"}));
}

TEST(BuildContextQueryTest, LinksObjectsAndKeywords) {
  auto g = GraphFromText("giraffe\tAtLocation\tzoo\nhot_dog\tIsA\tfood\n");
  std::vector<DetectedObject> objects = {{"Giraffe", 300}, {"unicorn", 50}};
  const auto q = BuildContextQuery(g, objects, "Is the hot dog at the zoo?");
  ASSERT_EQ(q.visual_mentions.size(), 1u);
  EXPECT_EQ(q.visual_mentions[0].entity, "giraffe");
  EXPECT_EQ(q.visual_mentions[0].weight, 300.0);
  ASSERT_EQ(q.textual_mentions.size(), 2u);
  EXPECT_EQ(q.textual_mentions[0].entity, "hot_dog");
  EXPECT_EQ(q.textual_mentions[1].entity, "zoo");
}

TEST(InitNodeWeightsTest, Examples) {
  ContextQuery q;
  q.visual_mentions = {{"giraffe", "giraffe", kg::MentionSource::kVisual, 300, 0, 0},
                       {"tree", "tree", kg::MentionSource::kVisual, 100, 0, 0}};
  auto w = InitNodeWeights(q);
  EXPECT_DOUBLE_EQ(w.at("giraffe"), 0.75);
  EXPECT_DOUBLE_EQ(w.at("tree"), 0.25);

  ContextQuery t;
  t.textual_mentions = {{"eating", "eating", kg::MentionSource::kTextual, 1, 0, 1}};
  EXPECT_EQ(InitNodeWeights(t), (NodeWeights{{"eating", 1.0}}));
  EXPECT_TRUE(InitNodeWeights(ContextQuery{}).empty());
}

TEST(InitNodeWeightsTest, ZeroAreasAreUniformAndRepeatsAccumulate) {
  ContextQuery q;
  q.visual_mentions = {{"x", "x", kg::MentionSource::kVisual, 0, 0, 0},
                       {"y", "y", kg::MentionSource::kVisual, 0, 0, 0}};
  q.textual_mentions = {{"x", "x", kg::MentionSource::kTextual, 1, 0, 1},
                        {"z", "z", kg::MentionSource::kTextual, 1, 1, 1}};
  const auto w = InitNodeWeights(q, 3.0);
  EXPECT_DOUBLE_EQ(w.at("x"), 1.5 + 0.5);
  EXPECT_DOUBLE_EQ(w.at("y"), 1.5);
  EXPECT_DOUBLE_EQ(w.at("z"), 0.5);
}

TEST(InitNodeWeightsTest, MassesSumAsConfigured) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> area(0.0, 100.0);
  for (int trial = 0; trial < 100; ++trial) {
    ContextQuery q;
    const std::size_t nv = 1 + rng() % 5, nt = 1 + rng() % 5;
    for (std::size_t i = 0; i < nv; ++i)
      q.visual_mentions.push_back({"", "v" + std::to_string(i), kg::MentionSource::kVisual,
                                   area(rng), 0, 0});
    for (std::size_t i = 0; i < nt; ++i)
      q.textual_mentions.push_back({"", "t" + std::to_string(i), kg::MentionSource::kTextual,
                                    1.0, i, 1});
    double total = 0.0;
    for (const auto &[e, v] : InitNodeWeights(q, 2.0)) total += v;
    EXPECT_NEAR(total, 3.0, 1e-12);
  }
}

TEST(BuildFirstOrderSubgraphTest, Examples) {
  auto g = GraphFromText("giraffe\tAtLocation\tzoo\nzoo\tIsA\tplace\n");
  auto one = BuildFirstOrderSubgraph(g, NodeWeights{{"giraffe", 1.0}});
  ASSERT_EQ(one.edges.size(), 1u);
  EXPECT_EQ(one.edges[0], (KnowledgeTriple{"giraffe", "AtLocation", "zoo"}));
  EXPECT_EQ(one.nodes, (NodeWeights{{"giraffe", 1.0}, {"zoo", 0.0}}));

  EXPECT_TRUE(BuildFirstOrderSubgraph(g, NodeWeights{}).empty());

  auto both = BuildFirstOrderSubgraph(g, NodeWeights{{"giraffe", 0.5}, {"zoo", 0.5}});
  EXPECT_EQ(both.edges, g.triples());
  EXPECT_EQ(both.nodes.size(), 3u);
}

TEST(BuildFirstOrderSubgraphTest, EveryEdgeTouchesACandidate) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    kg::KnowledgeGraph g;
    for (int i = 0; i < 25; ++i)
      g.Add("e" + std::to_string(rng() % 10), "R", "e" + std::to_string(rng() % 10));
    NodeWeights cand;
    for (int i = 0; i < 3; ++i) cand["e" + std::to_string(rng() % 10)] = 1.0;
    const auto sub = BuildFirstOrderSubgraph(g, cand);
    std::size_t expected = 0;
    for (const auto &t : g.triples()) expected += cand.count(t.head) || cand.count(t.tail);
    EXPECT_EQ(sub.edges.size(), expected);
    for (const auto &t : sub.edges) {
      EXPECT_TRUE(cand.count(t.head) || cand.count(t.tail));
      EXPECT_TRUE(sub.nodes.count(t.head) && sub.nodes.count(t.tail));
    }
  }
}

TEST(PropagateScoresTest, PathExample) {
  const auto s = PropagateScores(PathSubgraph(1, 1, 1), RetrievalConfig{});
  EXPECT_DOUBLE_EQ(s.at("b"), 2.0);
  EXPECT_DOUBLE_EQ(s.at("a"), 1.75);
  EXPECT_DOUBLE_EQ(s.at("c"), 1.75);
}

TEST(PropagateScoresTest, IsolatedAndZero) {
  WeightedSubgraph iso;
  iso.nodes = {{"x", 0.7}};
  iso.edges = {{"x", "R", "x"}};
  EXPECT_DOUBLE_EQ(PropagateScores(iso, RetrievalConfig{}).at("x"), 0.7);
  for (const auto &[n, s] : PropagateScores(PathSubgraph(0, 0, 0), RetrievalConfig{})) {
    EXPECT_EQ(s, 0.0) << n;
  }
}

TEST(PropagateScoresTest, HopLimitCutsContributions) {
  RetrievalConfig c;
  c.max_hops = 1;
  const auto s = PropagateScores(PathSubgraph(1, 0, 0), c);
  EXPECT_DOUBLE_EQ(s.at("b"), 0.5);
  EXPECT_DOUBLE_EQ(s.at("c"), 0.0);
}

TEST(PropagateScoresTest, MatchesAllPairsOracle) {
  std::mt19937_64 rng(8);
  const double decays[] = {0.3, 0.5, 0.9};
  for (int trial = 0; trial < 200; ++trial) {
    const auto sub = RandomSubgraph(rng);
    RetrievalConfig c;
    c.decay = decays[trial % 3];
    c.max_hops = 1 + rng() % 4;
    const auto got = PropagateScores(sub, c);
    const auto want = OracleScores(sub, c);
    ASSERT_EQ(got.size(), want.size());
    for (const auto &[n, v] : want) EXPECT_NEAR(got.at(n), v, 1e-9) << n;
  }
}

TEST(PropagateScoresTest, ScoresDominateOwnWeightAndRiseWithDecay) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const auto sub = RandomSubgraph(rng);
    RetrievalConfig lo, hi;
    lo.decay = 0.3;
    hi.decay = 0.9;
    const auto a = PropagateScores(sub, lo);
    const auto b = PropagateScores(sub, hi);
    for (const auto &[n, w] : sub.nodes) {
      EXPECT_GE(a.at(n), w);
      EXPECT_GE(b.at(n), a.at(n) - 1e-12);
    }
  }
}

TEST(ScoreEdgesTest, Examples) {
  const auto sub = PathSubgraph(1, 1, 1);
  const auto w = ScoreEdges(sub, PropagateScores(sub, RetrievalConfig{}));
  EXPECT_DOUBLE_EQ(w.at({"a", "RelatedTo", "b"}), 3.75);
  EXPECT_DOUBLE_EQ(w.at({"b", "RelatedTo", "c"}), 3.75);

  for (const auto &[t, v] : ScoreEdges(sub, ScoreMap{{"a", 0}, {"b", 0}, {"c", 0}})) {
    EXPECT_EQ(v, 0.0);
  }
  WeightedSubgraph single;
  single.edges = {{"x", "R", "y"}};
  EXPECT_EQ(ScoreEdges(single, ScoreMap{{"x", 2}, {"y", 3}}).at({"x", "R", "y"}), 5.0);
}

TEST(SelectTopNTest, Examples) {
  const auto sub = PathSubgraph(1, 1, 1);
  const auto w = ScoreEdges(sub, PropagateScores(sub, RetrievalConfig{}));
  const auto top1 = SelectTopN(w, 1);
  ASSERT_EQ(top1.size(), 1u);
  EXPECT_EQ(top1.triples[0].triple.head, "a");
  EXPECT_EQ(SelectTopN(w, 10).size(), 2u);
  EXPECT_TRUE(SelectTopN(EdgeWeights{}, 3).empty());
  EXPECT_THROW(SelectTopN(w, 0), std::invalid_argument);
}

TEST(SelectTopNTest, MatchesExhaustiveSort) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 200; ++trial) {
    EdgeWeights w;
    for (std::size_t i = 0, n = rng() % 20; i < n; ++i) {
      // Few distinct values so ties are common.
      w[{"h" + std::to_string(rng() % 5), "R", "t" + std::to_string(rng() % 5)}] =
          static_cast<double>(rng() % 4);
    }
    std::vector<RankedTriple> all;
    for (const auto &[t, v] : w) all.push_back({t, v});
    std::stable_sort(all.begin(), all.end(),
                     [](const RankedTriple &a, const RankedTriple &b) { return a.weight > b.weight; });
    const std::size_t n = 1 + rng() % 10;
    all.resize(std::min(n, all.size()));
    EXPECT_EQ(SelectTopN(w, n).triples, all);
  }
}

TEST(RetrieveTest, PathFixtureEndToEnd) {
  const auto g = PathGraph();
  std::vector<DetectedObject> objects = {{"a", 10}, {"b", 10}, {"c", 10}};
  RetrievalConfig c;
  c.visual_mass = 3.0;
  const auto r = Retrieve(g, BuildContextQuery(g, objects, "", c), c);
  ASSERT_EQ(r.size(), 2u);
  for (const auto &t : r.triples) EXPECT_DOUBLE_EQ(t.weight, 3.75);
  EXPECT_EQ(r.triples[0].triple.head, "a");
}

TEST(RetrieveTest, LengthAndDeterminism) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    kg::KnowledgeGraph g;
    for (int i = 0; i < 30; ++i)
      g.Add("e" + std::to_string(rng() % 12), "R" + std::to_string(rng() % 2),
            "e" + std::to_string(rng() % 12));
    std::vector<DetectedObject> objects = {{"e" + std::to_string(rng() % 12), 5.0}};
    RetrievalConfig c;
    c.top_n = 1 + rng() % 8;
    const auto q = BuildContextQuery(g, objects, "e3 and e4", c);
    const auto r = Retrieve(g, q, c);
    const auto sub = BuildFirstOrderSubgraph(g, q, c.visual_mass);
    EXPECT_EQ(r.size(), std::min(c.top_n, sub.edges.size()));
    for (std::size_t i = 1; i < r.size(); ++i) {
      EXPECT_GE(r.triples[i - 1].weight, r.triples[i].weight);
    }
    EXPECT_EQ(Retrieve(g, q, c), r);
  }
}

}  // namespace
}  // namespace kdmn::retrieval
