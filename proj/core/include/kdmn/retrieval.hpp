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

// Candidate knowledge retrieval for one question-answering context.
//
// The pipeline is:
//   1. link detected objects and question keywords to graph entities and
//      give each an initial weight (box area for objects, uniform for
//      keywords);
//   2. cut the first-order subgraph: every triple touching a linked entity;
//   3. score each subgraph node as its own weight plus the weights of the
//      other nodes attenuated by decay^hops, hops being the undirected
//      shortest-path distance inside the subgraph (capped at max_hops);
//   4. weigh each edge as the sum of its endpoint scores and keep the top N.

#ifndef KDMN_RETRIEVAL_HPP_
#define KDMN_RETRIEVAL_HPP_

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "kdmn/kg.hpp"

namespace kdmn::retrieval {

using kg::EntityMention;
using kg::KnowledgeGraph;
using kg::KnowledgeTriple;

struct RetrievalConfig {
  double decay = 0.5;
  std::size_t max_hops = 3;
  std::size_t top_n = 20;
  // Total initial weight shared by the visual mentions.
  double visual_mass = 1.0;
  // Longest n-gram tried when linking question keywords.
  std::size_t max_ngram = 3;

  // Throws std::invalid_argument unless 0 < decay < 1, max_hops >= 1,
  // top_n >= 1, visual_mass > 0 and max_ngram >= 1.
  void Validate() const;
};

struct DetectedObject {
  std::string entity;
  double area = 0.0;

  bool operator==(const DetectedObject &) const = default;
};

struct ContextQuery {
  std::vector<EntityMention> visual_mentions;
  std::vector<EntityMention> textual_mentions;

  bool empty() const { return visual_mentions.empty() && textual_mentions.empty(); }
};

using StopwordSet = std::unordered_set<std::string>;
using NodeWeights = std::map<std::string, double>;
using ScoreMap = std::map<std::string, double>;
using EdgeWeights = std::map<KnowledgeTriple, double>;

struct WeightedSubgraph {
  // Every edge endpoint; linked entities carry their query weight, the
  // rest 0.
  NodeWeights nodes;
  // Incident triples in graph load order.
  std::vector<KnowledgeTriple> edges;

  bool empty() const { return edges.empty(); }
};

struct RankedTriple {
  KnowledgeTriple triple;
  double weight = 0.0;

  bool operator==(const RankedTriple &) const = default;
};

// Sorted by weight descending, ties by (head, relation, tail) ascending.
struct RankedKnowledge {
  std::vector<RankedTriple> triples;

  std::size_t size() const { return triples.size(); }
  bool empty() const { return triples.empty(); }
  bool operator==(const RankedKnowledge &) const = default;
};

// English stopword list used in place of a full NLP toolkit.
const StopwordSet &DefaultStopwords();

// Lowercase alphanumeric tokens, split at every other character.
std::vector<std::string> Tokenize(std::string_view text);

// Tokenize() minus stopwords; order and duplicates preserved.
std::vector<std::string> ExtractKeywords(std::string_view question,
                                         const StopwordSet &stopwords = DefaultStopwords());

// Links objects (raw box areas as weights) and question keywords (weight 1
// each) to graph entities. Unknown objects and unmatched words are dropped.
ContextQuery BuildContextQuery(const KnowledgeGraph &graph,
                               std::span<const DetectedObject> objects,
                               std::string_view question,
                               const RetrievalConfig &config = {},
                               const StopwordSet &stopwords = DefaultStopwords());

// Visual areas rescaled to sum to total_visual_mass (uniform when all areas
// are zero); textual mentions share a total of 1.0 equally. Repeated
// entities accumulate.
NodeWeights InitNodeWeights(const ContextQuery &query, double total_visual_mass = 1.0);

WeightedSubgraph BuildFirstOrderSubgraph(const KnowledgeGraph &graph,
                                         const NodeWeights &candidates);
WeightedSubgraph BuildFirstOrderSubgraph(const KnowledgeGraph &graph,
                                         const ContextQuery &query,
                                         double total_visual_mass = 1.0);

ScoreMap PropagateScores(const WeightedSubgraph &subgraph, const RetrievalConfig &config);

// score(head) + score(tail) for every subgraph edge.
EdgeWeights ScoreEdges(const WeightedSubgraph &subgraph, const ScoreMap &scores);

RankedKnowledge SelectTopN(const EdgeWeights &edge_weights, std::size_t n);

RankedKnowledge Retrieve(const KnowledgeGraph &graph, const ContextQuery &query,
                         const RetrievalConfig &config);

}  // namespace kdmn::retrieval

#endif  // KDMN_RETRIEVAL_HPP_
