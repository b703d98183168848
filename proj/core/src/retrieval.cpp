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
#include <deque>
#include <stdexcept>

namespace kdmn::retrieval {

void RetrievalConfig::Validate() const {
  if (!(decay > 0.0 && decay < 1.0)) {
    throw std::invalid_argument("decay must lie in (0, 1), got " + std::to_string(decay));
  }
  if (max_hops < 1) throw std::invalid_argument("max_hops must be at least 1");
  if (top_n < 1) throw std::invalid_argument("top_n must be at least 1");
  if (!(visual_mass > 0.0)) throw std::invalid_argument("visual_mass must be positive");
  if (max_ngram < 1) throw std::invalid_argument("max_ngram must be at least 1");
}

const StopwordSet &DefaultStopwords() {
  static const StopwordSet words = {
      "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you",
      "your", "yours", "yourself", "yourselves", "he", "him", "his",
      "himself", "she", "her", "hers", "herself", "it", "its", "itself",
      "they", "them", "their", "theirs", "themselves", "what", "which", "who",
      "whom", "this", "that", "these", "those", "am", "is", "are", "was",
      "were", "be", "been", "being", "have", "has", "had", "having", "do",
      "does", "did", "doing", "a", "an", "the", "and", "but", "if", "or",
      "because", "as", "until", "while", "of", "at", "by", "for", "with",
      "about", "against", "between", "into", "through", "during", "before",
      "after", "above", "below", "to", "from", "up", "down", "in", "out", "on",
      "off", "over", "under", "again", "further", "then", "once", "here",
      "there", "when", "where", "why", "how", "all", "any", "both", "each",
      "few", "more", "most", "other", "some", "such", "no", "nor", "not",
      "only", "own", "same", "so", "than", "too", "very", "s", "t", "can",
      "will", "just", "don", "should", "now"};
  return words;
}

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    const bool word = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
                      (c >= 'A' && c <= 'Z') || c >= 0x80;
    if (word) {
      if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
      current.push_back(static_cast<char>(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> ExtractKeywords(std::string_view question,
                                         const StopwordSet &stopwords) {
  std::vector<std::string> keywords;
  for (auto &token : Tokenize(question)) {
    if (stopwords.count(token) == 0) keywords.push_back(std::move(token));
  }
  return keywords;
}

ContextQuery BuildContextQuery(const KnowledgeGraph &graph,
                               std::span<const DetectedObject> objects,
                               std::string_view question,
                               const RetrievalConfig &config,
                               const StopwordSet &stopwords) {
  ContextQuery query;
  for (const auto &obj : objects) {
    std::string entity = kg::NormalizeSurface(obj.entity);
    if (!graph.HasEntity(entity)) continue;
    if (obj.area < 0.0) throw std::invalid_argument("negative box area for " + obj.entity);
    query.visual_mentions.push_back(
        {obj.entity, std::move(entity), kg::MentionSource::kVisual, obj.area, 0, 0});
  }
  auto keywords = ExtractKeywords(question, stopwords);
  query.textual_mentions =
      kg::LinkEntities(keywords, graph, config.max_ngram, kg::MentionSource::kTextual);
  return query;
}

NodeWeights InitNodeWeights(const ContextQuery &query, double total_visual_mass) {
  NodeWeights weights;
  const auto &visual = query.visual_mentions;
  if (!visual.empty()) {
    double area_sum = 0.0;
    for (const auto &m : visual) {
      if (m.weight < 0.0) throw std::invalid_argument("negative visual weight");
      area_sum += m.weight;
    }
    for (const auto &m : visual) {
      const double w = area_sum > 0.0
                           ? total_visual_mass * m.weight / area_sum
                           : total_visual_mass / static_cast<double>(visual.size());
      weights[m.entity] += w;
    }
  }
  const auto &textual = query.textual_mentions;
  for (const auto &m : textual) {
    weights[m.entity] += 1.0 / static_cast<double>(textual.size());
  }
  return weights;
}

WeightedSubgraph BuildFirstOrderSubgraph(const KnowledgeGraph &graph,
                                         const NodeWeights &candidates) {
  std::vector<std::size_t> incident;
  for (const auto &[entity, weight] : candidates) {
    auto ids = graph.Incident(entity);
    incident.insert(incident.end(), ids.begin(), ids.end());
  }
  std::sort(incident.begin(), incident.end());
  incident.erase(std::unique(incident.begin(), incident.end()), incident.end());

  WeightedSubgraph sub;
  for (std::size_t id : incident) {
    const auto &t = graph.triples()[id];
    sub.edges.push_back(t);
    for (const std::string *e : {&t.head, &t.tail}) {
      auto it = candidates.find(*e);
      sub.nodes.emplace(*e, it == candidates.end() ? 0.0 : it->second);
    }
  }
  return sub;
}

WeightedSubgraph BuildFirstOrderSubgraph(const KnowledgeGraph &graph,
                                         const ContextQuery &query,
                                         double total_visual_mass) {
  return BuildFirstOrderSubgraph(graph, InitNodeWeights(query, total_visual_mass));
}

ScoreMap PropagateScores(const WeightedSubgraph &subgraph, const RetrievalConfig &config) {
  config.Validate();
  const std::size_t n = subgraph.nodes.size();
  std::vector<std::string> names;
  std::vector<double> weight;
  std::map<std::string, std::size_t> index;
  names.reserve(n);
  for (const auto &[name, w] : subgraph.nodes) {
    index.emplace(name, names.size());
    names.push_back(name);
    weight.push_back(w);
  }
  // Undirected adjacency; direction and relation are ignored.
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto &t : subgraph.edges) {
    const std::size_t a = index.at(t.head);
    const std::size_t b = index.at(t.tail);
    if (a == b) continue;
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto &list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }

  std::vector<double> powers(config.max_hops + 1, 1.0);
  for (std::size_t d = 1; d <= config.max_hops; ++d) powers[d] = powers[d - 1] * config.decay;

  std::vector<double> score = weight;
  std::vector<std::size_t> dist(n);
  constexpr std::size_t kUnseen = static_cast<std::size_t>(-1);
  // Push each source's weight out to every node within max_hops.
  for (std::size_t src = 0; src < n; ++src) {
    if (weight[src] == 0.0) continue;
    std::fill(dist.begin(), dist.end(), kUnseen);
    dist[src] = 0;
    std::deque<std::size_t> frontier{src};
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop_front();
      if (dist[u] == config.max_hops) continue;
      for (std::size_t v : adj[u]) {
        if (dist[v] != kUnseen) continue;
        dist[v] = dist[u] + 1;
        score[v] += powers[dist[v]] * weight[src];
        frontier.push_back(v);
      }
    }
  }

  ScoreMap scores;
  for (std::size_t i = 0; i < n; ++i) scores.emplace(names[i], score[i]);
  return scores;
}

EdgeWeights ScoreEdges(const WeightedSubgraph &subgraph, const ScoreMap &scores) {
  EdgeWeights weights;
  for (const auto &t : subgraph.edges) {
    weights[t] = scores.at(t.head) + scores.at(t.tail);
  }
  return weights;
}

RankedKnowledge SelectTopN(const EdgeWeights &edge_weights, std::size_t n) {
  if (n < 1) throw std::invalid_argument("top_n must be at least 1");
  RankedKnowledge ranked;
  ranked.triples.reserve(edge_weights.size());
  for (const auto &[triple, weight] : edge_weights) ranked.triples.push_back({triple, weight});
  std::sort(ranked.triples.begin(), ranked.triples.end(),
            [](const RankedTriple &a, const RankedTriple &b) {
              if (a.weight != b.weight) return a.weight > b.weight;
              return a.triple < b.triple;
            });
  if (ranked.triples.size() > n) ranked.triples.resize(n);
  return ranked;
}

RankedKnowledge Retrieve(const KnowledgeGraph &graph, const ContextQuery &query,
                         const RetrievalConfig &config) {
  config.Validate();
  const NodeWeights weights = InitNodeWeights(query, config.visual_mass);
  const WeightedSubgraph sub = BuildFirstOrderSubgraph(graph, weights);
  const ScoreMap scores = PropagateScores(sub, config);
  return SelectTopN(ScoreEdges(sub, scores), config.top_n);
}

}  // namespace kdmn::retrieval
