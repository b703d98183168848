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

// Symbolic knowledge graph of (head, relation, tail) triples, loaded from a
// tab-separated file and immutable afterwards.

#ifndef KDMN_KG_HPP_
#define KDMN_KG_HPP_

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kdmn::kg {

struct KnowledgeTriple {
  std::string head;
  std::string relation;
  std::string tail;

  auto operator<=>(const KnowledgeTriple &) const = default;
  bool operator==(const KnowledgeTriple &) const = default;
};

std::string ToString(const KnowledgeTriple &t);

class LoadError : public std::runtime_error {
 public:
  LoadError(std::size_t line, const std::string &what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Lowercases ASCII letters and collapses every run of other non-alphanumeric
// characters into one underscore, trimming underscores at both ends. Bytes
// >= 0x80 are kept so UTF-8 text survives. "Hot Dog" -> "hot_dog".
std::string NormalizeSurface(std::string_view text);

class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  // Adds a triple unless an identical one is already present. Entities are
  // normalized; returns false for duplicates. Throws std::invalid_argument
  // when a field is empty after normalization.
  bool Add(std::string_view head, std::string_view relation, std::string_view tail);

  const std::vector<KnowledgeTriple> &triples() const { return triples_; }
  std::size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }

  // Entities in order of first appearance.
  const std::vector<std::string> &entities() const { return entities_; }
  // Relation labels in order of first appearance.
  const std::vector<std::string> &relations() const { return relations_; }

  bool HasEntity(std::string_view entity) const;
  std::size_t EntityIndex(std::string_view entity) const;  // throws if absent

  // Indices of triples incident to the entity, in load order. A self-loop
  // is listed twice.
  std::span<const std::size_t> Incident(std::string_view entity) const;

  // Every triple in which entity is head or tail, in load order. Unknown
  // entities give an empty list.
  std::vector<KnowledgeTriple> Neighbors(std::string_view entity) const;

  bool Contains(const KnowledgeTriple &t) const;

  // Same TSV format the loader reads; load order preserved.
  void Write(std::ostream &out) const;
  void WriteFile(const std::string &path) const;

 private:
  struct TripleHash {
    std::size_t operator()(const KnowledgeTriple &t) const;
  };

  std::vector<KnowledgeTriple> triples_;
  std::vector<std::string> entities_;
  std::vector<std::string> relations_;
  std::unordered_map<std::string, std::size_t> entity_index_;
  std::unordered_map<std::string, std::vector<std::size_t>> adjacency_;
  std::unordered_map<KnowledgeTriple, std::size_t, TripleHash> triple_index_;
};

// Reads "head<TAB>relation<TAB>tail[<TAB>ignored...]" lines. Blank lines are
// skipped; any other line with fewer than three non-empty fields raises a
// LoadError naming its 1-based line number. Duplicates are dropped.
KnowledgeGraph LoadGraph(std::istream &in);
KnowledgeGraph LoadGraphFile(const std::string &path);

enum class MentionSource { kVisual, kTextual };

struct EntityMention {
  std::string surface;
  std::string entity;
  MentionSource source = MentionSource::kTextual;
  double weight = 1.0;
  // Token span [begin, begin + length) the mention covers.
  std::size_t begin = 0;
  std::size_t length = 0;
};

// Greedy longest-match-first linking: scanning left to right, try n-grams of
// max_n tokens down to 1 (joined by '_') against the graph's entities; a
// match consumes its tokens. Mentions come back in text order.
std::vector<EntityMention> LinkEntities(std::span<const std::string> tokens,
                                        const KnowledgeGraph &graph,
                                        std::size_t max_n = 3,
                                        MentionSource source = MentionSource::kTextual);

}  // namespace kdmn::kg

#endif  // KDMN_KG_HPP_
