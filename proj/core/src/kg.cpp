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

#include "kdmn/kg.hpp"

#include <fstream>
#include <istream>
#include <ostream>

namespace kdmn::kg {
namespace {

bool IsWordByte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

std::vector<std::string_view> SplitTabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

std::string_view TrimSpace(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string ToString(const KnowledgeTriple &t) {
  return "(" + t.head + ", " + t.relation + ", " + t.tail + ")";
}

LoadError::LoadError(std::size_t line, const std::string &what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

std::string NormalizeSurface(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_sep = false;
  for (unsigned char c : text) {
    if (IsWordByte(c)) {
      if (pending_sep && !out.empty()) out.push_back('_');
      pending_sep = false;
      if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
      out.push_back(static_cast<char>(c));
    } else {
      pending_sep = true;
    }
  }
  return out;
}

std::size_t KnowledgeGraph::TripleHash::operator()(const KnowledgeTriple &t) const {
  std::hash<std::string> h;
  std::size_t seed = h(t.head);
  seed ^= h(t.relation) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
  seed ^= h(t.tail) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
  return seed;
}

bool KnowledgeGraph::Add(std::string_view head, std::string_view relation,
                         std::string_view tail) {
  KnowledgeTriple t{NormalizeSurface(head), std::string(TrimSpace(relation)),
                    NormalizeSurface(tail)};
  if (t.head.empty() || t.relation.empty() || t.tail.empty()) {
    throw std::invalid_argument("triple has an empty field");
  }
  if (triple_index_.count(t) > 0) return false;
  const std::size_t index = triples_.size();
  triple_index_.emplace(t, index);
  for (const std::string *e : {&t.head, &t.tail}) {
    if (entity_index_.emplace(*e, entities_.size()).second) entities_.push_back(*e);
    adjacency_[*e].push_back(index);
  }
  bool known_relation = false;
  for (const auto &r : relations_) known_relation = known_relation || r == t.relation;
  if (!known_relation) relations_.push_back(t.relation);
  triples_.push_back(std::move(t));
  return true;
}

bool KnowledgeGraph::HasEntity(std::string_view entity) const {
  return entity_index_.count(std::string(entity)) > 0;
}

std::size_t KnowledgeGraph::EntityIndex(std::string_view entity) const {
  auto it = entity_index_.find(std::string(entity));
  if (it == entity_index_.end()) {
    throw std::out_of_range("unknown entity: " + std::string(entity));
  }
  return it->second;
}

std::span<const std::size_t> KnowledgeGraph::Incident(std::string_view entity) const {
  auto it = adjacency_.find(std::string(entity));
  if (it == adjacency_.end()) return {};
  return it->second;
}

std::vector<KnowledgeTriple> KnowledgeGraph::Neighbors(std::string_view entity) const {
  std::vector<KnowledgeTriple> out;
  for (std::size_t i : Incident(entity)) out.push_back(triples_[i]);
  return out;
}

bool KnowledgeGraph::Contains(const KnowledgeTriple &t) const {
  return triple_index_.count(t) > 0;
}

void KnowledgeGraph::Write(std::ostream &out) const {
  for (const auto &t : triples_) {
    out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
  }
}

void KnowledgeGraph::WriteFile(const std::string &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  Write(out);
}

KnowledgeGraph LoadGraph(std::istream &in) {
  KnowledgeGraph graph;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (TrimSpace(line).empty()) continue;
    auto fields = SplitTabs(line);
    if (fields.size() < 3) {
      throw LoadError(number, "expected head<TAB>relation<TAB>tail, got " +
                                  std::to_string(fields.size()) + " field(s)");
    }
    try {
      graph.Add(fields[0], fields[1], fields[2]);
    } catch (const std::invalid_argument &e) {
      throw LoadError(number, e.what());
    }
  }
  return graph;
}

KnowledgeGraph LoadGraphFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open knowledge file: " + path);
  return LoadGraph(in);
}

std::vector<EntityMention> LinkEntities(std::span<const std::string> tokens,
                                        const KnowledgeGraph &graph, std::size_t max_n,
                                        MentionSource source) {
  if (max_n == 0) throw std::invalid_argument("max_n must be at least 1");
  std::vector<EntityMention> mentions;
  std::size_t i = 0;
  while (i < tokens.size()) {
    bool matched = false;
    const std::size_t longest = std::min(max_n, tokens.size() - i);
    for (std::size_t n = longest; n >= 1; --n) {
      std::string key = tokens[i];
      std::string surface = tokens[i];
      for (std::size_t k = 1; k < n; ++k) {
        key += '_';
        key += tokens[i + k];
        surface += ' ';
        surface += tokens[i + k];
      }
      if (graph.HasEntity(key)) {
        mentions.push_back({surface, key, source, 1.0, i, n});
        i += n;
        matched = true;
        break;
      }
    }
    if (!matched) ++i;
  }
  return mentions;
}

}  // namespace kdmn::kg
