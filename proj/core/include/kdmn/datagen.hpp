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

// Template-based multi-choice question generation.
//
// A question is built from one scene object and one of its knowledge
// triples: the object is the answer and the other endpoint fills the
// template. Three distractors are added, one that satisfies the knowledge
// but is not in the scene, one that is in the scene but does not satisfy
// it, and one taken from the answers of other questions on the same
// relation that does not do both.

#ifndef KDMN_DATAGEN_HPP_
#define KDMN_DATAGEN_HPP_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kdmn/dataset.hpp"
#include "kdmn/kg.hpp"
#include "kdmn/retrieval.hpp"

namespace kdmn::datagen {

using kg::KnowledgeGraph;
using kg::KnowledgeTriple;
using model::DatasetRecord;
using Rng = std::mt19937_64;

enum class Direction { kVisualIsHead, kVisualIsTail };

struct Template {
  std::string relation;
  Direction direction = Direction::kVisualIsHead;
  std::string pattern;  // contains "{other}" once
};

// The ten built-in templates, two directions for each of UsedFor, PartOf,
// HasProperty, HasA and CapableOf.
const std::vector<Template> &BuiltinTemplates();

// Entity identifier as shown in text: underscores become spaces.
std::string RenderEntity(std::string_view entity);
std::string FillTemplate(const Template &tmpl, std::string_view other);

struct SceneAnnotation {
  std::string image_id;
  std::vector<retrieval::DetectedObject> objects;

  bool Contains(std::string_view entity) const;
};

// JSON-lines scenes: {"image_id": ..., "objects": [{"entity", "area"}]}.
// Entities are normalized on read.
std::vector<SceneAnnotation> ReadScenes(std::istream &in);
std::vector<SceneAnnotation> ReadScenesFile(const std::string &path);
void WriteScenes(std::ostream &out, std::span<const SceneAnnotation> scenes);
void WriteScenesFile(const std::string &path, std::span<const SceneAnnotation> scenes);

// True when `entity` is linked to `other` by `relation`, with `entity` on
// the side the direction names.
bool SatisfiesKnowledge(const KnowledgeGraph &graph, std::string_view entity,
                        const Template &tmpl, std::string_view other);

// A question and its answer before distractors are chosen.
struct QaStem {
  std::string image_id;
  std::size_t template_index = 0;
  std::string question;
  std::string answer;  // the visual entity
  std::string other;
  KnowledgeTriple provenance;
};

// Picks a scene entity with at least one template triple, then one such
// triple, both uniformly. Returns nullopt when the scene has none.
std::optional<QaStem> GenerateQa(const SceneAnnotation &scene, const KnowledgeGraph &graph,
                                 std::span<const Template> templates, Rng &rng);

inline constexpr std::size_t kMaxConfuserRetries = 100;

// {knowledge-only, visual-only, pooled}. `answer_pool` holds the answers of
// the other questions on the same relation. Returns nullopt when any of the
// three cannot be found.
std::optional<std::array<std::string, 3>> SampleConfusers(
    std::string_view answer, const Template &tmpl, std::string_view other,
    const SceneAnnotation &scene, const KnowledgeGraph &graph,
    std::span<const std::string> answer_pool, Rng &rng);

struct GenerationResult {
  std::vector<DatasetRecord> records;
  std::size_t requested = 0;
  std::size_t stems = 0;      // eligible questions found before distractors
  std::size_t discarded = 0;  // stems dropped for lack of distractors

  std::size_t shortfall() const { return requested - records.size(); }
};

// Up to `questions_per_scene` stems per scene in scene order, then
// distractors for each stem in the same order, until `target_count` items
// exist. Candidate order is shuffled per item. Deterministic in (scenes,
// graph, seed). Throws std::invalid_argument for target_count == 0.
GenerationResult GenerateDataset(std::span<const SceneAnnotation> scenes,
                                 const KnowledgeGraph &graph, std::size_t target_count,
                                 std::uint64_t seed, std::size_t questions_per_scene = 2,
                                 std::span<const Template> templates = BuiltinTemplates());

// Checks a generated record against the graph: question matches its
// template, candidates distinct, and each slot meets its constraint.
// Returns the list of violations (empty when valid).
std::vector<std::string> ValidateRecord(const DatasetRecord &record,
                                        const KnowledgeGraph &graph,
                                        std::span<const Template> templates = BuiltinTemplates());

// Index into `templates` of the template that produced `question` from
// `provenance`, if any.
std::optional<std::size_t> MatchTemplate(std::string_view question,
                                         const KnowledgeTriple &provenance,
                                         std::span<const Template> templates);

struct ToyWorldConfig {
  std::size_t objects = 40;
  std::size_t concepts = 60;
  std::size_t min_links = 2;  // objects linked to each concept
  std::size_t max_links = 4;
  std::size_t noise_triples = 30;  // IsA / AtLocation edges between objects
  std::size_t scenes = 300;
  std::size_t min_scene_objects = 3;
  std::size_t max_scene_objects = 5;
};

struct ToyWorld {
  KnowledgeGraph graph;
  std::vector<SceneAnnotation> scenes;
  std::vector<std::string> objects;
  std::vector<std::string> concepts;
};

// Synthetic graph and scenes. Concept i uses template i mod 10.
ToyWorld MakeToyWorld(const ToyWorldConfig &config, std::uint64_t seed);

}  // namespace kdmn::datagen

#endif  // KDMN_DATAGEN_HPP_
