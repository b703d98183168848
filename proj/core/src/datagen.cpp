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

#include "kdmn/datagen.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace kdmn::datagen {
namespace {

using Json = nlohmann::ordered_json;

constexpr std::string_view kPlaceholder = "{other}";

std::size_t Uniform(Rng &rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// Distinct normalized scene entities in listed order.
std::vector<std::string> SceneEntities(const SceneAnnotation &scene) {
  std::vector<std::string> out;
  for (const auto &o : scene.objects) {
    std::string e = kg::NormalizeSurface(o.entity);
    if (!e.empty() && std::find(out.begin(), out.end(), e) == out.end()) {
      out.push_back(std::move(e));
    }
  }
  return out;
}

const std::string &OtherEnd(const KnowledgeTriple &t, Direction d) {
  return d == Direction::kVisualIsHead ? t.tail : t.head;
}

const std::string &VisualEnd(const KnowledgeTriple &t, Direction d) {
  return d == Direction::kVisualIsHead ? t.head : t.tail;
}

}  // namespace

const std::vector<Template> &BuiltinTemplates() {
  static const std::vector<Template> templates = {
      {"UsedFor", Direction::kVisualIsHead, "what in this image can be used for {other}?"},
      {"UsedFor", Direction::kVisualIsTail, "what in this image can {other} be used for?"},
      {"PartOf", Direction::kVisualIsHead, "what in this image is a part of {other}?"},
      {"PartOf", Direction::kVisualIsTail, "what in this image has {other} as a part?"},
      {"HasProperty", Direction::kVisualIsHead,
       "what in this image has the property of {other}?"},
      {"HasProperty", Direction::kVisualIsTail,
       "what property does the {other} in this image have?"},
      {"HasA", Direction::kVisualIsHead, "what in this image has {other}?"},
      {"HasA", Direction::kVisualIsTail, "what in this image belongs to {other}?"},
      {"CapableOf", Direction::kVisualIsHead, "what in this image is capable of {other}?"},
      {"CapableOf", Direction::kVisualIsTail, "what in this image is {other} capable of?"},
  };
  return templates;
}

std::string RenderEntity(std::string_view entity) {
  std::string out(entity);
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

std::string FillTemplate(const Template &tmpl, std::string_view other) {
  const auto pos = tmpl.pattern.find(kPlaceholder);
  if (pos == std::string::npos) {
    throw std::invalid_argument("template without placeholder: " + tmpl.pattern);
  }
  std::string out = tmpl.pattern;
  out.replace(pos, kPlaceholder.size(), RenderEntity(other));
  return out;
}

bool SceneAnnotation::Contains(std::string_view entity) const {
  const std::string key = kg::NormalizeSurface(entity);
  return std::any_of(objects.begin(), objects.end(), [&](const retrieval::DetectedObject &o) {
    return kg::NormalizeSurface(o.entity) == key;
  });
}

std::vector<SceneAnnotation> ReadScenes(std::istream &in) {
  std::vector<SceneAnnotation> scenes;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const Json j = Json::parse(line);
      SceneAnnotation scene;
      scene.image_id = j.at("image_id").get<std::string>();
      for (const auto &o : j.at("objects")) {
        scene.objects.push_back({kg::NormalizeSurface(o.at("entity").get<std::string>()),
                                 o.value("area", 0.0)});
      }
      scenes.push_back(std::move(scene));
    } catch (const std::exception &e) {
      throw std::runtime_error("scene line " + std::to_string(number) + ": " + e.what());
    }
  }
  return scenes;
}

std::vector<SceneAnnotation> ReadScenesFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open scenes: " + path);
  return ReadScenes(in);
}

void WriteScenes(std::ostream &out, std::span<const SceneAnnotation> scenes) {
  for (const auto &s : scenes) {
    Json j;
    j["image_id"] = s.image_id;
    Json objects = Json::array();
    for (const auto &o : s.objects) objects.push_back({{"entity", o.entity}, {"area", o.area}});
    j["objects"] = std::move(objects);
    out << j.dump() << '\n';
  }
}

void WriteScenesFile(const std::string &path, std::span<const SceneAnnotation> scenes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  WriteScenes(out, scenes);
}

bool SatisfiesKnowledge(const KnowledgeGraph &graph, std::string_view entity,
                        const Template &tmpl, std::string_view other) {
  const std::string e = kg::NormalizeSurface(entity);
  const std::string o = kg::NormalizeSurface(other);
  if (tmpl.direction == Direction::kVisualIsHead) {
    return graph.Contains({e, tmpl.relation, o});
  }
  return graph.Contains({o, tmpl.relation, e});
}

std::optional<QaStem> GenerateQa(const SceneAnnotation &scene, const KnowledgeGraph &graph,
                                 std::span<const Template> templates, Rng &rng) {
  struct Option {
    std::size_t triple;
    std::size_t tmpl;
  };
  std::vector<std::string> eligible;
  std::vector<std::vector<Option>> options;
  for (const auto &entity : SceneEntities(scene)) {
    std::vector<Option> found;
    for (std::size_t idx : graph.Incident(entity)) {
      const auto &t = graph.triples()[idx];
      if (t.head == t.tail) continue;
      for (std::size_t k = 0; k < templates.size(); ++k) {
        if (templates[k].relation != t.relation) continue;
        if (VisualEnd(t, templates[k].direction) == entity) found.push_back({idx, k});
      }
    }
    if (!found.empty()) {
      eligible.push_back(entity);
      options.push_back(std::move(found));
    }
  }
  if (eligible.empty()) return std::nullopt;
  const std::size_t which = Uniform(rng, eligible.size());
  const Option pick = options[which][Uniform(rng, options[which].size())];
  const auto &t = graph.triples()[pick.triple];
  const Template &tmpl = templates[pick.tmpl];
  QaStem stem;
  stem.image_id = scene.image_id;
  stem.template_index = pick.tmpl;
  stem.answer = eligible[which];
  stem.other = OtherEnd(t, tmpl.direction);
  stem.question = FillTemplate(tmpl, stem.other);
  stem.provenance = t;
  return stem;
}

std::optional<std::array<std::string, 3>> SampleConfusers(
    std::string_view answer, const Template &tmpl, std::string_view other,
    const SceneAnnotation &scene, const KnowledgeGraph &graph,
    std::span<const std::string> answer_pool, Rng &rng) {
  const std::string gt = kg::NormalizeSurface(answer);

  std::vector<std::string> knowledge_only;
  for (const auto &e : graph.entities()) {
    if (e != gt && !scene.Contains(e) && SatisfiesKnowledge(graph, e, tmpl, other)) {
      knowledge_only.push_back(e);
    }
  }
  std::vector<std::string> visual_only;
  for (const auto &e : SceneEntities(scene)) {
    if (e != gt && !SatisfiesKnowledge(graph, e, tmpl, other)) visual_only.push_back(e);
  }
  if (knowledge_only.empty() || visual_only.empty() || answer_pool.empty()) {
    return std::nullopt;
  }
  std::array<std::string, 3> out;
  out[0] = knowledge_only[Uniform(rng, knowledge_only.size())];
  out[1] = visual_only[Uniform(rng, visual_only.size())];
  for (std::size_t attempt = 0; attempt < kMaxConfuserRetries; ++attempt) {
    std::string c = kg::NormalizeSurface(answer_pool[Uniform(rng, answer_pool.size())]);
    if (c == gt || c == out[0] || c == out[1]) continue;
    if (scene.Contains(c) && SatisfiesKnowledge(graph, c, tmpl, other)) continue;
    out[2] = std::move(c);
    return out;
  }
  return std::nullopt;
}

GenerationResult GenerateDataset(std::span<const SceneAnnotation> scenes,
                                 const KnowledgeGraph &graph, std::size_t target_count,
                                 std::uint64_t seed, std::size_t questions_per_scene,
                                 std::span<const Template> templates) {
  if (target_count == 0) throw std::invalid_argument("target count must be at least 1");
  if (questions_per_scene == 0) {
    throw std::invalid_argument("questions per scene must be at least 1");
  }
  Rng rng(seed);
  GenerationResult result;
  result.requested = target_count;

  std::vector<QaStem> stems;
  std::vector<std::size_t> stem_scene;
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    std::set<std::pair<KnowledgeTriple, std::size_t>> seen;
    for (std::size_t q = 0; q < questions_per_scene; ++q) {
      auto stem = GenerateQa(scenes[s], graph, templates, rng);
      if (!stem) break;
      if (!seen.insert({stem->provenance, stem->template_index}).second) continue;
      stems.push_back(std::move(*stem));
      stem_scene.push_back(s);
    }
  }
  result.stems = stems.size();

  std::map<std::string, std::vector<std::size_t>> by_relation;
  for (std::size_t i = 0; i < stems.size(); ++i) {
    by_relation[templates[stems[i].template_index].relation].push_back(i);
  }

  for (std::size_t i = 0; i < stems.size() && result.records.size() < target_count; ++i) {
    const QaStem &stem = stems[i];
    const Template &tmpl = templates[stem.template_index];
    const SceneAnnotation &scene = scenes[stem_scene[i]];
    std::vector<std::string> pool;
    for (std::size_t j : by_relation[tmpl.relation]) {
      if (j != i) pool.push_back(stems[j].answer);
    }
    auto confusers = SampleConfusers(stem.answer, tmpl, stem.other, scene, graph, pool, rng);
    if (!confusers) {
      ++result.discarded;
      continue;
    }
    // Slot 0 is the answer, then knowledge-only, visual-only, pooled.
    std::array<std::size_t, 4> order = {0, 1, 2, 3};
    std::shuffle(order.begin(), order.end(), rng);
    const std::array<std::string, 4> items = {stem.answer, (*confusers)[0], (*confusers)[1],
                                              (*confusers)[2]};
    DatasetRecord record;
    record.image_id = scene.image_id;
    record.question = stem.question;
    model::ConfuserSlots slots;
    for (std::size_t pos = 0; pos < 4; ++pos) {
      record.candidates[pos] = RenderEntity(items[order[pos]]);
      switch (order[pos]) {
        case 0: record.label = pos; break;
        case 1: slots.knowledge_only = pos; break;
        case 2: slots.visual_only = pos; break;
        default: slots.pooled = pos; break;
      }
    }
    record.confusers = slots;
    record.objects = scene.objects;
    record.provenance = stem.provenance;
    result.records.push_back(std::move(record));
  }
  return result;
}

std::optional<std::size_t> MatchTemplate(std::string_view question,
                                         const KnowledgeTriple &provenance,
                                         std::span<const Template> templates) {
  for (std::size_t k = 0; k < templates.size(); ++k) {
    if (templates[k].relation != provenance.relation) continue;
    if (FillTemplate(templates[k], OtherEnd(provenance, templates[k].direction)) == question) {
      return k;
    }
  }
  return std::nullopt;
}

std::vector<std::string> ValidateRecord(const DatasetRecord &record,
                                        const KnowledgeGraph &graph,
                                        std::span<const Template> templates) {
  std::vector<std::string> problems;
  if (!record.provenance) return {"missing provenance"};
  if (!record.label) return {"missing label"};
  if (!record.confusers) return {"missing confuser slots"};
  const KnowledgeTriple &t = *record.provenance;
  if (!graph.Contains(t)) problems.push_back("provenance triple not in graph: " + ToString(t));
  const auto k = MatchTemplate(record.question, t, templates);
  if (!k) {
    problems.push_back("question matches no template: " + record.question);
    return problems;
  }
  const Template &tmpl = templates[*k];
  const std::string &other = OtherEnd(t, tmpl.direction);

  std::array<std::string, 4> c;
  for (std::size_t i = 0; i < 4; ++i) c[i] = kg::NormalizeSurface(record.candidates[i]);
  if (std::set<std::string>(c.begin(), c.end()).size() != 4) {
    problems.push_back("candidates are not distinct");
  }
  const auto &s = *record.confusers;
  if (std::set<std::size_t>{*record.label, s.knowledge_only, s.visual_only, s.pooled}.size() !=
      4) {
    problems.push_back("label and confuser slots overlap");
    return problems;
  }
  SceneAnnotation scene{record.image_id, record.objects};
  auto in_scene = [&](std::size_t i) { return scene.Contains(c[i]); };
  auto satisfies = [&](std::size_t i) { return SatisfiesKnowledge(graph, c[i], tmpl, other); };

  if (c[*record.label] != VisualEnd(t, tmpl.direction)) {
    problems.push_back("answer is not the visual end of the provenance triple");
  }
  if (!(in_scene(*record.label) && satisfies(*record.label))) {
    problems.push_back("answer must be in the scene and satisfy the knowledge");
  }
  if (!(satisfies(s.knowledge_only) && !in_scene(s.knowledge_only))) {
    problems.push_back("knowledge-only distractor " + c[s.knowledge_only] + " is invalid");
  }
  if (!(in_scene(s.visual_only) && !satisfies(s.visual_only))) {
    problems.push_back("visual-only distractor " + c[s.visual_only] + " is invalid");
  }
  if (in_scene(s.pooled) && satisfies(s.pooled)) {
    problems.push_back("pooled distractor " + c[s.pooled] + " is a second correct answer");
  }
  return problems;
}

ToyWorld MakeToyWorld(const ToyWorldConfig &config, std::uint64_t seed) {
  if (config.objects < config.max_links || config.min_links == 0 ||
      config.min_links > config.max_links || config.min_scene_objects == 0 ||
      config.min_scene_objects > config.max_scene_objects ||
      config.max_scene_objects > config.objects || config.objects < 2) {
    throw std::invalid_argument("inconsistent toy world configuration");
  }
  Rng rng(seed);
  ToyWorld world;
  char name[32];
  for (std::size_t i = 0; i < config.objects; ++i) {
    std::snprintf(name, sizeof(name), "item%02zu", i);
    world.objects.emplace_back(name);
  }
  for (std::size_t i = 0; i < config.concepts; ++i) {
    std::snprintf(name, sizeof(name), "idea%02zu", i);
    world.concepts.emplace_back(name);
  }
  const auto &templates = BuiltinTemplates();
  std::vector<std::size_t> index(config.objects);
  for (std::size_t i = 0; i < config.objects; ++i) index[i] = i;
  for (std::size_t i = 0; i < config.concepts; ++i) {
    const Template &tmpl = templates[i % templates.size()];
    const std::size_t links =
        config.min_links + Uniform(rng, config.max_links - config.min_links + 1);
    std::shuffle(index.begin(), index.end(), rng);
    for (std::size_t l = 0; l < links; ++l) {
      const std::string &obj = world.objects[index[l]];
      if (tmpl.direction == Direction::kVisualIsHead) {
        world.graph.Add(obj, tmpl.relation, world.concepts[i]);
      } else {
        world.graph.Add(world.concepts[i], tmpl.relation, obj);
      }
    }
  }
  static constexpr std::array<const char *, 2> kNoise = {"IsA", "AtLocation"};
  for (std::size_t n = 0; n < config.noise_triples; ++n) {
    const std::size_t a = Uniform(rng, config.objects);
    std::size_t b = Uniform(rng, config.objects - 1);
    if (b >= a) ++b;
    world.graph.Add(world.objects[a], kNoise[Uniform(rng, kNoise.size())], world.objects[b]);
  }
  for (std::size_t s = 0; s < config.scenes; ++s) {
    SceneAnnotation scene;
    std::snprintf(name, sizeof(name), "img%04zu", s);
    scene.image_id = name;
    const std::size_t count =
        config.min_scene_objects +
        Uniform(rng, config.max_scene_objects - config.min_scene_objects + 1);
    std::shuffle(index.begin(), index.end(), rng);
    for (std::size_t k = 0; k < count; ++k) {
      const double area = static_cast<double>(10 + Uniform(rng, 91));
      scene.objects.push_back({world.objects[index[k]], area});
    }
    world.scenes.push_back(std::move(scene));
  }
  return world;
}

}  // namespace kdmn::datagen
