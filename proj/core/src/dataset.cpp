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

#include "kdmn/dataset.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace kdmn::model {
namespace {

using Json = nlohmann::ordered_json;

std::size_t SlotFromJson(const Json &j, const char *key) {
  const auto v = j.at(key).get<long long>();
  if (v < 1 || v > static_cast<long long>(kNumCandidates)) {
    throw std::runtime_error(std::string(key) + " must be in 1..4");
  }
  return static_cast<std::size_t>(v - 1);
}

}  // namespace

std::string ToJsonLine(const DatasetRecord &r) {
  Json j;
  j["image_id"] = r.image_id;
  if (!r.feature_file.empty()) j["feature_file"] = r.feature_file;
  j["question"] = r.question;
  j["candidates"] = r.candidates;
  if (r.label) j["label"] = *r.label + 1;
  Json objects = Json::array();
  for (const auto &o : r.objects) objects.push_back({{"entity", o.entity}, {"area", o.area}});
  j["objects"] = std::move(objects);
  if (r.provenance) {
    j["provenance"] = {{"head", r.provenance->head},
                       {"relation", r.provenance->relation},
                       {"tail", r.provenance->tail}};
  }
  if (r.confusers) {
    j["confusers"] = {{"knowledge_only", r.confusers->knowledge_only + 1},
                      {"visual_only", r.confusers->visual_only + 1},
                      {"pooled", r.confusers->pooled + 1}};
  }
  return j.dump();
}

DatasetRecord FromJsonLine(const std::string &line) {
  const Json j = Json::parse(line);
  DatasetRecord r;
  r.image_id = j.at("image_id").get<std::string>();
  if (j.contains("feature_file")) r.feature_file = j.at("feature_file").get<std::string>();
  r.question = j.at("question").get<std::string>();
  const auto &cands = j.at("candidates");
  if (!cands.is_array() || cands.size() != kNumCandidates) {
    throw std::runtime_error("record " + r.image_id + " needs exactly 4 candidates");
  }
  for (std::size_t a = 0; a < kNumCandidates; ++a) r.candidates[a] = cands[a].get<std::string>();
  if (j.contains("label") && !j.at("label").is_null()) r.label = SlotFromJson(j, "label");
  if (j.contains("objects")) {
    for (const auto &o : j.at("objects")) {
      r.objects.push_back({o.at("entity").get<std::string>(), o.value("area", 0.0)});
    }
  }
  if (j.contains("provenance")) {
    const auto &p = j.at("provenance");
    r.provenance = kg::KnowledgeTriple{p.at("head").get<std::string>(),
                                       p.at("relation").get<std::string>(),
                                       p.at("tail").get<std::string>()};
  }
  if (j.contains("confusers")) {
    const auto &c = j.at("confusers");
    r.confusers = ConfuserSlots{SlotFromJson(c, "knowledge_only"),
                                SlotFromJson(c, "visual_only"), SlotFromJson(c, "pooled")};
  }
  return r;
}

void WriteDataset(std::ostream &out, std::span<const DatasetRecord> records) {
  for (const auto &r : records) out << ToJsonLine(r) << '\n';
}

void WriteDatasetFile(const std::string &path, std::span<const DatasetRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  WriteDataset(out, records);
}

std::vector<DatasetRecord> ReadDataset(std::istream &in) {
  std::vector<DatasetRecord> records;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(FromJsonLine(line));
    } catch (const std::exception &e) {
      throw std::runtime_error("dataset line " + std::to_string(number) + ": " + e.what());
    }
  }
  return records;
}

std::vector<DatasetRecord> ReadDatasetFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  return ReadDataset(in);
}

void FeatureTable::Set(const std::string &image_id, std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("empty feature vector for " + image_id);
  if (dim_ == 0) dim_ = values.size();
  if (values.size() != dim_) {
    throw std::invalid_argument("feature vector for " + image_id + " has length " +
                                std::to_string(values.size()) + ", expected " +
                                std::to_string(dim_));
  }
  rows_[image_id] = std::move(values);
}

bool FeatureTable::Contains(const std::string &image_id) const {
  return rows_.count(image_id) > 0;
}

const std::vector<double> &FeatureTable::Get(const std::string &image_id) const {
  auto it = rows_.find(image_id);
  if (it == rows_.end()) throw std::out_of_range("no features for image " + image_id);
  return it->second;
}

void FeatureTable::Write(std::ostream &out) const {
  std::ostringstream buffer;
  buffer << std::setprecision(17);
  for (const auto &[id, values] : rows_) {
    buffer << id << '\t';
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i > 0) buffer << ' ';
      buffer << values[i];
    }
    buffer << '\n';
  }
  out << buffer.str();
}

void FeatureTable::WriteFile(const std::string &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  Write(out);
}

FeatureTable FeatureTable::Read(std::istream &in) {
  FeatureTable table;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::istringstream fields(line);
    std::string id;
    if (!(fields >> id)) continue;
    std::vector<double> values;
    std::string token;
    while (fields >> token) {
      try {
        values.push_back(std::stod(token));
      } catch (const std::exception &) {
        throw std::runtime_error("feature line " + std::to_string(number) +
                                 ": bad number '" + token + "'");
      }
    }
    try {
      table.Set(id, std::move(values));
    } catch (const std::invalid_argument &e) {
      throw std::runtime_error("feature line " + std::to_string(number) + ": " + e.what());
    }
  }
  return table;
}

FeatureTable FeatureTable::ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open feature file: " + path);
  return Read(in);
}

std::vector<double> PresenceFeatures(std::span<const retrieval::DetectedObject> objects,
                                     const kg::KnowledgeGraph &graph) {
  std::vector<double> features(graph.entities().size(), 0.0);
  for (const auto &o : objects) {
    const std::string entity = kg::NormalizeSurface(o.entity);
    if (graph.HasEntity(entity)) features[graph.EntityIndex(entity)] = 1.0;
  }
  return features;
}

std::vector<std::string> TokenizeText(std::string_view text, const kg::KnowledgeGraph &graph,
                                      std::size_t max_n) {
  const auto words = retrieval::Tokenize(text);
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < words.size()) {
    std::size_t taken = 1;
    std::string merged = words[i];
    for (std::size_t n = std::min(max_n, words.size() - i); n >= 2; --n) {
      std::string key = words[i];
      for (std::size_t k = 1; k < n; ++k) key += "_" + words[i + k];
      if (graph.HasEntity(key)) {
        merged = std::move(key);
        taken = n;
        break;
      }
    }
    tokens.push_back(std::move(merged));
    i += taken;
  }
  return tokens;
}

std::vector<QAContext> PrepareContexts(std::span<const DatasetRecord> records,
                                       const kg::KnowledgeGraph &graph,
                                       const FeatureTable &features,
                                       const retrieval::RetrievalConfig &config,
                                       bool retrieve) {
  std::vector<QAContext> contexts;
  contexts.reserve(records.size());
  for (const auto &r : records) {
    QAContext c;
    c.image_id = r.image_id;
    c.image_features = Tensor::Vector(features.Get(r.image_id));
    c.question_tokens = TokenizeText(r.question, graph, config.max_ngram);
    for (std::size_t a = 0; a < kNumCandidates; ++a) {
      c.candidates[a] = TokenizeText(r.candidates[a], graph, config.max_ngram);
    }
    c.label = r.label;
    c.objects = r.objects;
    if (retrieve) {
      auto query = retrieval::BuildContextQuery(graph, r.objects, r.question, config);
      c.knowledge = retrieval::Retrieve(graph, query, config);
    }
    contexts.push_back(std::move(c));
  }
  return contexts;
}

enc::Vocabulary BuildVocabulary(const kg::KnowledgeGraph &graph,
                                std::span<const QAContext> contexts) {
  enc::Vocabulary vocab;
  for (const auto &e : graph.entities()) vocab.Add(e);
  for (const auto &r : graph.relations()) vocab.Add(enc::RelationToken(r));
  for (const auto &c : contexts) {
    for (const auto &t : c.question_tokens) vocab.Add(t);
    for (const auto &cand : c.candidates) {
      for (const auto &t : cand) vocab.Add(t);
    }
  }
  return vocab;
}

}  // namespace kdmn::model
