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

// Dataset files.
//
// A dataset is JSON-lines, one question per line:
//
//   {"image_id": "img_0001", "feature_file": "features.txt",
//    "question": "what in this image can be used for light?",
//    "candidates": ["sun", "candle", "cake", "lamp"], "label": 2,
//    "objects": [{"entity": "candle", "area": 1200.0}, ...]}
//
// "label" is 1-based. "feature_file" is optional and resolved relative to
// the dataset file. Generated datasets add "provenance" (the source triple)
// and "confusers" (1-based slots of the distractors). A feature file has one
// image per line: the image id, then whitespace-separated floats.

#ifndef KDMN_DATASET_HPP_
#define KDMN_DATASET_HPP_

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kdmn/encoders.hpp"
#include "kdmn/kg.hpp"
#include "kdmn/model.hpp"
#include "kdmn/retrieval.hpp"

namespace kdmn::model {

// 0-based candidate slots of the three distractor kinds.
struct ConfuserSlots {
  std::size_t knowledge_only = 0;  // satisfies the relation, not in the image
  std::size_t visual_only = 0;     // in the image, fails the relation
  std::size_t pooled = 0;          // drawn from other answers of the relation

  bool operator==(const ConfuserSlots &) const = default;
};

struct DatasetRecord {
  std::string image_id;
  std::string feature_file;
  std::string question;
  std::array<std::string, kNumCandidates> candidates;
  std::optional<std::size_t> label;  // 0-based in memory
  std::vector<retrieval::DetectedObject> objects;
  std::optional<kg::KnowledgeTriple> provenance;
  std::optional<ConfuserSlots> confusers;

  bool operator==(const DatasetRecord &) const = default;
};

// Single-line JSON for one record (no trailing newline).
std::string ToJsonLine(const DatasetRecord &record);
DatasetRecord FromJsonLine(const std::string &line);

void WriteDataset(std::ostream &out, std::span<const DatasetRecord> records);
void WriteDatasetFile(const std::string &path, std::span<const DatasetRecord> records);
std::vector<DatasetRecord> ReadDataset(std::istream &in);
std::vector<DatasetRecord> ReadDatasetFile(const std::string &path);

class FeatureTable {
 public:
  void Set(const std::string &image_id, std::vector<double> values);
  bool Contains(const std::string &image_id) const;
  const std::vector<double> &Get(const std::string &image_id) const;  // throws if absent
  // Common vector length; 0 when empty.
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return rows_.size(); }

  void Write(std::ostream &out) const;
  void WriteFile(const std::string &path) const;
  static FeatureTable Read(std::istream &in);
  static FeatureTable ReadFile(const std::string &path);

 private:
  std::map<std::string, std::vector<double>> rows_;
  std::size_t dim_ = 0;
};

// 1.0 at the index of every object's entity among graph.entities(), else 0.
std::vector<double> PresenceFeatures(std::span<const retrieval::DetectedObject> objects,
                                     const kg::KnowledgeGraph &graph);

// Lowercase word tokens with multi-word graph entities merged into their
// identifiers ("hot dog" -> "hot_dog") by greedy longest match.
std::vector<std::string> TokenizeText(std::string_view text, const kg::KnowledgeGraph &graph,
                                      std::size_t max_n = 3);

// Turns records into model inputs: tokenizes text, looks up image features
// and, when `retrieve` is set, attaches the top-N knowledge for the image
// objects and question.
std::vector<QAContext> PrepareContexts(std::span<const DatasetRecord> records,
                                       const kg::KnowledgeGraph &graph,
                                       const FeatureTable &features,
                                       const retrieval::RetrievalConfig &config,
                                       bool retrieve = true);

// Entities, relation tokens, then every question/answer token, each in
// first-seen order.
enc::Vocabulary BuildVocabulary(const kg::KnowledgeGraph &graph,
                                std::span<const QAContext> contexts);

}  // namespace kdmn::model

#endif  // KDMN_DATASET_HPP_
