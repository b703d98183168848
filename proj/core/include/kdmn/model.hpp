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

// Knowledge-incorporated multi-choice answer classifier.
//
// Every candidate answer is scored on its own. Image, question and answer
// features are projected into a common space, e_k = tanh(W_k f_k + b_k),
// and fused by elementwise product h = e_I * e_Q * e_A. Unless knowledge is
// disabled, h is joined by the final episodic memory of the dynamic memory
// network run with that candidate's query. A two-way softmax over
// W4 [h; m] + b4 gives the probability that the candidate is correct and
// the highest-probability candidate is the answer.

#ifndef KDMN_MODEL_HPP_
#define KDMN_MODEL_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kdmn/autodiff.hpp"
#include "kdmn/encoders.hpp"
#include "kdmn/memory.hpp"
#include "kdmn/retrieval.hpp"

namespace kdmn::model {

using num::ParameterStore;
using num::Tape;
using num::Tensor;
using num::Var;

inline constexpr std::size_t kNumCandidates = 4;

enum class Mode {
  kFull,   // knowledge memory, iterative episodes
  kNoMem,  // knowledge memory, a single attention pass
  kNoKG,   // no knowledge and no memory network
};

std::string_view ModeName(Mode mode);
// Accepts "full", "nomem", "nokg" (case-insensitive, '-'/'_' ignored).
Mode ParseMode(std::string_view name);

struct ModelDims {
  std::size_t word = 300;
  std::size_t hidden = 512;  // LSTM width; memory slot is 4x this
  std::size_t common = 1024;
  std::size_t attention = 512;
  std::size_t image = 2048;
  std::size_t episodes = 2;
  std::size_t lstm_layers = 2;

  std::size_t slot() const { return 2 * lstm_layers * hidden; }
  void Validate() const;
};

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t batch_size = 500;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;

  void Validate() const;
};

// One multi-choice question with its image and retrieved knowledge.
struct QAContext {
  std::string image_id;
  Tensor image_features;
  std::vector<std::string> question_tokens;
  std::array<std::vector<std::string>, kNumCandidates> candidates;
  // 0-based index of the correct candidate, when known.
  std::optional<std::size_t> label;
  std::vector<retrieval::DetectedObject> objects;
  std::optional<retrieval::RankedKnowledge> knowledge;
};

struct Prediction {
  std::array<double, kNumCandidates> probabilities{};
  // 0-based argmax; ties go to the lowest index.
  std::size_t choice = 0;
};

// Index of the largest value, lowest index on ties.
std::size_t ArgMax(std::span<const double> values);

class KdmnModel {
 public:
  // Registers every parameter and draws them from U[-init_bound, init_bound].
  KdmnModel(ModelDims dims, Mode mode, enc::Vocabulary vocab, std::uint64_t seed,
            double init_bound = 0.08);

  Mode mode() const { return mode_; }
  const ModelDims &dims() const { return dims_; }
  const enc::Vocabulary &vocab() const { return vocab_; }
  ParameterStore &params() { return params_; }
  const ParameterStore &params() const { return params_; }

  // Episodes actually run: 1 in kNoMem, dims().episodes otherwise.
  std::size_t episodes() const;

  // Copies matching rows of a GloVe-style file over the embedding matrix.
  enc::EmbeddingLoadResult LoadPretrainedEmbeddings(const std::string &path,
                                                    std::uint64_t seed,
                                                    double bound = 0.08);

  // Per-candidate probability of being correct, recorded on tape. Throws
  // std::invalid_argument when knowledge is required but not attached, or
  // when the image features have the wrong length.
  std::array<Var, kNumCandidates> Forward(Tape &tape, const QAContext &context) const;

  // Sum over candidates of the binary cross-entropy, times `scale`.
  Var ContextLoss(Tape &tape, const QAContext &context, double scale = 1.0) const;

  Prediction Predict(const QAContext &context) const;

  // Attention of every episode for candidate `candidate`, for inspection.
  std::vector<Tensor> AttentionTrace(const QAContext &context, std::size_t candidate) const;

  // Embedding / projection building blocks, exposed for tests.
  Var EmbedModality(Tape &tape, Var features, std::string_view modality) const;
  Var ScoreCandidate(Tape &tape, Var fused, const Var *memory) const;

 private:
  ModelDims dims_;
  Mode mode_;
  enc::Vocabulary vocab_;
  ParameterStore params_;
  enc::StackedLstm triple_encoder_;
  enc::StackedLstm question_encoder_;
  enc::StackedLstm answer_encoder_;
};

Var Fuse(Var image, Var question, Var answer);

// Binary cross-entropy with the probability clamped into [eps, 1 - eps].
double Loss(double probability, int label, double eps = 1e-12);
// Mean loss over (probability, label) pairs.
double BatchLoss(std::span<const double> probabilities, std::span<const int> labels);

struct TrainResult {
  std::vector<double> epoch_loss;  // mean instance loss seen during each epoch
  std::vector<double> batch_loss;
};

// Raised when a parameter becomes NaN/Inf during training.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

// Plain minibatch SGD. Every context contributes four binary instances (one
// per candidate, positive iff it is the labelled answer); the batch loss is
// their mean. Contexts are reshuffled every epoch with a generator seeded
// from config.seed.
TrainResult Train(KdmnModel &model, std::span<const QAContext> data,
                  const TrainConfig &config, const EpochCallback &on_epoch = nullptr);

// Fraction of contexts whose predicted choice equals the label. Throws on
// an empty dataset or an unlabelled context.
double Evaluate(const KdmnModel &model, std::span<const QAContext> data);

// Averages per-candidate probabilities across models, then takes the argmax.
Prediction EnsemblePredict(std::span<const KdmnModel *const> models,
                           const QAContext &context);
double EvaluateEnsemble(std::span<const KdmnModel *const> models,
                        std::span<const QAContext> data);

}  // namespace kdmn::model

#endif  // KDMN_MODEL_HPP_
