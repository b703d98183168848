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

#include "kdmn/model.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <random>
#include <stdexcept>

namespace kdmn::model {

using num::AddBias;
using num::MatMulNT;

std::string_view ModeName(Mode mode) {
  switch (mode) {
    case Mode::kFull:
      return "full";
    case Mode::kNoMem:
      return "nomem";
    case Mode::kNoKG:
      return "nokg";
  }
  return "unknown";
}

Mode ParseMode(std::string_view name) {
  std::string key;
  for (char c : name) {
    if (c == '-' || c == '_') continue;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (key == "full" || key == "kdmn") return Mode::kFull;
  if (key == "nomem" || key == "kdmnnomem") return Mode::kNoMem;
  if (key == "nokg" || key == "kdmnnokg") return Mode::kNoKG;
  throw std::invalid_argument("unknown model mode: " + std::string(name));
}

void ModelDims::Validate() const {
  if (word == 0 || hidden == 0 || common == 0 || attention == 0 || image == 0 ||
      episodes == 0 || lstm_layers == 0) {
    throw std::invalid_argument("model dimensions must all be positive");
  }
}

void TrainConfig::Validate() const {
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning_rate must be >= 0");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
}

std::size_t ArgMax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax of nothing");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

KdmnModel::KdmnModel(ModelDims dims, Mode mode, enc::Vocabulary vocab, std::uint64_t seed,
                     double init_bound)
    : dims_(dims), mode_(mode), vocab_(std::move(vocab)) {
  dims_.Validate();
  params_.Add("embedding", {vocab_.size(), dims_.word});
  question_encoder_ = enc::StackedLstm("question", dims_.word, dims_.hidden, dims_.lstm_layers);
  answer_encoder_ = enc::StackedLstm("answer", dims_.word, dims_.hidden, dims_.lstm_layers);
  question_encoder_.Register(params_);
  answer_encoder_.Register(params_);
  if (mode_ != Mode::kNoKG) {
    triple_encoder_ = enc::StackedLstm("triple", dims_.word, dims_.hidden, dims_.lstm_layers);
    triple_encoder_.Register(params_);
    mem::RegisterMemoryParams(params_, {dims_.slot(), dims_.image, dims_.hidden,
                                        dims_.hidden, dims_.attention});
  }
  for (const char *modality : {"image", "question", "answer"}) {
    const std::string base = std::string("fuse.") + modality;
    const std::size_t in = std::string_view(modality) == "image" ? dims_.image : dims_.hidden;
    params_.Add(base + ".w", {dims_.common, in});
    params_.Add(base + ".b", {dims_.common});
  }
  const std::size_t joint = dims_.common + (mode_ == Mode::kNoKG ? 0 : dims_.slot());
  params_.Add("out.w4", {2, joint});
  params_.Add("out.b4", {2});

  std::mt19937_64 rng(seed);
  params_.InitUniform(rng, init_bound);
}

std::size_t KdmnModel::episodes() const {
  return mode_ == Mode::kNoMem ? 1 : dims_.episodes;
}

enc::EmbeddingLoadResult KdmnModel::LoadPretrainedEmbeddings(const std::string &path,
                                                             std::uint64_t seed,
                                                             double bound) {
  std::mt19937_64 rng(seed);
  auto loaded = enc::LoadEmbeddings(path, vocab_, dims_.word, rng, bound);
  params_.Value("embedding") = loaded.matrix;
  return loaded;
}

Var KdmnModel::EmbedModality(Tape &tape, Var features, std::string_view modality) const {
  const std::string base = "fuse." + std::string(modality);
  return num::Tanh(AddBias(MatMulNT(features, tape.Param(base + ".w")),
                           tape.Param(base + ".b")));
}

Var Fuse(Var image, Var question, Var answer) {
  return num::Hadamard(num::Hadamard(image, question), answer);
}

Var KdmnModel::ScoreCandidate(Tape &tape, Var fused, const Var *memory) const {
  Var joint = memory != nullptr ? num::Concat({fused, *memory}) : fused;
  Var logits = AddBias(MatMulNT(joint, tape.Param("out.w4")), tape.Param("out.b4"));
  return num::Element(num::Softmax(logits), 1);
}

std::array<Var, kNumCandidates> KdmnModel::Forward(Tape &tape,
                                                   const QAContext &context) const {
  if (context.image_features.size() != dims_.image) {
    throw std::invalid_argument("image " + context.image_id + ": feature length " +
                                std::to_string(context.image_features.size()) +
                                " != configured " + std::to_string(dims_.image));
  }
  const bool uses_memory = mode_ != Mode::kNoKG;
  if (uses_memory && !context.knowledge) {
    throw std::invalid_argument("image " + context.image_id +
                                ": no retrieved knowledge attached");
  }
  Var embedding = tape.Param("embedding");
  Var image = tape.Constant(Tensor({dims_.image}, context.image_features.values()));
  Var question =
      enc::EncodeText(tape, context.question_tokens, vocab_, question_encoder_, embedding);
  Var e_image = EmbedModality(tape, image, "image");
  Var e_question = EmbedModality(tape, question, "question");

  mem::MemoryWeights weights;
  mem::PreparedBank bank;
  if (uses_memory) {
    weights = mem::MemoryWeights::Bind(tape);
    Var slots =
        enc::BuildMemoryBank(tape, *context.knowledge, vocab_, triple_encoder_, embedding);
    bank = mem::PrepareBank(slots, weights);
  }

  std::array<Var, kNumCandidates> probabilities;
  for (std::size_t a = 0; a < kNumCandidates; ++a) {
    Var answer =
        enc::EncodeText(tape, context.candidates[a], vocab_, answer_encoder_, embedding);
    Var fused = Fuse(e_image, e_question, EmbedModality(tape, answer, "answer"));
    if (!uses_memory) {
      probabilities[a] = ScoreCandidate(tape, fused, nullptr);
      continue;
    }
    Var query = mem::MakeQuery(image, question, answer, weights);
    mem::EpisodicState state = mem::RunEpisodes(bank, query, episodes(), weights);
    probabilities[a] = ScoreCandidate(tape, fused, &state.memory);
  }
  return probabilities;
}

Var KdmnModel::ContextLoss(Tape &tape, const QAContext &context, double scale) const {
  if (!context.label || *context.label >= kNumCandidates) {
    throw std::invalid_argument("image " + context.image_id + ": missing or bad label");
  }
  auto probabilities = Forward(tape, context);
  std::vector<Var> losses;
  for (std::size_t a = 0; a < kNumCandidates; ++a) {
    const double y = a == *context.label ? 1.0 : 0.0;
    losses.push_back(num::BinaryCrossEntropy(probabilities[a], y));
  }
  return num::Scale(num::Sum(num::Concat(losses)), scale);
}

Prediction KdmnModel::Predict(const QAContext &context) const {
  Tape tape(params_);
  auto probabilities = Forward(tape, context);
  Prediction p;
  for (std::size_t a = 0; a < kNumCandidates; ++a) {
    p.probabilities[a] = probabilities[a].value().item();
  }
  p.choice = ArgMax(p.probabilities);
  return p;
}

std::vector<Tensor> KdmnModel::AttentionTrace(const QAContext &context,
                                              std::size_t candidate) const {
  if (mode_ == Mode::kNoKG) return {};
  if (!context.knowledge) throw std::invalid_argument("no retrieved knowledge attached");
  Tape tape(params_);
  Var embedding = tape.Param("embedding");
  Var image = tape.Constant(Tensor({dims_.image}, context.image_features.values()));
  Var question =
      enc::EncodeText(tape, context.question_tokens, vocab_, question_encoder_, embedding);
  Var answer = enc::EncodeText(tape, context.candidates.at(candidate), vocab_,
                               answer_encoder_, embedding);
  auto weights = mem::MemoryWeights::Bind(tape);
  Var slots = enc::BuildMemoryBank(tape, *context.knowledge, vocab_, triple_encoder_, embedding);
  Var query = mem::MakeQuery(image, question, answer, weights);
  return mem::RunEpisodes(slots, query, episodes(), weights).attention;
}

double Loss(double probability, int label, double eps) {
  return num::BinaryCrossEntropyValue(probability, static_cast<double>(label), eps);
}

double BatchLoss(std::span<const double> probabilities, std::span<const int> labels) {
  if (probabilities.size() != labels.size() || probabilities.empty()) {
    throw std::invalid_argument("batch loss needs equally many probabilities and labels");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) total += Loss(probabilities[i], labels[i]);
  return total / static_cast<double>(labels.size());
}

TrainResult Train(KdmnModel &model, std::span<const QAContext> data,
                  const TrainConfig &config, const EpochCallback &on_epoch) {
  config.Validate();
  if (data.empty()) throw std::invalid_argument("training set is empty");
  auto &params = model.params();
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double instances = static_cast<double>(kNumCandidates * (end - start));
      params.ZeroGrad();
      double batch_total = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        Tape tape(&params);
        Var loss = model.ContextLoss(tape, data[order[k]], 1.0 / instances);
        batch_total += loss.value().item();
        tape.Backward(loss);
      }
      params.SgdStep(config.learning_rate);
      if (auto bad = params.FirstNonFinite()) {
        throw TrainingDiverged("parameter " + *bad + " became non-finite in epoch " +
                               std::to_string(epoch + 1) + " (batch starting at " +
                               std::to_string(start) + ", lr " +
                               std::to_string(config.learning_rate) + ")");
      }
      result.batch_loss.push_back(batch_total);
      epoch_total += batch_total * instances;
    }
    const double mean = epoch_total / static_cast<double>(kNumCandidates * data.size());
    result.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch + 1, mean);
  }
  return result;
}

double Evaluate(const KdmnModel &model, std::span<const QAContext> data) {
  const KdmnModel *one[] = {&model};
  return EvaluateEnsemble(one, data);
}

Prediction EnsemblePredict(std::span<const KdmnModel *const> models,
                           const QAContext &context) {
  if (models.empty()) throw std::invalid_argument("ensemble needs at least one model");
  Prediction out;
  for (const KdmnModel *m : models) {
    Prediction p = m->Predict(context);
    for (std::size_t a = 0; a < kNumCandidates; ++a) out.probabilities[a] += p.probabilities[a];
  }
  for (double &p : out.probabilities) p /= static_cast<double>(models.size());
  out.choice = ArgMax(out.probabilities);
  return out;
}

double EvaluateEnsemble(std::span<const KdmnModel *const> models,
                        std::span<const QAContext> data) {
  if (data.empty()) throw std::invalid_argument("cannot evaluate on an empty dataset");
  std::size_t correct = 0;
  for (const auto &context : data) {
    if (!context.label) {
      throw std::invalid_argument("image " + context.image_id + ": unlabelled context");
    }
    if (EnsemblePredict(models, context).choice == *context.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace kdmn::model
