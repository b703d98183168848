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

#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "kdmn/config.hpp"
#include "kdmn/datagen.hpp"
#include "kdmn/dataset.hpp"
#include "kdmn/gradsuite.hpp"
#include "kdmn/kg.hpp"
#include "kdmn/model.hpp"
#include "kdmn/retrieval.hpp"

namespace kdmn::cli {
namespace {

// Thrown for flag values that parse but make no sense; reported as usage.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string Num(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

std::ofstream OpenOut(const std::string &path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  return f;
}

// RunConfig keys exposed as flags on one subcommand.
struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;

  void Attach(CLI::App *app, const std::vector<std::string> &sections) {
    app->add_option("--config", config_path, "run configuration file");
    for (const auto &key : RunConfig::Keys()) {
      const std::string section = key.substr(0, key.find('.'));
      if (std::find(sections.begin(), sections.end(), section) == sections.end()) continue;
      app->add_option("--" + FlagName(key), values[key], key);
    }
    flags_of_ = app;
  }

  RunConfig Resolve() const {
    RunConfig config;
    if (!config_path.empty()) config = ParseConfigFile(config_path, config);
    for (const auto &[key, value] : values) {
      if (flags_of_->count("--" + FlagName(key)) == 0) continue;
      try {
        config.Set(key, value);
      } catch (const ConfigError &e) {
        throw UsageError("--" + FlagName(key) + ": " + e.what());
      }
    }
    try {
      config.Validate();
    } catch (const ConfigError &e) {
      throw UsageError(e.what());
    }
    return config;
  }

 private:
  CLI::App *flags_of_ = nullptr;
};

retrieval::DetectedObject ParseObject(const std::string &text) {
  retrieval::DetectedObject object;
  const auto colon = text.rfind(':');
  object.entity = kg::NormalizeSurface(text.substr(0, colon));
  object.area = 1.0;
  if (colon != std::string::npos) {
    const std::string area = text.substr(colon + 1);
    std::size_t used = 0;
    try {
      object.area = std::stod(area, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used == 0 || used != area.size() || !(object.area >= 0.0)) {
      throw UsageError("--object: bad area in '" + text + "'");
    }
  }
  if (object.entity.empty()) throw UsageError("--object: empty entity in '" + text + "'");
  return object;
}

void WriteRanked(std::ostream &out, const std::string &image_id,
                 const retrieval::RankedKnowledge &ranked) {
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto &r = ranked.triples[i];
    out << image_id << '\t' << i + 1 << '\t' << r.triple.head << '\t' << r.triple.relation << '\t'
        << r.triple.tail << '\t' << Num(r.weight) << '\n';
  }
}

std::string VocabPath(const std::string &checkpoint) { return checkpoint + ".vocab"; }
std::string ConfigPath(const std::string &checkpoint) { return checkpoint + ".config"; }

struct LoadedModel {
  RunConfig config;
  std::unique_ptr<model::KdmnModel> model;
};

LoadedModel LoadCheckpoint(const std::string &path) {
  LoadedModel m;
  m.config = ParseConfigFile(ConfigPath(path));
  m.config.Validate();
  auto vocab = enc::Vocabulary::ReadFile(VocabPath(path));
  m.model = std::make_unique<model::KdmnModel>(m.config.model, m.config.mode, std::move(vocab),
                                               m.config.train.seed, 0.0);
  m.model->params().LoadFile(path);
  return m;
}

struct Inputs {
  std::string graph;
  std::string dataset;
  std::string features;

  void Attach(CLI::App *app) {
    app->add_option("--graph", graph, "knowledge graph TSV")->required();
    app->add_option("--dataset", dataset, "QA items, JSON lines")->required();
    app->add_option("--features", features, "image feature table")->required();
  }
};

int IngestKg(const std::string &in, const std::string &out_path, std::ostream &out) {
  const auto graph = kg::LoadGraphFile(in);
  if (out_path.empty()) {
    graph.Write(out);
    return kExitOk;
  }
  graph.WriteFile(out_path);
  out << "triples=" << graph.size() << " entities=" << graph.entities().size()
      << " relations=" << graph.relations().size() << '\n';
  return kExitOk;
}

}  // namespace

std::string FlagName(const std::string &config_key) {
  std::string flag = config_key.substr(config_key.find('.') + 1);
  std::replace(flag.begin(), flag.end(), '_', '-');
  return flag;
}

int Run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Knowledge-incorporated dynamic memory network for multi-choice VQA.", "kdmn"};
  app.require_subcommand(1);

  // ingest-kg
  std::string ingest_in, ingest_out;
  auto *ingest = app.add_subcommand("ingest-kg", "normalize and deduplicate a triple TSV");
  ingest->add_option("--graph", ingest_in, "raw head/relation/tail TSV")->required();
  ingest->add_option("--out", ingest_out, "output TSV (stdout when absent)");

  // toy-world
  std::uint64_t toy_seed = 7;
  std::string toy_graph, toy_scenes;
  datagen::ToyWorldConfig toy;
  auto *toyc = app.add_subcommand("toy-world", "write a synthetic graph and scene set");
  toyc->add_option("--seed", toy_seed);
  toyc->add_option("--objects", toy.objects);
  toyc->add_option("--concepts", toy.concepts);
  toyc->add_option("--scenes", toy.scenes);
  toyc->add_option("--graph-out", toy_graph)->required();
  toyc->add_option("--scenes-out", toy_scenes)->required();

  // generate-qa
  std::string gen_scenes, gen_graph, gen_out, gen_features;
  std::size_t gen_count = 0, gen_per_scene = 2;
  std::uint64_t gen_seed = 0;
  auto *gen = app.add_subcommand("generate-qa", "generate four-choice questions from scenes");
  gen->add_option("--scenes", gen_scenes, "scene annotations, JSON lines")->required();
  gen->add_option("--graph", gen_graph, "knowledge graph TSV")->required();
  gen->add_option("--count", gen_count, "items to generate")->required();
  gen->add_option("--seed", gen_seed);
  gen->add_option("--per-scene", gen_per_scene, "questions drawn per scene");
  gen->add_option("--out", gen_out, "output JSON lines")->required();
  gen->add_option("--features-out", gen_features, "entity-presence feature table");

  // retrieve
  std::string ret_graph, ret_question, ret_dataset, ret_out;
  std::vector<std::string> ret_objects;
  ConfigFlags ret_flags;
  auto *ret = app.add_subcommand("retrieve", "rank candidate knowledge for a visual context");
  ret->add_option("--graph", ret_graph, "knowledge graph TSV")->required();
  ret->add_option("--object", ret_objects, "detected object ENTITY[:AREA], repeatable");
  ret->add_option("--question", ret_question);
  ret->add_option("--dataset", ret_dataset, "rank for every item instead");
  ret->add_option("--out", ret_out, "output TSV (stdout when absent)");
  ret_flags.Attach(ret, {"retrieval"});

  // train
  Inputs train_in;
  std::string train_out, train_embeddings;
  ConfigFlags train_flags;
  auto *train = app.add_subcommand("train", "train a model and write a checkpoint");
  train_in.Attach(train);
  train->add_option("--out", train_out, "checkpoint path")->required();
  train->add_option("--embeddings", train_embeddings, "GloVe-style word vectors");
  train_flags.Attach(train, {"retrieval", "model", "train"});

  // eval
  Inputs eval_in;
  std::vector<std::string> eval_checkpoints;
  auto *eval = app.add_subcommand("eval", "accuracy of a checkpoint or an ensemble");
  eval_in.Attach(eval);
  eval->add_option("--checkpoint", eval_checkpoints, "checkpoint, repeat for an ensemble")
      ->required();

  // gradcheck
  GradSuiteOptions grad;
  auto *gradc = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  gradc->add_option("--seed", grad.seed);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    const auto subs = app.get_subcommands();
    err << "kdmn: " << e.what() << '\n' << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    if (*ingest) return IngestKg(ingest_in, ingest_out, out);

    if (*toyc) {
      const auto world = datagen::MakeToyWorld(toy, toy_seed);
      world.graph.WriteFile(toy_graph);
      datagen::WriteScenesFile(toy_scenes, world.scenes);
      out << "triples=" << world.graph.size() << " entities=" << world.graph.entities().size()
          << " scenes=" << world.scenes.size() << '\n';
      return kExitOk;
    }

    if (*gen) {
      const auto graph = kg::LoadGraphFile(gen_graph);
      const auto scenes = datagen::ReadScenesFile(gen_scenes);
      if (gen_count == 0) throw UsageError("--count must be positive");
      const auto result =
          datagen::GenerateDataset(scenes, graph, gen_count, gen_seed, gen_per_scene);
      model::WriteDatasetFile(gen_out, result.records);
      if (!gen_features.empty()) {
        model::FeatureTable table;
        for (const auto &s : scenes) {
          table.Set(s.image_id, model::PresenceFeatures(s.objects, graph));
        }
        table.WriteFile(gen_features);
      }
      out << "items=" << result.records.size() << " stems=" << result.stems
          << " discarded=" << result.discarded << " shortfall=" << result.shortfall() << '\n';
      return kExitOk;
    }

    if (*ret) {
      const RunConfig config = ret_flags.Resolve();
      std::vector<retrieval::DetectedObject> objects;
      for (const auto &o : ret_objects) objects.push_back(ParseObject(o));
      const auto graph = kg::LoadGraphFile(ret_graph);
      std::ostringstream tsv;
      if (!ret_dataset.empty()) {
        if (!ret_objects.empty() || !ret_question.empty()) {
          throw UsageError("--dataset excludes --object and --question");
        }
        for (const auto &r : model::ReadDatasetFile(ret_dataset)) {
          const auto q = retrieval::BuildContextQuery(graph, r.objects, r.question, config.retrieval);
          WriteRanked(tsv, r.image_id, retrieval::Retrieve(graph, q, config.retrieval));
        }
      } else {
        const auto q = retrieval::BuildContextQuery(graph, objects, ret_question, config.retrieval);
        WriteRanked(tsv, "-", retrieval::Retrieve(graph, q, config.retrieval));
      }
      if (ret_out.empty()) {
        out << tsv.str();
      } else {
        OpenOut(ret_out) << tsv.str();
      }
      return kExitOk;
    }

    if (*train) {
      RunConfig config = train_flags.Resolve();
      const auto graph = kg::LoadGraphFile(train_in.graph);
      const auto records = model::ReadDatasetFile(train_in.dataset);
      const auto features = model::FeatureTable::ReadFile(train_in.features);
      config.model.image = features.dim();
      const auto contexts = model::PrepareContexts(records, graph, features, config.retrieval,
                                                   config.mode != model::Mode::kNoKG);
      model::KdmnModel m(config.model, config.mode, model::BuildVocabulary(graph, contexts),
                         config.train.seed, config.init_bound);
      if (!train_embeddings.empty()) {
        const auto loaded =
            m.LoadPretrainedEmbeddings(train_embeddings, config.train.seed, config.init_bound);
        out << "embeddings covered=" << loaded.covered << '\n';
      }
      model::Train(m, contexts, config.train, [&](std::size_t epoch, double loss) {
        out << "epoch=" << epoch << " loss=" << Num(loss) << '\n';
      });
      m.params().SaveFile(train_out);
      m.vocab().WriteFile(VocabPath(train_out));
      config.WriteFile(ConfigPath(train_out));
      out << "train_accuracy=" << Num(model::Evaluate(m, contexts)) << '\n';
      return kExitOk;
    }

    if (*eval) {
      std::vector<LoadedModel> models;
      for (const auto &path : eval_checkpoints) models.push_back(LoadCheckpoint(path));
      const auto graph = kg::LoadGraphFile(eval_in.graph);
      const auto records = model::ReadDatasetFile(eval_in.dataset);
      const auto features = model::FeatureTable::ReadFile(eval_in.features);
      // Knowledge is retrieved once, with the first checkpoint's settings.
      const bool retrieve = std::any_of(models.begin(), models.end(), [](const LoadedModel &m) {
        return m.config.mode != model::Mode::kNoKG;
      });
      const auto contexts = model::PrepareContexts(records, graph, features,
                                                   models.front().config.retrieval, retrieve);
      if (models.size() == 1) {
        out << "accuracy=" << Num(model::Evaluate(*models.front().model, contexts)) << '\n';
        return kExitOk;
      }
      std::vector<const model::KdmnModel *> members;
      for (std::size_t i = 0; i < models.size(); ++i) {
        members.push_back(models[i].model.get());
        out << "member=" << eval_checkpoints[i]
            << " accuracy=" << Num(model::Evaluate(*models[i].model, contexts)) << '\n';
      }
      out << "accuracy=" << Num(model::EvaluateEnsemble(members, contexts)) << '\n';
      return kExitOk;
    }

    if (*gradc) {
      const auto entries = RunGradientSuite(grad);
      for (const auto &e : entries) {
        out << e.name << " max_rel=" << Num(e.result.max_relative_error)
            << " coordinates=" << e.result.coordinates << " kinks=" << e.result.kinks
            << " eps=" << Num(e.epsilon) << '\n';
      }
      const double worst = MaxRelativeError(entries);
      out << "max_relative_error=" << Num(worst) << '\n';
      return worst < 1e-4 ? kExitOk : kExitFailure;
    }
  } catch (const UsageError &e) {
    err << "kdmn: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception &e) {
    err << "kdmn: error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace kdmn::cli
