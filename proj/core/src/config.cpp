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

#include "kdmn/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace kdmn {
namespace {

std::string_view Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t ParseSize(std::string_view key, std::string_view text) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" +
                      std::string(text) + "'");
  }
  return v;
}

double ParseDouble(std::string_view key, std::string_view text) {
  const std::string s(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + s + "'");
  }
  return v;
}

std::string Format(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

const std::vector<std::string> &RunConfig::Keys() {
  static const std::vector<std::string> keys = {
      "retrieval.decay",     "retrieval.max_hops",   "retrieval.top_n",
      "retrieval.visual_mass", "retrieval.max_ngram", "model.mode",
      "model.word_dim",      "model.hidden",         "model.common_dim",
      "model.attention_dim", "model.image_dim",      "model.episodes",
      "model.lstm_layers",   "model.init_bound",     "train.learning_rate",
      "train.batch_size",    "train.epochs",         "train.seed",
  };
  return keys;
}

void RunConfig::Set(std::string_view key, std::string_view raw) {
  const std::string_view v = Trim(raw);
  if (key == "retrieval.decay") retrieval.decay = ParseDouble(key, v);
  else if (key == "retrieval.max_hops") retrieval.max_hops = ParseSize(key, v);
  else if (key == "retrieval.top_n") retrieval.top_n = ParseSize(key, v);
  else if (key == "retrieval.visual_mass") retrieval.visual_mass = ParseDouble(key, v);
  else if (key == "retrieval.max_ngram") retrieval.max_ngram = ParseSize(key, v);
  else if (key == "model.mode") {
    try {
      mode = model::ParseMode(v);
    } catch (const std::exception &e) {
      throw ConfigError(std::string(key) + ": " + e.what());
    }
  }
  else if (key == "model.word_dim") model.word = ParseSize(key, v);
  else if (key == "model.hidden") model.hidden = ParseSize(key, v);
  else if (key == "model.common_dim") model.common = ParseSize(key, v);
  else if (key == "model.attention_dim") model.attention = ParseSize(key, v);
  else if (key == "model.image_dim") model.image = ParseSize(key, v);
  else if (key == "model.episodes") model.episodes = ParseSize(key, v);
  else if (key == "model.lstm_layers") model.lstm_layers = ParseSize(key, v);
  else if (key == "model.init_bound") init_bound = ParseDouble(key, v);
  else if (key == "train.learning_rate") train.learning_rate = ParseDouble(key, v);
  else if (key == "train.batch_size") train.batch_size = ParseSize(key, v);
  else if (key == "train.epochs") train.epochs = ParseSize(key, v);
  else if (key == "train.seed") train.seed = ParseSize(key, v);
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

std::string RunConfig::Get(std::string_view key) const {
  if (key == "retrieval.decay") return Format(retrieval.decay);
  if (key == "retrieval.max_hops") return std::to_string(retrieval.max_hops);
  if (key == "retrieval.top_n") return std::to_string(retrieval.top_n);
  if (key == "retrieval.visual_mass") return Format(retrieval.visual_mass);
  if (key == "retrieval.max_ngram") return std::to_string(retrieval.max_ngram);
  if (key == "model.mode") return std::string(model::ModeName(mode));
  if (key == "model.word_dim") return std::to_string(model.word);
  if (key == "model.hidden") return std::to_string(model.hidden);
  if (key == "model.common_dim") return std::to_string(model.common);
  if (key == "model.attention_dim") return std::to_string(model.attention);
  if (key == "model.image_dim") return std::to_string(model.image);
  if (key == "model.episodes") return std::to_string(model.episodes);
  if (key == "model.lstm_layers") return std::to_string(model.lstm_layers);
  if (key == "model.init_bound") return Format(init_bound);
  if (key == "train.learning_rate") return Format(train.learning_rate);
  if (key == "train.batch_size") return std::to_string(train.batch_size);
  if (key == "train.epochs") return std::to_string(train.epochs);
  if (key == "train.seed") return std::to_string(train.seed);
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void RunConfig::Validate() const {
  try {
    retrieval.Validate();
    model.Validate();
    train.Validate();
  } catch (const std::invalid_argument &e) {
    throw ConfigError(e.what());
  }
  if (!(init_bound >= 0.0)) throw ConfigError("model.init_bound must be non-negative");
}

void RunConfig::Write(std::ostream &out) const {
  std::string section;
  for (const auto &key : Keys()) {
    const auto dot = key.find('.');
    const std::string s = key.substr(0, dot);
    if (s != section) {
      if (!section.empty()) out << '\n';
      out << '[' << s << "]\n";
      section = s;
    }
    out << key.substr(dot + 1) << " = " << Get(key) << '\n';
  }
}

void RunConfig::WriteFile(const std::string &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  Write(out);
}

RunConfig ParseConfig(std::istream &in, RunConfig config) {
  std::string line;
  std::string section;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string where = "config line " + std::to_string(number) + ": ";
    std::string_view text = line;
    const auto comment = text.find_first_of("#;");
    if (comment != std::string_view::npos) text = text.substr(0, comment);
    text = Trim(text);
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError(where + "unterminated section header");
      section = std::string(Trim(text.substr(1, text.size() - 2)));
      if (section != "retrieval" && section != "model" && section != "train") {
        throw ConfigError(where + "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
    if (section.empty()) throw ConfigError(where + "key outside of a section");
    const std::string key = section + "." + std::string(Trim(text.substr(0, eq)));
    try {
      config.Set(key, text.substr(eq + 1));
    } catch (const ConfigError &e) {
      throw ConfigError(where + e.what());
    }
  }
  return config;
}

RunConfig ParseConfigFile(const std::string &path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  return ParseConfig(in, std::move(base));
}

}  // namespace kdmn
