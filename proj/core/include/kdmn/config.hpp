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

// Run configuration file.
//
//   # comment
//   [retrieval]
//   decay = 0.5
//   top_n = 20
//   [model]
//   mode = full
//   hidden = 512
//   [train]
//   learning_rate = 1e-4
//
// Every key is optional; defaults are the reference hyper-parameters.
// Unknown sections and keys are errors.

#ifndef KDMN_CONFIG_HPP_
#define KDMN_CONFIG_HPP_

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kdmn/model.hpp"
#include "kdmn/retrieval.hpp"

namespace kdmn {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  retrieval::RetrievalConfig retrieval;
  model::ModelDims model;
  model::Mode mode = model::Mode::kFull;
  double init_bound = 0.08;
  model::TrainConfig train;

  // Sets "section.key" from its text form; throws ConfigError for unknown
  // keys or unparsable values.
  void Set(std::string_view dotted_key, std::string_view value);
  // Text form of one value; throws ConfigError for unknown keys.
  std::string Get(std::string_view dotted_key) const;
  static const std::vector<std::string> &Keys();

  void Validate() const;

  // Writes every key, readable by Parse.
  void Write(std::ostream &out) const;
  void WriteFile(const std::string &path) const;
};

// Applies the file's assignments on top of `base`.
RunConfig ParseConfig(std::istream &in, RunConfig base = {});
RunConfig ParseConfigFile(const std::string &path, RunConfig base = {});

}  // namespace kdmn

#endif  // KDMN_CONFIG_HPP_
