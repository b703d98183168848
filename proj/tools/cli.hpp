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

// The kdmn command-line tool.
//
//   kdmn ingest-kg   --graph raw.tsv --out graph.tsv
//   kdmn toy-world   --seed 7 --graph-out graph.tsv --scenes-out scenes.jsonl
//   kdmn generate-qa --scenes scenes.jsonl --graph graph.tsv --count 300
//                    --seed 11 --out qa.jsonl --features-out features.tsv
//   kdmn retrieve    --graph graph.tsv --object candle:40 --question "..."
//   kdmn train       --graph graph.tsv --dataset qa.jsonl --features features.tsv
//                    --out model.ckpt [--config run.cfg] [--top-n 3 ...]
//   kdmn eval        --checkpoint model.ckpt [--checkpoint ...] --graph ...
//   kdmn gradcheck
//
// Every RunConfig key is also a flag: "retrieval.top_n" is --top-n,
// "train.learning_rate" is --learning-rate. Flags override --config.

#ifndef KDMN_TOOLS_CLI_HPP_
#define KDMN_TOOLS_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace kdmn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Runs one invocation; args excludes the program name.
int Run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

// Flag spelling of a RunConfig key ("retrieval.top_n" -> "top-n").
std::string FlagName(const std::string &config_key);

}  // namespace kdmn::cli

#endif  // KDMN_TOOLS_CLI_HPP_
