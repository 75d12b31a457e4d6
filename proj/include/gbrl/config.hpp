// Copyright 2026 The gbrl-cpp Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GBRL_CONFIG_HPP_
#define GBRL_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gbrl/algos.hpp"
#include "gbrl/tree.hpp"

namespace gbrl {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Everything a training run needs. Stored as INI text with [run], [algo]
// and [tree] sections.
struct RunConfig {
  std::string env = "cartpole";
  AlgoConfig algo;
  TreeFitConfig tree;
  std::uint64_t seed = 0;
  std::int64_t total_timesteps = 500000;
  std::int64_t checkpoint_interval = 0;
  std::string output_dir = "runs/default";
  bool shared_ac = true;

  // Throws ConfigError (wrapping the algo/tree checks).
  void validate() const;
};

// Unknown sections or keys and malformed values throw ConfigError; keys
// that are absent keep their defaults.
RunConfig parse_run_config(std::string_view text);
// Throws std::ios_base::failure when the file cannot be read.
RunConfig load_run_config(const std::filesystem::path& path);
// Every key, in a fixed order; parse_run_config(serialize(c)) == c.
std::string serialize_run_config(const RunConfig& cfg);

// `key` is "section.name" or a bare name that is unique across sections.
void apply_override(RunConfig& cfg, std::string_view key,
                    std::string_view value);

// Lists "section.name" for every recognised key.
std::vector<std::string> config_keys();

}  // namespace gbrl

#endif  // GBRL_CONFIG_HPP_
