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

#include <gtest/gtest.h>

#include <filesystem>

#include "gbrl/config.hpp"

namespace gbrl {
namespace {

const std::filesystem::path kConfigDir = GBRL_CONFIG_DIR;

TEST(RunConfig, PresetsLoadAndValidate) {
  for (const auto& entry : std::filesystem::directory_iterator(kConfigDir)) {
    if (entry.path().extension() != ".ini") continue;
    SCOPED_TRACE(entry.path().string());
    const RunConfig cfg = load_run_config(entry.path());
    EXPECT_NO_THROW(cfg.validate());
  }
}

TEST(RunConfig, CartPolePreset) {
  const RunConfig cfg = load_run_config(kConfigDir / "cartpole_ppo.ini");
  EXPECT_EQ(cfg.env, "cartpole");
  EXPECT_EQ(cfg.algo.algo, Algorithm::kPPO);
  EXPECT_EQ(cfg.algo.batch_size, 64);
  EXPECT_EQ(cfg.algo.gae_lambda, 0.8);
  EXPECT_EQ(cfg.algo.gamma, 0.98);
  EXPECT_EQ(cfg.algo.n_steps, 128);
  EXPECT_EQ(cfg.algo.n_envs, 8);
  EXPECT_EQ(cfg.algo.lr_actor, 0.029);
  EXPECT_EQ(cfg.algo.lr_critic, 0.015);
  EXPECT_TRUE(cfg.shared_ac);
}

TEST(RunConfig, SerializeRoundTrip) {
  RunConfig cfg = load_run_config(kConfigDir / "pendulum_ppo.ini");
  cfg.seed = 77;
  cfg.algo.lr_logstd = 0.1 + 0.2;
  const RunConfig back = parse_run_config(serialize_run_config(cfg));
  EXPECT_EQ(serialize_run_config(back), serialize_run_config(cfg));
  EXPECT_EQ(back.algo.lr_logstd, cfg.algo.lr_logstd);
  EXPECT_TRUE(back.algo.lr_logstd_linear);
  EXPECT_EQ(back.seed, 77u);
}

TEST(RunConfig, DefaultsWhenEmpty) {
  const RunConfig cfg = parse_run_config("");
  EXPECT_EQ(cfg.env, "cartpole");
  EXPECT_EQ(cfg.total_timesteps, 500000);
}

TEST(RunConfig, RejectsBadInput) {
  EXPECT_THROW(parse_run_config("[algo]\nlearning_rate = 3\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[bogus]\nx = 1\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[algo]\ngamma = fast\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[algo]\nalgo = dqn\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[run]\nenv = mountaincar\n").validate(), ConfigError);
  EXPECT_THROW(parse_run_config("[algo]\ngamma = 1.5\n").validate(), ConfigError);
  EXPECT_THROW(parse_run_config("[tree]\nmax_depth = 0\n").validate(), ConfigError);
  EXPECT_THROW(load_run_config(kConfigDir / "missing.ini"), std::ios_base::failure);
}

TEST(RunConfig, Overrides) {
  RunConfig cfg;
  apply_override(cfg, "algo.gamma", "0.5");
  apply_override(cfg, "max_depth", "7");
  apply_override(cfg, "seed", "12");
  apply_override(cfg, "shared_ac", "false");
  EXPECT_EQ(cfg.algo.gamma, 0.5);
  EXPECT_EQ(cfg.tree.max_depth, 7);
  EXPECT_EQ(cfg.seed, 12u);
  EXPECT_FALSE(cfg.shared_ac);
  EXPECT_THROW(apply_override(cfg, "nope", "1"), ConfigError);
  EXPECT_THROW(apply_override(cfg, "algo.n_envs", "x"), ConfigError);
  const auto keys = config_keys();
  EXPECT_NE(std::find(keys.begin(), keys.end(), "tree.num_bins"), keys.end());
}

}  // namespace
}  // namespace gbrl
