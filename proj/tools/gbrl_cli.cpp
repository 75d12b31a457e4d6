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

// gbrl: train, evaluate and inspect tree-ensemble agents.
//
// Exit codes:
//   0  success
//   1  internal error
//   2  bad command line
//   3  invalid configuration or argument value
//   4  cannot read an input file
//   5  cannot write to the output directory
//   6  training failed
//   7  model does not fit the environment
//   8  model file is corrupt or has an unsupported version

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <fmt/ranges.h>

#include "gbrl/algos.hpp"
#include "gbrl/config.hpp"
#include "gbrl/ensemble.hpp"
#include "gbrl/envs.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kInvalidConfig = 3,
  kReadError = 4,
  kWriteError = 5,
  kTrainFailed = 6,
  kMismatch = 7,
  kCorruptModel = 8,
};

struct CliFailure {
  int code;
  std::string message;
};

[[noreturn]] void fail(int code, std::string message) {
  throw CliFailure{code, std::move(message)};
}

gbrl::ActorCriticEnsemble load_model(const fs::path& path) {
  try {
    return gbrl::ActorCriticEnsemble::load(path);
  } catch (const gbrl::SerializationError& e) {
    fail(kCorruptModel, fmt::format("{}: {}", path.string(), e.what()));
  } catch (const std::ios_base::failure&) {
    fail(kReadError, "cannot read model file " + path.string());
  }
}

// Opens path for writing or fails with the unwritable-output code.
std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(kWriteError, "cannot write " + path.string());
  return out;
}

void write_model(const gbrl::ActorCriticEnsemble& model, const fs::path& path) {
  try {
    model.save(path);
  } catch (const std::exception& e) {
    fail(kWriteError, fmt::format("cannot write model {}: {}", path.string(), e.what()));
  }
}

int cmd_train(const std::string& config_path,
              const std::vector<std::string>& overrides) {
  gbrl::RunConfig cfg;
  try {
    cfg = gbrl::load_run_config(config_path);
    for (const auto& arg : overrides) {
      if (arg.rfind("--", 0) != 0 || arg.find('=') == std::string::npos) {
        fail(kUsage, "expected --key=value override, got '" + arg + "'");
      }
      const auto eq = arg.find('=');
      gbrl::apply_override(cfg, std::string_view(arg).substr(2, eq - 2),
                           std::string_view(arg).substr(eq + 1));
    }
    cfg.validate();
  } catch (const std::ios_base::failure&) {
    fail(kReadError, "cannot read config file " + config_path);
  } catch (const gbrl::ConfigError& e) {
    fail(kInvalidConfig, e.what());
  }

  const fs::path out_dir = cfg.output_dir;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(kWriteError, fmt::format("cannot create {}: {}", out_dir.string(), ec.message()));
  {
    auto resolved = open_output(out_dir / "config.ini");
    resolved << gbrl::serialize_run_config(cfg);
    if (!resolved) fail(kWriteError, "cannot write " + (out_dir / "config.ini").string());
  }
  auto metrics = open_output(out_dir / "metrics.csv");
  metrics << gbrl::kMetricsCsvHeader << '\n' << std::flush;

  gbrl::TrainOptions opt;
  opt.seed = cfg.seed;
  opt.total_timesteps = cfg.total_timesteps;
  opt.shared_ac = cfg.shared_ac;
  opt.tree = cfg.tree;
  opt.checkpoint_interval = cfg.checkpoint_interval;
  opt.on_episode = [&](const gbrl::EpisodeRecord& r) {
    metrics << gbrl::format_metrics_row(r) << '\n' << std::flush;
    if (!metrics) fail(kWriteError, "cannot write metrics.csv");
  };
  opt.on_checkpoint = [&](const gbrl::ActorCriticEnsemble& model, std::int64_t step) {
    write_model(model, out_dir / fmt::format("checkpoint_{}.bin", step));
  };

  const auto spec = gbrl::make_env_spec(cfg.env);
  gbrl::TrainResult result = [&] {
    try {
      return gbrl::train(spec, cfg.algo, opt);
    } catch (const CliFailure&) {
      throw;
    } catch (const std::exception& e) {
      fail(kTrainFailed, std::string("training failed: ") + e.what());
    }
  }();

  const fs::path model_path = out_dir / "model.bin";
  write_model(result.model, model_path);
  fmt::print("timesteps: {}\n", result.timesteps);
  fmt::print("iterations: {}\n", result.iterations);
  fmt::print("trees: {}\n", result.model.num_trees());
  fmt::print("episodes: {}\n", result.episodes.size());
  fmt::print("model: {}\n", model_path.string());
  fmt::print("final_mean_reward_last100: {}\n",
             gbrl::mean_last_episodes(result.episodes, 100));
  return kOk;
}

int cmd_eval(const std::string& model_path, const std::string& env, int episodes,
             std::uint64_t seed, bool deterministic) {
  if (episodes < 1) fail(kInvalidConfig, "--episodes must be >= 1");
  const auto model = load_model(model_path);
  gbrl::EnvSpec spec;
  try {
    spec = gbrl::make_env_spec(env);
  } catch (const gbrl::EnvError& e) {
    fail(kInvalidConfig, e.what());
  }
  if (!(spec.action_space.layout() == model.layout()) ||
      !model.schema().same_layout(*spec.schema)) {
    fail(kMismatch, fmt::format("model ({}, {} features) does not fit env '{}' ({}, {} features)",
                                model.layout().describe(), model.schema().size(), env,
                                spec.action_space.layout().describe(),
                                spec.schema->size()));
  }
  // Reuse the model's vocabularies so categorical tokens keep their ids.
  spec = gbrl::make_env_spec(env, model.shared_schema());
  const auto report = gbrl::evaluate(model, spec, episodes, seed, deterministic);
  fmt::print("episodes: {}\n", report.episodes);
  fmt::print("mean_reward: {}\n", report.mean_reward);
  fmt::print("std_reward: {}\n", report.std_reward);
  fmt::print("mean_length: {}\n", report.mean_length);
  fmt::print("std_length: {}\n", report.std_length);
  return kOk;
}

int cmd_inspect(const std::string& model_path) {
  const auto model = load_model(model_path);
  fmt::print("trees: {}\n", model.num_trees());
  fmt::print("iterations: {}\n", model.num_iterations());
  fmt::print("mode: {}\n", model.mode() == gbrl::EnsembleMode::kShared ? "shared" : "separate");
  fmt::print("layout: {}\n", model.layout().describe());
  fmt::print("output_dim: {}\n", model.output_dim());
  fmt::print("lr_per_dim: {}\n", fmt::join(model.lr_per_dim(), " "));
  fmt::print("total_nodes: {}\n", model.num_nodes());
  const auto importance = model.feature_importance();
  std::vector<std::size_t> order(importance.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return importance[a] > importance[b];
  });
  order.resize(std::min<std::size_t>(order.size(), 10));
  for (std::size_t f : order) {
    fmt::print("importance.{}: {}\n", model.schema().entry(f).name, importance[f]);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient-boosted tree actor-critic training"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "Train an agent from a config file");
  std::string config_path;
  train->add_option("config", config_path, "INI config file")->required();
  train->allow_extras();
  train->footer("Any config key can be overridden with --key=value or --section.key=value.");

  auto* eval = app.add_subcommand("eval", "Evaluate a saved model");
  std::string model_path;
  std::string env = "cartpole";
  int episodes = 100;
  std::uint64_t seed = 0;
  bool deterministic = false;
  eval->add_option("model", model_path, "Model file")->required();
  eval->add_option("--env", env, "Environment: cartpole, catgrid or pendulum");
  eval->add_option("--episodes", episodes, "Number of episodes");
  eval->add_option("--seed", seed, "Seed of the first episode");
  eval->add_flag("--deterministic", deterministic, "Take the greedy action");

  auto* inspect = app.add_subcommand("inspect", "Summarise a saved model");
  inspect->add_option("model", model_path, "Model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*train) return cmd_train(config_path, train->remaining());
    if (*eval) return cmd_eval(model_path, env, episodes, seed, deterministic);
    if (*inspect) return cmd_inspect(model_path);
  } catch (const CliFailure& f) {
    fmt::print(stderr, "error: {}\n", f.message);
    return f.code;
  } catch (const std::exception& e) {
    fmt::print(stderr, "internal error: {}\n", e.what());
    return kInternal;
  }
  return kUsage;
}
