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

#ifndef GBRL_ALGOS_HPP_
#define GBRL_ALGOS_HPP_

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gbrl/ensemble.hpp"
#include "gbrl/envs.hpp"
#include "gbrl/features.hpp"
#include "gbrl/layout.hpp"
#include "gbrl/matrix.hpp"
#include "gbrl/policy.hpp"
#include "gbrl/tree.hpp"

namespace gbrl {

class AlgoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Algorithm : std::uint8_t { kA2C, kPPO, kAWR };

std::string_view algorithm_name(Algorithm algo);
std::optional<Algorithm> parse_algorithm(std::string_view name);

struct AlgoConfig {
  Algorithm algo = Algorithm::kPPO;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_range = 0.2;
  double ent_coef = 0.0;
  double beta = 0.05;  // AWR temperature
  int n_steps = 128;
  int n_envs = 8;
  // Samples per tree, drawn with replacement. <= 0 means the whole rollout.
  int batch_size = 64;
  int n_epochs = 1;
  // Boosting iterations K; negative means bounded only by the step budget.
  std::int64_t total_iterations = -1;
  double lr_actor = 0.029;
  double lr_critic = 0.015;
  double lr_logstd = 0.0017;
  // lr_logstd decays as lr0 * (1 - t / T) over the step budget.
  bool lr_logstd_linear = false;
  double log_std_init = -2.0;
  // Norm limits for the stacked per-batch policy / value gradients; 0 off.
  double grad_clip_policy = 0.0;
  double grad_clip_value = 0.0;
  // Apply the limits to each sample's gradient instead of the whole batch.
  bool grad_clip_per_sample = false;
  bool normalize_advantage = true;
  double awr_weight_max = 20.0;
  int awr_train_freq = 2000;
  int awr_gradient_steps = 150;
  int awr_buffer_size = 50000;

  // Throws AlgoError naming the first violated constraint.
  void validate() const;
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// delta_t = r_t + gamma (1 - done_t) V_{t+1} - V_t
// A_t     = delta_t + gamma lambda (1 - done_t) A_{t+1}
// G_t     = A_t + V_t
// with V_T = last_value. done_t marks the last step of an episode.
GaeResult compute_gae(std::span<const double> rewards,
                      std::span<const double> values,
                      std::span<const std::uint8_t> dones, double last_value,
                      double gamma, double lambda);

// Rescales in place to mean 0, standard deviation 1 (population). A batch
// with zero spread is only centred.
void normalize_advantages(std::span<double> advantages);

// Per-sample inputs to the gradient routines. Rows of `theta` hold the
// current ensemble output for each sample.
struct GradientBatch {
  std::vector<Action> actions;
  std::vector<double> advantages;
  std::vector<double> returns;
  std::vector<double> log_prob_old;
};

// Each routine returns one ascent direction per sample (rows) over all
// output dims. The value column is always G - V, the ascent direction of
// -0.5 (G - V)^2.

// A * grad log pi + ent_coef * grad H.
Matrix a2c_gradient(const Matrix& theta, const OutputLayout& layout,
                    const GradientBatch& batch, double ent_coef);

// Gradient of min(rho A, clip(rho, 1 - eps, 1 + eps) A) + ent_coef H.
Matrix ppo_gradient(const Matrix& theta, const OutputLayout& layout,
                    const GradientBatch& batch, double clip_range,
                    double ent_coef);

// w * grad log pi with w = min(exp(A / beta), weight_max) and
// A = G - V(s) under the critic in `theta`; batch.advantages is ignored.
Matrix awr_gradient(const Matrix& theta, const OutputLayout& layout,
                    const GradientBatch& batch, double beta,
                    double weight_max, double ent_coef = 0.0);

struct ClipReport {
  double policy_norm = 0.0;
  double value_norm = 0.0;
};

// Scales the policy block (all rows, all policy dims) down to L2 norm
// policy_max when it is larger, and likewise the value column. A limit of
// 0 disables that half. Returns the norms before clipping.
ClipReport clip_gradients(Matrix& grads, const OutputLayout& layout,
                          double policy_max, double value_max);

// Per-row variant: each sample's policy gradient is scaled down to norm
// policy_max and its value gradient clamped to [-value_max, value_max].
// Returns the largest per-sample norms before clipping.
ClipReport clip_gradients_per_sample(Matrix& grads, const OutputLayout& layout,
                                     double policy_max, double value_max);

struct Transition {
  FeatureVector state;
  Action action;
  double reward = 0.0;
  // Last step of an episode (termination or truncation).
  bool done = false;
  double log_prob_old = 0.0;
  double value_old = 0.0;
};

// Per-environment trajectory storage. Each environment keeps its own
// ordered ring of at most `capacity_per_env` transitions (oldest evicted),
// plus a cache of the current ensemble output for every stored state.
// Flat indices run environment-major.
class RolloutBuffer {
 public:
  RolloutBuffer(int n_envs, std::size_t capacity_per_env);

  void add(int env, Transition t, std::vector<double> theta);
  void clear();

  std::size_t size() const { return size_; }
  std::size_t capacity() const {
    return capacity_per_env_ * envs_.size();
  }
  int num_envs() const { return static_cast<int>(envs_.size()); }
  std::size_t env_size(int env) const {
    return envs_[static_cast<std::size_t>(env)].size();
  }

  const Transition& at(std::size_t flat) const;
  std::vector<double>& theta(std::size_t flat);
  const std::vector<double>& theta(std::size_t flat) const;

  // Fills advantages and returns by GAE per environment, bootstrapping each
  // environment's tail with last_values[env]. `value_index` selects the
  // value column of the cached outputs; when negative the stored
  // value_old is used instead.
  void compute_advantages(std::span<const double> last_values, double gamma,
                          double lambda, int value_index = -1);
  bool has_advantages() const { return !advantages_.empty(); }
  const std::vector<double>& advantages() const { return advantages_; }
  const std::vector<double>& returns() const { return returns_; }

  template <typename F>
  void for_each_theta(F&& f) {
    for (auto& env : envs_) {
      for (auto& slot : env) f(slot.transition.state, slot.theta);
    }
  }

 private:
  struct Slot {
    Transition transition;
    std::vector<double> theta;
  };
  std::pair<std::size_t, std::size_t> locate(std::size_t flat) const;

  std::size_t capacity_per_env_;
  std::vector<std::deque<Slot>> envs_;
  std::size_t size_ = 0;
  std::vector<double> advantages_;
  std::vector<double> returns_;
};

struct EpisodeRecord {
  std::int64_t step = 0;
  int env_id = 0;
  double episode_reward = 0.0;
  int episode_length = 0;
};

inline constexpr std::string_view kMetricsCsvHeader =
    "step,env_id,episode_reward,episode_length";
std::string format_metrics_row(const EpisodeRecord& r);

// Mean reward of the last n episodes (all of them when fewer).
double mean_last_episodes(std::span<const EpisodeRecord> episodes,
                          std::size_t n = 100);

struct TrainOptions {
  std::uint64_t seed = 0;
  std::int64_t total_timesteps = 100000;
  bool shared_ac = true;
  TreeFitConfig tree;  // output_dim is filled in from the layout
  std::function<void(const EpisodeRecord&)> on_episode;
  std::int64_t checkpoint_interval = 0;  // env steps; 0 disables
  std::function<void(const ActorCriticEnsemble&, std::int64_t step)>
      on_checkpoint;
};

struct TrainResult {
  ActorCriticEnsemble model;
  std::vector<EpisodeRecord> episodes;
  std::int64_t timesteps = 0;
  std::int64_t iterations = 0;
};

// Boosting loop: collect experience with the current ensemble, then per
// update draw a batch with replacement, compute the algorithm's per-sample
// gradients at the current ensemble output, fit one tree to them (two in
// separate mode) and append it. Runs until the step budget or
// total_iterations is exhausted. Throws AlgoError on a non-finite gradient.
TrainResult train(const EnvSpec& env, const AlgoConfig& cfg,
                  const TrainOptions& options);

struct EvalReport {
  int episodes = 0;
  double mean_reward = 0.0;
  double std_reward = 0.0;
  double mean_length = 0.0;
  double std_length = 0.0;
  std::vector<double> rewards;
};

// Episode i runs in an instance seeded seed + i; sampling uses an
// independent stream per episode, so results do not depend on episode
// execution order.
EvalReport evaluate(const ActorCriticEnsemble& model, const EnvSpec& env,
                    int episodes, std::uint64_t seed, bool deterministic);
// Uniformly random actions over the action space.
EvalReport evaluate_random(const EnvSpec& env, int episodes,
                           std::uint64_t seed);

}  // namespace gbrl

#endif  // GBRL_ALGOS_HPP_
