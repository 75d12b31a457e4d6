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

#include "gbrl/algos.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace gbrl {

std::string_view algorithm_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::kA2C: return "a2c";
    case Algorithm::kPPO: return "ppo";
    case Algorithm::kAWR: return "awr";
  }
  return "ppo";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  if (name == "a2c") return Algorithm::kA2C;
  if (name == "ppo") return Algorithm::kPPO;
  if (name == "awr") return Algorithm::kAWR;
  return std::nullopt;
}

void AlgoConfig::validate() const {
  auto fail = [](const std::string& what) { throw AlgoError(what); };
  if (!(gamma >= 0.0 && gamma < 1.0)) fail("gamma must lie in [0, 1)");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) {
    fail("gae_lambda must lie in [0, 1]");
  }
  if (!(clip_range > 0.0)) fail("clip_range must be > 0");
  if (!(beta > 0.0)) fail("beta must be > 0");
  if (!(ent_coef >= 0.0)) fail("ent_coef must be >= 0");
  if (!(lr_actor > 0.0) || !(lr_critic > 0.0) || !(lr_logstd > 0.0)) {
    fail("learning rates must be > 0");
  }
  if (n_steps < 1) fail("n_steps must be >= 1");
  if (n_envs < 1) fail("n_envs must be >= 1");
  if (n_epochs < 1) fail("n_epochs must be >= 1");
  if (!(grad_clip_policy >= 0.0) || !(grad_clip_value >= 0.0)) {
    fail("gradient clip limits must be >= 0");
  }
  if (!(awr_weight_max > 0.0)) fail("awr_weight_max must be > 0");
  if (awr_train_freq < 1) fail("awr_train_freq must be >= 1");
  if (awr_gradient_steps < 1) fail("awr_gradient_steps must be >= 1");
  if (awr_buffer_size < n_envs) fail("awr_buffer_size must be >= n_envs");
  if (!std::isfinite(log_std_init)) fail("log_std_init must be finite");
}

GaeResult compute_gae(std::span<const double> rewards,
                      std::span<const double> values,
                      std::span<const std::uint8_t> dones, double last_value,
                      double gamma, double lambda) {
  if (rewards.size() != values.size() || rewards.size() != dones.size()) {
    throw AlgoError("compute_gae: rewards, values and dones differ in length");
  }
  const std::size_t n = rewards.size();
  GaeResult out;
  out.advantages.resize(n);
  out.returns.resize(n);
  double next_value = last_value;
  double next_adv = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double live = dones[k] ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * live * next_value - values[k];
    next_adv = delta + gamma * lambda * live * next_adv;
    out.advantages[k] = next_adv;
    out.returns[k] = next_adv + values[k];
    next_value = values[k];
  }
  return out;
}

void normalize_advantages(std::span<double> advantages) {
  if (advantages.empty()) return;
  const double n = static_cast<double>(advantages.size());
  const double mean =
      std::accumulate(advantages.begin(), advantages.end(), 0.0) / n;
  double var = 0.0;
  for (double a : advantages) var += (a - mean) * (a - mean);
  const double std = std::sqrt(var / n);
  for (double& a : advantages) {
    a -= mean;
    if (std > 0.0) a /= std;
  }
}

namespace {

void check_batch(const Matrix& theta, const OutputLayout& layout,
                 const GradientBatch& batch, bool needs_advantages) {
  const auto n = static_cast<std::size_t>(theta.rows());
  if (theta.cols() != layout.output_dim()) {
    throw AlgoError("theta has wrong number of columns for layout");
  }
  if (batch.actions.size() != n || batch.returns.size() != n ||
      (needs_advantages && batch.advantages.size() != n)) {
    throw AlgoError("gradient batch arrays do not match theta rows");
  }
}

PolicyParams row_params(const Matrix& theta, const OutputLayout& layout,
                        Eigen::Index i) {
  return {layout, std::vector<double>(theta.row(i).begin(), theta.row(i).end())};
}

// Writes scale * grad log pi + ent_coef * grad H into the policy columns and
// G - V into the value column.
void write_row(Matrix& out, Eigen::Index i, const PolicyParams& params,
               const Action& action, double scale, double ent_coef,
               double ret) {
  const int p = params.layout.policy_dim();
  if (scale != 0.0) {
    const auto g = grad_log_prob(params, action);
    for (int d = 0; d < p; ++d) out(i, d) = scale * g[static_cast<std::size_t>(d)];
  } else {
    for (int d = 0; d < p; ++d) out(i, d) = 0.0;
  }
  if (ent_coef != 0.0) {
    const auto h = grad_entropy(params);
    for (int d = 0; d < p; ++d) {
      out(i, d) += ent_coef * h[static_cast<std::size_t>(d)];
    }
  }
  out(i, params.layout.value_index()) = ret - params.value();
}

}  // namespace

Matrix a2c_gradient(const Matrix& theta, const OutputLayout& layout,
                    const GradientBatch& batch, double ent_coef) {
  check_batch(theta, layout, batch, true);
  Matrix out(theta.rows(), theta.cols());
  for (Eigen::Index i = 0; i < theta.rows(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    write_row(out, i, row_params(theta, layout, i), batch.actions[k],
              batch.advantages[k], ent_coef, batch.returns[k]);
  }
  return out;
}

Matrix ppo_gradient(const Matrix& theta, const OutputLayout& layout,
                    const GradientBatch& batch, double clip_range,
                    double ent_coef) {
  check_batch(theta, layout, batch, true);
  if (batch.log_prob_old.size() != static_cast<std::size_t>(theta.rows())) {
    throw AlgoError("ppo_gradient needs log_prob_old for every sample");
  }
  Matrix out(theta.rows(), theta.cols());
  for (Eigen::Index i = 0; i < theta.rows(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const PolicyParams params = row_params(theta, layout, i);
    const double adv = batch.advantages[k];
    const double ratio =
        std::exp(log_prob(params, batch.actions[k]) - batch.log_prob_old[k]);
    // The min() picks the clipped (constant) term once the ratio has moved
    // past the trust region in the direction the advantage favours.
    const bool clipped = (adv > 0.0 && ratio > 1.0 + clip_range) ||
                         (adv < 0.0 && ratio < 1.0 - clip_range);
    write_row(out, i, params, batch.actions[k], clipped ? 0.0 : ratio * adv,
              ent_coef, batch.returns[k]);
  }
  return out;
}

Matrix awr_gradient(const Matrix& theta, const OutputLayout& layout,
                    const GradientBatch& batch, double beta,
                    double weight_max, double ent_coef) {
  if (!(beta > 0.0)) throw AlgoError("awr_gradient: beta must be > 0");
  check_batch(theta, layout, batch, false);
  Matrix out(theta.rows(), theta.cols());
  for (Eigen::Index i = 0; i < theta.rows(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const PolicyParams params = row_params(theta, layout, i);
    const double adv = batch.returns[k] - params.value();
    const double w = std::min(std::exp(adv / beta), weight_max);
    write_row(out, i, params, batch.actions[k], w, ent_coef, batch.returns[k]);
  }
  return out;
}

ClipReport clip_gradients(Matrix& grads, const OutputLayout& layout,
                          double policy_max, double value_max) {
  const int p = layout.policy_dim();
  auto policy = grads.leftCols(p);
  auto value = grads.col(layout.value_index());
  ClipReport report{policy.norm(), value.norm()};
  if (policy_max > 0.0 && report.policy_norm > policy_max) {
    policy *= policy_max / report.policy_norm;
  }
  if (value_max > 0.0 && report.value_norm > value_max) {
    value *= value_max / report.value_norm;
  }
  return report;
}

ClipReport clip_gradients_per_sample(Matrix& grads, const OutputLayout& layout,
                                     double policy_max, double value_max) {
  const int p = layout.policy_dim();
  const int v = layout.value_index();
  ClipReport report;
  for (Eigen::Index i = 0; i < grads.rows(); ++i) {
    auto policy = grads.row(i).head(p);
    const double norm = policy.norm();
    report.policy_norm = std::max(report.policy_norm, norm);
    if (policy_max > 0.0 && norm > policy_max) policy *= policy_max / norm;
    double& value = grads(i, v);
    report.value_norm = std::max(report.value_norm, std::abs(value));
    if (value_max > 0.0) value = std::clamp(value, -value_max, value_max);
  }
  return report;
}

// ---------------------------------------------------------------------------

RolloutBuffer::RolloutBuffer(int n_envs, std::size_t capacity_per_env)
    : capacity_per_env_(capacity_per_env),
      envs_(static_cast<std::size_t>(n_envs)) {
  if (n_envs < 1) throw AlgoError("RolloutBuffer needs n_envs >= 1");
  if (capacity_per_env < 1) throw AlgoError("RolloutBuffer needs capacity >= 1");
}

void RolloutBuffer::add(int env, Transition t, std::vector<double> theta) {
  auto& ring = envs_.at(static_cast<std::size_t>(env));
  if (ring.size() == capacity_per_env_) {
    ring.pop_front();
    --size_;
  }
  ring.push_back({std::move(t), std::move(theta)});
  ++size_;
  advantages_.clear();
  returns_.clear();
}

void RolloutBuffer::clear() {
  for (auto& ring : envs_) ring.clear();
  size_ = 0;
  advantages_.clear();
  returns_.clear();
}

std::pair<std::size_t, std::size_t> RolloutBuffer::locate(
    std::size_t flat) const {
  for (std::size_t e = 0; e < envs_.size(); ++e) {
    if (flat < envs_[e].size()) return {e, flat};
    flat -= envs_[e].size();
  }
  throw AlgoError("buffer index out of range");
}

const Transition& RolloutBuffer::at(std::size_t flat) const {
  const auto [e, i] = locate(flat);
  return envs_[e][i].transition;
}

std::vector<double>& RolloutBuffer::theta(std::size_t flat) {
  const auto [e, i] = locate(flat);
  return envs_[e][i].theta;
}

const std::vector<double>& RolloutBuffer::theta(std::size_t flat) const {
  const auto [e, i] = locate(flat);
  return envs_[e][i].theta;
}

void RolloutBuffer::compute_advantages(std::span<const double> last_values,
                                       double gamma, double lambda,
                                       int value_index) {
  if (last_values.size() != envs_.size()) {
    throw AlgoError("compute_advantages needs one last value per env");
  }
  advantages_.clear();
  returns_.clear();
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<std::uint8_t> dones;
  for (std::size_t e = 0; e < envs_.size(); ++e) {
    rewards.clear();
    values.clear();
    dones.clear();
    for (const auto& slot : envs_[e]) {
      rewards.push_back(slot.transition.reward);
      values.push_back(value_index < 0
                           ? slot.transition.value_old
                           : slot.theta[static_cast<std::size_t>(value_index)]);
      dones.push_back(slot.transition.done ? 1 : 0);
    }
    auto gae = compute_gae(rewards, values, dones, last_values[e], gamma, lambda);
    advantages_.insert(advantages_.end(), gae.advantages.begin(),
                       gae.advantages.end());
    returns_.insert(returns_.end(), gae.returns.begin(), gae.returns.end());
  }
}

// ---------------------------------------------------------------------------

std::string format_metrics_row(const EpisodeRecord& r) {
  return fmt::format("{},{},{},{}", r.step, r.env_id, r.episode_reward,
                     r.episode_length);
}

double mean_last_episodes(std::span<const EpisodeRecord> episodes,
                          std::size_t n) {
  if (episodes.empty()) return 0.0;
  const std::size_t k = std::min(n, episodes.size());
  double s = 0.0;
  for (std::size_t i = episodes.size() - k; i < episodes.size(); ++i) {
    s += episodes[i].episode_reward;
  }
  return s / static_cast<double>(k);
}

namespace {

// Mutable state of one training run.
class Trainer {
 public:
  Trainer(const EnvSpec& env, const AlgoConfig& cfg, const TrainOptions& opt)
      : env_(env),
        cfg_(cfg),
        opt_(opt),
        layout_(env.action_space.layout()),
        model_(layout_, env.schema,
               LearningRates{cfg.lr_actor, cfg.lr_critic, cfg.lr_logstd},
               opt.shared_ac ? EnsembleMode::kShared : EnsembleMode::kSeparate,
               cfg.log_std_init),
        vec_(env, cfg.n_envs, opt.seed),
        rng_(opt.seed),
        ep_reward_(static_cast<std::size_t>(cfg.n_envs), 0.0),
        ep_length_(static_cast<std::size_t>(cfg.n_envs), 0) {
    tree_cfg_ = opt.tree;
    tree_cfg_.validate();
  }

  TrainResult run() {
    if (cfg_.total_iterations != 0 && opt_.total_timesteps > 0) {
      vec_.reset();
      if (cfg_.algo == Algorithm::kAWR) {
        run_awr();
      } else {
        run_on_policy();
      }
    }
    return {std::move(model_), std::move(episodes_), steps_, iterations_};
  }

 private:
  bool budget_left() const {
    return steps_ < opt_.total_timesteps &&
           (cfg_.total_iterations < 0 || iterations_ < cfg_.total_iterations);
  }
  bool iterations_left() const {
    return cfg_.total_iterations < 0 || iterations_ < cfg_.total_iterations;
  }

  // Steps every env once with the current policy and stores the
  // transitions; `theta` holds the outputs for the current observations.
  void collect_step(RolloutBuffer& buffer) {
    const auto& obs = vec_.observations();
    const Matrix theta = model_.predict_matrix(obs);
    const std::size_t n = obs.size();
    std::vector<Action> actions(n);
    std::vector<Action> env_actions(n);
    std::vector<double> log_probs(n);
    for (std::size_t i = 0; i < n; ++i) {
      PolicyParams params(layout_, std::vector<double>(
                                       theta.row(static_cast<Eigen::Index>(i)).begin(),
                                       theta.row(static_cast<Eigen::Index>(i)).end()));
      ActionSample s = sample(params, rng_);
      env_actions[i] = s.action;
      if (auto* v = std::get_if<std::vector<double>>(&env_actions[i])) {
        for (double& a : *v) {
          a = std::clamp(a, env_.action_space.low, env_.action_space.high);
        }
      }
      actions[i] = std::move(s.action);
      log_probs[i] = s.log_prob;
    }
    std::vector<FeatureVector> states(obs.begin(), obs.end());
    auto results = vec_.step(env_actions);
    steps_ += static_cast<std::int64_t>(n);

    for (std::size_t i = 0; i < n; ++i) {
      auto& r = results[i];
      const auto row = theta.row(static_cast<Eigen::Index>(i));
      double reward = r.reward;
      if (r.truncated) {
        // Time limit: bootstrap from the value of the state we were cut at.
        const PolicyParams terminal = model_.predict(*r.terminal_observation);
        reward += cfg_.gamma * terminal.value();
      }
      Transition t{std::move(states[i]), std::move(actions[i]), reward,
                   r.done(), log_probs[i], row(layout_.value_index())};
      buffer.add(static_cast<int>(i), std::move(t),
                 std::vector<double>(row.begin(), row.end()));

      ep_reward_[i] += r.reward;
      ep_length_[i] += 1;
      if (r.done()) {
        EpisodeRecord rec{steps_, static_cast<int>(i), ep_reward_[i],
                          ep_length_[i]};
        episodes_.push_back(rec);
        if (opt_.on_episode) opt_.on_episode(rec);
        ep_reward_[i] = 0.0;
        ep_length_[i] = 0;
      }
    }
  }

  std::vector<double> last_values() const {
    const Matrix theta = model_.predict_matrix(vec_.observations());
    std::vector<double> v(static_cast<std::size_t>(theta.rows()));
    for (Eigen::Index i = 0; i < theta.rows(); ++i) {
      v[static_cast<std::size_t>(i)] = theta(i, layout_.value_index());
    }
    return v;
  }

  void update_schedules() {
    if (!cfg_.lr_logstd_linear) return;
    LearningRates rates = model_.learning_rates();
    const double progress = std::min(
        1.0, static_cast<double>(steps_) /
                 static_cast<double>(std::max<std::int64_t>(1, opt_.total_timesteps)));
    rates.log_std = cfg_.lr_logstd * std::max(1.0 - progress, 1e-6);
    model_.set_learning_rates(rates);
  }

  // One boosting iteration on a batch drawn with replacement from `buffer`.
  void boost(RolloutBuffer& buffer) {
    const std::size_t n = buffer.size();
    const std::size_t batch =
        cfg_.batch_size > 0 ? static_cast<std::size_t>(cfg_.batch_size) : n;
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);

    std::vector<FeatureVector> states(batch);
    Matrix theta(static_cast<Eigen::Index>(batch), layout_.output_dim());
    GradientBatch gb;
    gb.actions.resize(batch);
    gb.advantages.resize(batch);
    gb.returns.resize(batch);
    gb.log_prob_old.resize(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t k = pick(rng_);
      const Transition& t = buffer.at(k);
      states[b] = t.state;
      const auto& th = buffer.theta(k);
      for (std::size_t d = 0; d < th.size(); ++d) {
        theta(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(d)) = th[d];
      }
      gb.actions[b] = t.action;
      gb.advantages[b] = buffer.advantages()[k];
      gb.returns[b] = buffer.returns()[k];
      gb.log_prob_old[b] = t.log_prob_old;
    }

    Matrix grads;
    switch (cfg_.algo) {
      case Algorithm::kA2C:
        if (cfg_.normalize_advantage) normalize_advantages(gb.advantages);
        grads = a2c_gradient(theta, layout_, gb, cfg_.ent_coef);
        break;
      case Algorithm::kPPO:
        if (cfg_.normalize_advantage) normalize_advantages(gb.advantages);
        grads = ppo_gradient(theta, layout_, gb, cfg_.clip_range, cfg_.ent_coef);
        break;
      case Algorithm::kAWR:
        grads = awr_gradient(theta, layout_, gb, cfg_.beta, cfg_.awr_weight_max,
                             cfg_.ent_coef);
        break;
    }
    if (!grads.allFinite()) {
      throw AlgoError(fmt::format(
          "non-finite gradient at iteration {} (step {}); |theta|max = {}",
          iterations_, steps_, theta.cwiseAbs().maxCoeff()));
    }
    if (cfg_.grad_clip_per_sample) {
      clip_gradients_per_sample(grads, layout_, cfg_.grad_clip_policy,
                                cfg_.grad_clip_value);
    } else {
      clip_gradients(grads, layout_, cfg_.grad_clip_policy,
                     cfg_.grad_clip_value);
    }

    if (model_.mode() == EnsembleMode::kShared) {
      TreeFitConfig tc = tree_cfg_;
      tc.output_dim = layout_.output_dim();
      model_.add_tree(fit_tree(model_.schema(), states, grads, tc));
    } else {
      const int p = layout_.policy_dim();
      TreeFitConfig actor_cfg = tree_cfg_;
      actor_cfg.output_dim = p;
      TreeFitConfig critic_cfg = tree_cfg_;
      critic_cfg.output_dim = 1;
      Matrix actor_grads = grads.leftCols(p);
      Matrix critic_grads = grads.rightCols(1);
      model_.add_trees(fit_tree(model_.schema(), states, actor_grads, actor_cfg),
                       fit_tree(model_.schema(), states, critic_grads, critic_cfg));
    }
    ++iterations_;

    buffer.for_each_theta([&](const FeatureVector& x, std::vector<double>& th) {
      model_.accumulate_last_iteration(x, th);
    });
  }

  void maybe_checkpoint(std::int64_t before) {
    if (opt_.checkpoint_interval <= 0 || !opt_.on_checkpoint) return;
    if (before / opt_.checkpoint_interval != steps_ / opt_.checkpoint_interval) {
      opt_.on_checkpoint(model_, steps_);
    }
  }

  void run_on_policy() {
    RolloutBuffer buffer(cfg_.n_envs, static_cast<std::size_t>(cfg_.n_steps));
    while (budget_left()) {
      const std::int64_t before = steps_;
      buffer.clear();
      for (int t = 0; t < cfg_.n_steps; ++t) collect_step(buffer);
      buffer.compute_advantages(last_values(), cfg_.gamma, cfg_.gae_lambda);

      const std::size_t n = buffer.size();
      const std::size_t batch =
          cfg_.batch_size > 0 ? static_cast<std::size_t>(cfg_.batch_size) : n;
      const std::size_t per_epoch = std::max<std::size_t>(1, n / batch);
      for (int epoch = 0; epoch < cfg_.n_epochs; ++epoch) {
        for (std::size_t u = 0; u < per_epoch && iterations_left(); ++u) {
          update_schedules();
          boost(buffer);
        }
      }
      maybe_checkpoint(before);
    }
  }

  // Off-policy variant: experience goes into a bounded replay buffer; after
  // every awr_train_freq steps, awr_gradient_steps trees are fit, each on a
  // fresh batch with returns recomputed against the current critic.
  void run_awr() {
    const std::size_t per_env = std::max<std::size_t>(
        1, static_cast<std::size_t>(cfg_.awr_buffer_size / cfg_.n_envs));
    RolloutBuffer buffer(cfg_.n_envs, per_env);
    const int collect_iters = std::max(1, cfg_.awr_train_freq / cfg_.n_envs);
    while (budget_left()) {
      const std::int64_t before = steps_;
      for (int t = 0; t < collect_iters; ++t) collect_step(buffer);
      for (int g = 0; g < cfg_.awr_gradient_steps && iterations_left(); ++g) {
        update_schedules();
        buffer.compute_advantages(last_values(), cfg_.gamma, cfg_.gae_lambda,
                                  layout_.value_index());
        boost(buffer);
      }
      maybe_checkpoint(before);
    }
  }

  const EnvSpec& env_;
  const AlgoConfig& cfg_;
  const TrainOptions& opt_;
  OutputLayout layout_;
  TreeFitConfig tree_cfg_;
  ActorCriticEnsemble model_;
  VecEnv vec_;
  Rng rng_;
  std::vector<double> ep_reward_;
  std::vector<int> ep_length_;
  std::vector<EpisodeRecord> episodes_;
  std::int64_t steps_ = 0;
  std::int64_t iterations_ = 0;
};

}  // namespace

TrainResult train(const EnvSpec& env, const AlgoConfig& cfg,
                  const TrainOptions& options) {
  cfg.validate();
  if (!env.schema || !env.create) throw AlgoError("incomplete environment spec");
  return Trainer(env, cfg, options).run();
}

// ---------------------------------------------------------------------------

namespace {

EvalReport summarize(std::vector<double> rewards,
                     const std::vector<double>& lengths) {
  EvalReport r;
  r.episodes = static_cast<int>(rewards.size());
  auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
    mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    sd = std::sqrt(var / static_cast<double>(v.size()));
  };
  stats(rewards, r.mean_reward, r.std_reward);
  stats(lengths, r.mean_length, r.std_length);
  r.rewards = std::move(rewards);
  return r;
}

template <typename ChooseAction>
EvalReport run_episodes(const EnvSpec& env, int episodes, std::uint64_t seed,
                        ChooseAction&& choose) {
  if (episodes < 1) throw AlgoError("evaluation needs at least one episode");
  std::vector<double> rewards;
  std::vector<double> lengths;
  for (int e = 0; e < episodes; ++e) {
    const std::uint64_t episode_seed = seed + static_cast<std::uint64_t>(e);
    auto instance = env.create(episode_seed);
    Rng rng(episode_seed ^ 0x9e3779b97f4a7c15ULL);
    FeatureVector obs = instance->reset();
    double total = 0.0;
    int length = 0;
    while (true) {
      Action a = choose(obs, rng);
      StepResult r = instance->step(a);
      total += r.reward;
      ++length;
      if (r.done()) break;
      obs = std::move(r.observation);
    }
    rewards.push_back(total);
    lengths.push_back(length);
  }
  return summarize(std::move(rewards), lengths);
}

}  // namespace

EvalReport evaluate(const ActorCriticEnsemble& model, const EnvSpec& env,
                    int episodes, std::uint64_t seed, bool deterministic) {
  if (!(model.layout() == env.action_space.layout())) {
    throw AlgoError("model layout " + model.layout().describe() +
                    " does not match environment '" + env.name + "' (" +
                    env.action_space.layout().describe() + ")");
  }
  if (!model.schema().same_layout(*env.schema)) {
    throw AlgoError("model feature schema does not match environment '" +
                    env.name + "'");
  }
  const ActionSpace space = env.action_space;
  return run_episodes(env, episodes, seed,
                      [&](const FeatureVector& x, Rng& rng) -> Action {
                        const PolicyParams p = model.predict(x);
                        Action a = deterministic ? greedy_action(p)
                                                 : sample(p, rng).action;
                        if (auto* v = std::get_if<std::vector<double>>(&a)) {
                          for (double& u : *v) u = std::clamp(u, space.low, space.high);
                        }
                        return a;
                      });
}

EvalReport evaluate_random(const EnvSpec& env, int episodes,
                           std::uint64_t seed) {
  const ActionSpace space = env.action_space;
  return run_episodes(env, episodes, seed,
                      [&](const FeatureVector&, Rng& rng) -> Action {
                        if (space.kind == ActionSpace::Kind::kDiscrete) {
                          return std::uniform_int_distribution<int>(0, space.n - 1)(rng);
                        }
                        std::uniform_real_distribution<double> u(space.low, space.high);
                        std::vector<double> a(static_cast<std::size_t>(space.n));
                        for (double& v : a) v = u(rng);
                        return a;
                      });
}

}  // namespace gbrl
