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

#ifndef GBRL_ENVS_HPP_
#define GBRL_ENVS_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gbrl/features.hpp"
#include "gbrl/layout.hpp"
#include "gbrl/policy.hpp"

namespace gbrl {

class EnvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ActionSpace {
  enum class Kind : std::uint8_t { kDiscrete, kBox };

  Kind kind = Kind::kDiscrete;
  int n = 1;  // number of actions, or box dimension
  double low = 0.0;
  double high = 0.0;

  OutputLayout layout() const {
    return kind == Kind::kDiscrete ? OutputLayout::discrete(n)
                                   : OutputLayout::gaussian(n);
  }
};

struct StepResult {
  FeatureVector observation;
  double reward = 0.0;
  bool terminated = false;
  // Hit the time limit without terminating.
  bool truncated = false;

  bool done() const { return terminated || truncated; }
};

class Environment {
 public:
  virtual ~Environment() = default;

  virtual const ActionSpace& action_space() const = 0;
  virtual const std::shared_ptr<FeatureSchema>& schema() const = 0;
  virtual FeatureVector reset() = 0;
  // Throws EnvError before the first reset and after the episode ended.
  virtual StepResult step(const Action& action) = 0;
};

// Shared bookkeeping for the built-in environments.
class EnvironmentBase : public Environment {
 public:
  const ActionSpace& action_space() const override { return space_; }
  const std::shared_ptr<FeatureSchema>& schema() const override {
    return schema_;
  }
  int elapsed_steps() const { return steps_; }
  bool done() const { return done_; }

 protected:
  EnvironmentBase(ActionSpace space, std::shared_ptr<FeatureSchema> schema,
                  std::uint64_t seed, int max_steps);

  void begin_episode();
  // Advances the step counter; throws when stepping is not allowed.
  void begin_step();
  // Finishes a step, applying the time limit.
  StepResult finish_step(FeatureVector obs, double reward, bool terminated);

  Rng rng_;

 private:
  ActionSpace space_;
  std::shared_ptr<FeatureSchema> schema_;
  int max_steps_;
  int steps_ = 0;
  bool started_ = false;
  bool done_ = false;
};

// Pole balanced on a cart, Euler-integrated. Observation (x, x_dot, theta,
// theta_dot); +1 reward per step; terminates when |x| > 2.4 or
// |theta| > 12 degrees; truncates at 500 steps.
class CartPole final : public EnvironmentBase {
 public:
  struct State {
    double x = 0.0;
    double x_dot = 0.0;
    double theta = 0.0;
    double theta_dot = 0.0;
  };

  static constexpr double kGravity = 9.8;
  static constexpr double kCartMass = 1.0;
  static constexpr double kPoleMass = 0.1;
  static constexpr double kHalfLength = 0.5;
  static constexpr double kForce = 10.0;
  static constexpr double kDt = 0.02;
  static constexpr double kXLimit = 2.4;
  static constexpr double kThetaLimit = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
  static constexpr int kMaxSteps = 500;

  explicit CartPole(std::uint64_t seed,
                    std::shared_ptr<FeatureSchema> schema = nullptr);

  static std::shared_ptr<FeatureSchema> make_schema();
  static State integrate(const State& s, int action);
  static bool out_of_bounds(const State& s);

  FeatureVector reset() override;
  StepResult step(const Action& action) override;

  const State& state() const { return state_; }
  void set_state(const State& s) { state_ = s; }

 private:
  FeatureVector observe() const;
  State state_;
};

// Torque-driven pendulum. theta = 0 is upright. Observation (cos, sin,
// theta_dot); reward -(angle^2 + 0.1 theta_dot^2 + 0.001 torque^2);
// truncates at 200 steps; torques are clipped to [-2, 2].
class Pendulum final : public EnvironmentBase {
 public:
  struct State {
    double theta = 0.0;
    double theta_dot = 0.0;
  };

  static constexpr double kGravity = 10.0;
  static constexpr double kMass = 1.0;
  static constexpr double kLength = 1.0;
  static constexpr double kDt = 0.05;
  static constexpr double kMaxSpeed = 8.0;
  static constexpr double kMaxTorque = 2.0;
  static constexpr int kMaxSteps = 200;

  explicit Pendulum(std::uint64_t seed,
                    std::shared_ptr<FeatureSchema> schema = nullptr);

  static std::shared_ptr<FeatureSchema> make_schema();
  static double angle_normalize(double theta);
  static double reward(const State& s, double torque);
  static State integrate(const State& s, double torque);

  FeatureVector reset() override;
  StepResult step(const Action& action) override;

  const State& state() const { return state_; }
  void set_state(const State& s) { state_ = s; }

 private:
  FeatureVector observe() const;
  State state_;
};

// N x N grid surrounded by walls with a single goal, observed through a 7x7
// egocentric view encoded as categorical tokens. Actions: turn left, turn
// right, forward, pickup (no effect). Reaching the goal ends the episode
// with reward 1 - 0.9 * steps / max_steps; truncates at 4 N^2 steps.
class CatGrid final : public EnvironmentBase {
 public:
  enum ActionId : int { kTurnLeft = 0, kTurnRight = 1, kForward = 2, kPickup = 3 };

  struct Cell {
    int x = 0;
    int y = 0;
    bool operator==(const Cell&) const = default;
  };

  static constexpr int kDefaultSize = 8;
  static constexpr std::string_view kMission = "get to the green goal square";

  explicit CatGrid(std::uint64_t seed,
                   std::shared_ptr<FeatureSchema> schema = nullptr,
                   int size = kDefaultSize);

  FeatureVector reset() override;
  StepResult step(const Action& action) override;

  int size() const { return size_; }
  int max_steps() const { return 4 * size_ * size_; }
  Cell agent() const { return agent_; }
  Direction direction() const { return dir_; }
  Cell goal() const { return goal_; }
  bool is_wall(Cell c) const;

  // Test hooks: rearrange the grid after reset().
  void place_agent(Cell c, Direction d);
  void place_wall(Cell c);

  GridView view() const;

 private:
  const Tile& tile_at(Cell c) const;
  FeatureVector observe();

  int size_;
  std::vector<Tile> tiles_;
  Cell agent_;
  Direction dir_ = Direction::kRight;
  Cell goal_;
};

// Everything needed to build instances of one named environment. All
// instances share one schema, so categorical token ids agree across them.
struct EnvSpec {
  std::string name;
  std::shared_ptr<FeatureSchema> schema;
  ActionSpace action_space;
  std::function<std::unique_ptr<Environment>(std::uint64_t seed)> create;
};

// "cartpole", "catgrid" or "pendulum". When `schema` is given (e.g. from a
// loaded model) instances intern into it; its layout must match.
EnvSpec make_env_spec(std::string_view name,
                      std::shared_ptr<FeatureSchema> schema = nullptr);

// n independently seeded instances (seed + i) stepped in lockstep. An
// instance whose episode ends is reset immediately; the step result then
// carries the first observation of the new episode and the final one in
// terminal_observation.
class VecEnv {
 public:
  struct Step {
    FeatureVector observation;
    double reward = 0.0;
    bool terminated = false;
    bool truncated = false;
    std::optional<FeatureVector> terminal_observation;

    bool done() const { return terminated || truncated; }
  };

  VecEnv(const EnvSpec& spec, int n, std::uint64_t seed);

  std::size_t size() const { return envs_.size(); }
  const std::vector<FeatureVector>& reset();
  const std::vector<FeatureVector>& observations() const { return obs_; }
  std::vector<Step> step(std::span<const Action> actions);

 private:
  std::vector<std::unique_ptr<Environment>> envs_;
  std::vector<FeatureVector> obs_;
};

}  // namespace gbrl

#endif  // GBRL_ENVS_HPP_
