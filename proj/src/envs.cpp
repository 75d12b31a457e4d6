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

#include "gbrl/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

namespace gbrl {

EnvironmentBase::EnvironmentBase(ActionSpace space,
                                 std::shared_ptr<FeatureSchema> schema,
                                 std::uint64_t seed, int max_steps)
    : rng_(seed),
      space_(space),
      schema_(std::move(schema)),
      max_steps_(max_steps) {}

void EnvironmentBase::begin_episode() {
  started_ = true;
  done_ = false;
  steps_ = 0;
}

void EnvironmentBase::begin_step() {
  if (!started_) throw EnvError("step() called before reset()");
  if (done_) throw EnvError("step() called after the episode ended");
  ++steps_;
}

StepResult EnvironmentBase::finish_step(FeatureVector obs, double reward,
                                        bool terminated) {
  StepResult r{std::move(obs), reward, terminated, false};
  if (!terminated && steps_ >= max_steps_) r.truncated = true;
  done_ = r.done();
  return r;
}

// ---------------------------------------------------------------------------

namespace {

void require_layout(const std::shared_ptr<FeatureSchema>& given,
                    const std::shared_ptr<FeatureSchema>& expected,
                    std::string_view env) {
  if (!given->same_layout(*expected)) {
    throw EnvError("feature schema does not match environment '" +
                   std::string(env) + "'");
  }
}

int discrete_index(const Action& action, int n) {
  const int* a = std::get_if<int>(&action);
  if (a == nullptr || *a < 0 || *a >= n) {
    throw EnvError("invalid discrete action");
  }
  return *a;
}

}  // namespace

CartPole::CartPole(std::uint64_t seed, std::shared_ptr<FeatureSchema> schema)
    : EnvironmentBase({ActionSpace::Kind::kDiscrete, 2},
                      schema ? schema : make_schema(), seed, kMaxSteps) {
  if (schema) require_layout(schema, make_schema(), "cartpole");
}

std::shared_ptr<FeatureSchema> CartPole::make_schema() {
  auto s = std::make_shared<FeatureSchema>();
  s->add_numerical("cart_position");
  s->add_numerical("cart_velocity");
  s->add_numerical("pole_angle");
  s->add_numerical("pole_angular_velocity");
  return s;
}

CartPole::State CartPole::integrate(const State& s, int action) {
  constexpr double total_mass = kCartMass + kPoleMass;
  constexpr double pole_mass_length = kPoleMass * kHalfLength;
  const double force = action == 1 ? kForce : -kForce;
  const double cos_t = std::cos(s.theta);
  const double sin_t = std::sin(s.theta);
  const double temp =
      (force + pole_mass_length * s.theta_dot * s.theta_dot * sin_t) /
      total_mass;
  const double theta_acc =
      (kGravity * sin_t - cos_t * temp) /
      (kHalfLength * (4.0 / 3.0 - kPoleMass * cos_t * cos_t / total_mass));
  const double x_acc = temp - pole_mass_length * theta_acc * cos_t / total_mass;
  State n;
  n.x = s.x + kDt * s.x_dot;
  n.x_dot = s.x_dot + kDt * x_acc;
  n.theta = s.theta + kDt * s.theta_dot;
  n.theta_dot = s.theta_dot + kDt * theta_acc;
  return n;
}

bool CartPole::out_of_bounds(const State& s) {
  return s.x < -kXLimit || s.x > kXLimit || s.theta < -kThetaLimit ||
         s.theta > kThetaLimit;
}

FeatureVector CartPole::observe() const {
  return {{state_.x, state_.x_dot, state_.theta, state_.theta_dot}};
}

FeatureVector CartPole::reset() {
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  state_.x = u(rng_);
  state_.x_dot = u(rng_);
  state_.theta = u(rng_);
  state_.theta_dot = u(rng_);
  begin_episode();
  return observe();
}

StepResult CartPole::step(const Action& action) {
  const int a = discrete_index(action, 2);
  begin_step();
  state_ = integrate(state_, a);
  return finish_step(observe(), 1.0, out_of_bounds(state_));
}

// ---------------------------------------------------------------------------

Pendulum::Pendulum(std::uint64_t seed, std::shared_ptr<FeatureSchema> schema)
    : EnvironmentBase({ActionSpace::Kind::kBox, 1, -kMaxTorque, kMaxTorque},
                      schema ? schema : make_schema(), seed, kMaxSteps) {
  if (schema) require_layout(schema, make_schema(), "pendulum");
}

std::shared_ptr<FeatureSchema> Pendulum::make_schema() {
  auto s = std::make_shared<FeatureSchema>();
  s->add_numerical("cos_theta");
  s->add_numerical("sin_theta");
  s->add_numerical("theta_dot");
  return s;
}

double Pendulum::angle_normalize(double theta) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double t = std::fmod(theta + std::numbers::pi, two_pi);
  if (t < 0) t += two_pi;
  return t - std::numbers::pi;
}

double Pendulum::reward(const State& s, double torque) {
  const double a = angle_normalize(s.theta);
  return -(a * a + 0.1 * s.theta_dot * s.theta_dot + 0.001 * torque * torque);
}

Pendulum::State Pendulum::integrate(const State& s, double torque) {
  const double u = std::clamp(torque, -kMaxTorque, kMaxTorque);
  State n;
  n.theta_dot = s.theta_dot + (3.0 * kGravity / (2.0 * kLength) * std::sin(s.theta) +
                               3.0 / (kMass * kLength * kLength) * u) *
                                  kDt;
  n.theta_dot = std::clamp(n.theta_dot, -kMaxSpeed, kMaxSpeed);
  n.theta = s.theta + n.theta_dot * kDt;
  return n;
}

FeatureVector Pendulum::observe() const {
  return {{std::cos(state_.theta), std::sin(state_.theta), state_.theta_dot}};
}

FeatureVector Pendulum::reset() {
  state_.theta =
      std::uniform_real_distribution<double>(-std::numbers::pi, std::numbers::pi)(rng_);
  state_.theta_dot = std::uniform_real_distribution<double>(-1.0, 1.0)(rng_);
  begin_episode();
  return observe();
}

StepResult Pendulum::step(const Action& action) {
  const auto* a = std::get_if<std::vector<double>>(&action);
  if (a == nullptr || a->size() != 1) throw EnvError("pendulum needs a 1-d action");
  double u = (*a)[0];
  if (std::isnan(u)) throw EnvError("NaN torque");
  u = std::clamp(u, -kMaxTorque, kMaxTorque);
  begin_step();
  const double r = reward(state_, u);
  state_ = integrate(state_, u);
  return finish_step(observe(), r, false);
}

// ---------------------------------------------------------------------------

namespace {

const Tile kEmptyTile{"empty", "none", 0};
const Tile kWallTile{"wall", "grey", 0};
const Tile kGoalTile{"goal", "green", 0};

constexpr int kDirDx[4] = {1, 0, -1, 0};
constexpr int kDirDy[4] = {0, 1, 0, -1};

}  // namespace

CatGrid::CatGrid(std::uint64_t seed, std::shared_ptr<FeatureSchema> schema,
                 int size)
    : EnvironmentBase({ActionSpace::Kind::kDiscrete, 4},
                      schema ? schema : make_grid_schema(), seed,
                      4 * size * size),
      size_(size) {
  if (size < 4) throw EnvError("catgrid size must be >= 4");
  if (schema) require_layout(schema, make_grid_schema(), "catgrid");
}

bool CatGrid::is_wall(Cell c) const { return tile_at(c) == kWallTile; }

const Tile& CatGrid::tile_at(Cell c) const {
  if (c.x < 0 || c.y < 0 || c.x >= size_ || c.y >= size_) return kWallTile;
  return tiles_[static_cast<std::size_t>(c.y * size_ + c.x)];
}

FeatureVector CatGrid::reset() {
  tiles_.assign(static_cast<std::size_t>(size_ * size_), kEmptyTile);
  for (int i = 0; i < size_; ++i) {
    tiles_[static_cast<std::size_t>(i)] = kWallTile;
    tiles_[static_cast<std::size_t>((size_ - 1) * size_ + i)] = kWallTile;
    tiles_[static_cast<std::size_t>(i * size_)] = kWallTile;
    tiles_[static_cast<std::size_t>(i * size_ + size_ - 1)] = kWallTile;
  }
  goal_ = {size_ - 2, size_ - 2};
  tiles_[static_cast<std::size_t>(goal_.y * size_ + goal_.x)] = kGoalTile;
  agent_ = {1, 1};
  dir_ = Direction::kRight;
  begin_episode();
  return observe();
}

void CatGrid::place_agent(Cell c, Direction d) {
  if (tile_at(c) == kWallTile) throw EnvError("cannot place agent in a wall");
  agent_ = c;
  dir_ = d;
}

void CatGrid::place_wall(Cell c) {
  if (c.x < 0 || c.y < 0 || c.x >= size_ || c.y >= size_) {
    throw EnvError("wall outside grid");
  }
  tiles_[static_cast<std::size_t>(c.y * size_ + c.x)] = kWallTile;
}

GridView CatGrid::view() const {
  const int d = static_cast<int>(dir_);
  const int fx = kDirDx[d];
  const int fy = kDirDy[d];
  // Right-hand side of the heading, in screen coordinates (y down).
  const int rx = -fy;
  const int ry = fx;
  GridView v;
  const int half = kGridViewSize / 2;
  for (int row = 0; row < kGridViewSize; ++row) {
    const int ahead = kGridViewSize - 1 - row;
    for (int col = 0; col < kGridViewSize; ++col) {
      const int side = col - half;
      const Cell c{agent_.x + fx * ahead + rx * side,
                   agent_.y + fy * ahead + ry * side};
      v[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)] =
          (ahead == 0 && side == 0) ? kEmptyTile : tile_at(c);
    }
  }
  return v;
}

FeatureVector CatGrid::observe() {
  return encode_grid_observation(*schema(), view(), dir_, kMission);
}

StepResult CatGrid::step(const Action& action) {
  const int a = discrete_index(action, 4);
  begin_step();
  double reward = 0.0;
  bool terminated = false;
  switch (a) {
    case kTurnLeft:
      dir_ = static_cast<Direction>((static_cast<int>(dir_) + 3) % 4);
      break;
    case kTurnRight:
      dir_ = static_cast<Direction>((static_cast<int>(dir_) + 1) % 4);
      break;
    case kForward: {
      const int d = static_cast<int>(dir_);
      const Cell next{agent_.x + kDirDx[d], agent_.y + kDirDy[d]};
      if (!is_wall(next)) agent_ = next;
      if (agent_ == goal_) {
        terminated = true;
        reward = 1.0 - 0.9 * static_cast<double>(elapsed_steps()) /
                           static_cast<double>(max_steps());
      }
      break;
    }
    default:
      break;
  }
  return finish_step(observe(), reward, terminated);
}

// ---------------------------------------------------------------------------

EnvSpec make_env_spec(std::string_view name,
                      std::shared_ptr<FeatureSchema> schema) {
  EnvSpec spec;
  spec.name = std::string(name);
  if (name == "cartpole") {
    spec.schema = schema ? schema : CartPole::make_schema();
    spec.action_space = {ActionSpace::Kind::kDiscrete, 2};
    spec.create = [s = spec.schema](std::uint64_t seed) {
      return std::make_unique<CartPole>(seed, s);
    };
  } else if (name == "pendulum") {
    spec.schema = schema ? schema : Pendulum::make_schema();
    spec.action_space = {ActionSpace::Kind::kBox, 1, -Pendulum::kMaxTorque,
                         Pendulum::kMaxTorque};
    spec.create = [s = spec.schema](std::uint64_t seed) {
      return std::make_unique<Pendulum>(seed, s);
    };
  } else if (name == "catgrid") {
    spec.schema = schema ? schema : make_grid_schema();
    spec.action_space = {ActionSpace::Kind::kDiscrete, 4};
    spec.create = [s = spec.schema](std::uint64_t seed) {
      return std::make_unique<CatGrid>(seed, s);
    };
  } else {
    throw EnvError("unknown environment '" + std::string(name) +
                   "' (expected cartpole, catgrid or pendulum)");
  }
  // Fails early on a mismatched schema.
  spec.create(0);
  return spec;
}

VecEnv::VecEnv(const EnvSpec& spec, int n, std::uint64_t seed) {
  if (n < 1) throw EnvError("VecEnv needs n >= 1");
  for (int i = 0; i < n; ++i) {
    envs_.push_back(spec.create(seed + static_cast<std::uint64_t>(i)));
  }
}

const std::vector<FeatureVector>& VecEnv::reset() {
  obs_.clear();
  for (auto& env : envs_) obs_.push_back(env->reset());
  return obs_;
}

std::vector<VecEnv::Step> VecEnv::step(std::span<const Action> actions) {
  if (actions.size() != envs_.size()) {
    throw EnvError("VecEnv::step got " + std::to_string(actions.size()) +
                   " actions for " + std::to_string(envs_.size()) + " envs");
  }
  if (obs_.size() != envs_.size()) throw EnvError("VecEnv::step before reset");
  std::vector<Step> out(envs_.size());
  for (std::size_t i = 0; i < envs_.size(); ++i) {
    StepResult r = envs_[i]->step(actions[i]);
    Step& s = out[i];
    s.reward = r.reward;
    s.terminated = r.terminated;
    s.truncated = r.truncated;
    if (r.done()) {
      s.terminal_observation = std::move(r.observation);
      s.observation = envs_[i]->reset();
    } else {
      s.observation = std::move(r.observation);
    }
    obs_[i] = s.observation;
  }
  return out;
}

}  // namespace gbrl
