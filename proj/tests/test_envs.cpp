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

#include <cmath>
#include <numbers>

#include "gbrl/envs.hpp"

namespace gbrl {
namespace {

TEST(CartPole, FrozenStepFromRest) {
  const auto next = CartPole::integrate({}, 1);
  EXPECT_EQ(next.x, 0.0);
  EXPECT_EQ(next.theta, 0.0);
  EXPECT_NEAR(next.x_dot, 0.1951219512195122, 1e-15);
  EXPECT_NEAR(next.theta_dot, -0.2926829268292683, 1e-15);
  const auto left = CartPole::integrate({}, 0);
  EXPECT_NEAR(left.x_dot, -0.1951219512195122, 1e-15);
}

TEST(CartPole, TerminatesOutOfBounds) {
  CartPole env(0);
  env.reset();
  env.set_state({2.39, 1.0, 0.0, 0.0});
  const auto r = env.step(1);
  EXPECT_TRUE(r.terminated);
  EXPECT_FALSE(r.truncated);
  EXPECT_EQ(r.reward, 1.0);
  EXPECT_THROW(env.step(1), EnvError);
}

TEST(CartPole, RejectsBadUse) {
  CartPole env(0);
  EXPECT_THROW(env.step(0), EnvError);
  env.reset();
  EXPECT_THROW(env.step(2), EnvError);
  EXPECT_THROW(env.step(std::vector<double>{0.0}), EnvError);
}

TEST(CartPole, SeededResetsRepeat) {
  CartPole a(42), b(42), c(43);
  EXPECT_EQ(a.reset(), b.reset());
  EXPECT_FALSE(a.reset() == c.reset());
}

TEST(Pendulum, RewardAndAngles) {
  EXPECT_NEAR(Pendulum::reward({std::numbers::pi, 0.0}, 0.0), -9.869604401089358, 1e-12);
  EXPECT_EQ(Pendulum::reward({0.0, 0.0}, 0.0), 0.0);
  EXPECT_NEAR(Pendulum::reward({0.0, 1.0}, 2.0), -0.1 - 0.004, 1e-15);
  EXPECT_NEAR(Pendulum::angle_normalize(3 * std::numbers::pi / 2), -std::numbers::pi / 2,
              1e-12);
  EXPECT_NEAR(Pendulum::angle_normalize(-7.0), -7.0 + 2 * std::numbers::pi, 1e-12);
}

TEST(Pendulum, ClampsTorqueAndSpeed) {
  const auto a = Pendulum::integrate({0.0, 0.0}, 100.0);
  const auto b = Pendulum::integrate({0.0, 0.0}, 2.0);
  EXPECT_EQ(a.theta_dot, b.theta_dot);
  EXPECT_NEAR(b.theta_dot, 3.0 * 2.0 * 0.05, 1e-15);
  EXPECT_EQ(Pendulum::integrate({1.0, 7.99}, 2.0).theta_dot, 8.0);
}

TEST(Pendulum, TruncatesAfterTwoHundredSteps) {
  Pendulum env(1);
  env.reset();
  StepResult r;
  for (int i = 0; i < 200; ++i) {
    ASSERT_FALSE(r.done());
    r = env.step(std::vector<double>{0.5});
    EXPECT_FALSE(r.terminated);
    EXPECT_LE(r.reward, 0.0);
  }
  EXPECT_TRUE(r.truncated);
  EXPECT_THROW(env.step(std::vector<double>{0.0}), EnvError);
  EXPECT_THROW(Pendulum(1).step(std::vector<double>{0.0}), EnvError);
}

TEST(CatGrid, ShortestPathReward) {
  CatGrid env(0);
  const auto obs = env.reset();
  EXPECT_EQ(obs.size(), static_cast<std::size_t>(kGridFeatureCount));
  EXPECT_EQ(env.agent(), (CatGrid::Cell{1, 1}));
  StepResult r;
  for (int i = 0; i < 5; ++i) r = env.step(CatGrid::kForward);
  EXPECT_EQ(env.agent(), (CatGrid::Cell{6, 1}));
  EXPECT_EQ(r.reward, 0.0);
  r = env.step(CatGrid::kForward);
  EXPECT_EQ(env.agent(), (CatGrid::Cell{6, 1}));
  r = env.step(CatGrid::kTurnRight);
  EXPECT_EQ(env.direction(), Direction::kDown);
  for (int i = 0; i < 5; ++i) r = env.step(CatGrid::kForward);
  EXPECT_TRUE(r.terminated);
  EXPECT_NEAR(r.reward, 1.0 - 0.9 * 12.0 / 256.0, 1e-15);
}

TEST(CatGrid, WallsBlockAndPickupIsNoOp) {
  CatGrid env(0);
  env.reset();
  env.place_wall({2, 1});
  const auto before = env.step(CatGrid::kPickup).observation;
  const auto after = env.step(CatGrid::kForward).observation;
  EXPECT_EQ(env.agent(), (CatGrid::Cell{1, 1}));
  EXPECT_EQ(before, after);
  EXPECT_THROW(env.place_agent({0, 0}, Direction::kUp), EnvError);
  env.step(CatGrid::kTurnLeft);
  EXPECT_EQ(env.direction(), Direction::kUp);
}

TEST(CatGrid, ViewSeesGoalAhead) {
  CatGrid env(0);
  env.reset();
  env.place_agent({6, 3}, Direction::kDown);
  const auto view = env.view();
  // Goal is three cells ahead; the agent stands in the bottom-centre cell.
  EXPECT_EQ(view[kGridViewSize - 1 - 3][kGridViewSize / 2].type, "goal");
  EXPECT_EQ(view[kGridViewSize - 1][kGridViewSize / 2].type, "empty");
  // The east wall is on the agent's left when facing down.
  EXPECT_EQ(view[kGridViewSize - 1][kGridViewSize / 2 - 1].type, "wall");
  EXPECT_EQ(view[kGridViewSize - 1][kGridViewSize / 2 + 1].type, "empty");
}

TEST(CatGrid, TruncatesAtStepLimit) {
  CatGrid env(0);
  env.reset();
  StepResult r;
  for (int i = 0; i < env.max_steps(); ++i) r = env.step(CatGrid::kTurnLeft);
  EXPECT_TRUE(r.truncated);
  EXPECT_FALSE(r.terminated);
  EXPECT_EQ(r.reward, 0.0);
}

TEST(EnvSpec, KnownNamesAndSchemaChecks) {
  for (const char* name : {"cartpole", "pendulum", "catgrid"}) {
    const auto spec = make_env_spec(name);
    auto env = spec.create(3);
    EXPECT_EQ(env->reset().size(), spec.schema->size());
    EXPECT_EQ(env->schema(), spec.schema);
  }
  EXPECT_THROW(make_env_spec("mountaincar"), EnvError);
  EXPECT_THROW(make_env_spec("cartpole", Pendulum::make_schema()), EnvError);
  EXPECT_EQ(make_env_spec("pendulum").action_space.layout(), OutputLayout::gaussian(1));
}

TEST(VecEnv, SeedsAndAutoReset) {
  const auto spec = make_env_spec("cartpole");
  VecEnv vec(spec, 3, 10);
  const auto obs = vec.reset();
  CartPole second(11, spec.schema);
  EXPECT_EQ(obs[1], second.reset());

  std::vector<Action> push(3, Action(1));
  bool saw_done = false;
  for (int t = 0; t < 200 && !saw_done; ++t) {
    const auto steps = vec.step(push);
    for (const auto& s : steps) {
      if (s.done()) {
        saw_done = true;
        ASSERT_TRUE(s.terminal_observation.has_value());
        EXPECT_FALSE(*s.terminal_observation == s.observation);
      } else {
        EXPECT_FALSE(s.terminal_observation.has_value());
      }
    }
  }
  EXPECT_TRUE(saw_done);
  EXPECT_THROW(vec.step(std::vector<Action>(2, Action(0))), EnvError);
}

}  // namespace
}  // namespace gbrl
