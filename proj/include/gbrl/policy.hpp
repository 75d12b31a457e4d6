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

#ifndef GBRL_POLICY_HPP_
#define GBRL_POLICY_HPP_

#include <random>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "gbrl/layout.hpp"

namespace gbrl {

using Rng = std::mt19937_64;

// Discrete index or continuous action vector.
using Action = std::variant<int, std::vector<double>>;

class PolicyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ActionSample {
  Action action;
  double log_prob = 0.0;
};

std::vector<double> softmax(std::span<const double> logits);
double log_sum_exp(std::span<const double> values);

// Discrete: categorical over softmax(logits). Gaussian: mu + exp(log_std) * z.
ActionSample sample(const PolicyParams& params, Rng& rng);
// argmax of the logits, or mu.
Action greedy_action(const PolicyParams& params);

double log_prob(const PolicyParams& params, const Action& action);
double entropy(const PolicyParams& params);

// Gradients over the policy dims of theta (logits, or mu then log_std).
std::vector<double> grad_log_prob(const PolicyParams& params,
                                  const Action& action);
std::vector<double> grad_entropy(const PolicyParams& params);

}  // namespace gbrl

#endif  // GBRL_POLICY_HPP_
