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

#ifndef GBRL_LAYOUT_HPP_
#define GBRL_LAYOUT_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gbrl {

// How the ensemble's output vector is carved up. The value head is always
// the last dimension.
//   discrete(n):  [logits(n) | value]
//   gaussian(a):  [mu(a) | log_std(a) | value]
struct OutputLayout {
  enum class Kind : std::uint8_t { kDiscrete = 0, kGaussian = 1 };

  Kind kind = Kind::kDiscrete;
  int action_dim = 1;

  static OutputLayout discrete(int n_actions) {
    return {Kind::kDiscrete, n_actions};
  }
  static OutputLayout gaussian(int action_dim) {
    return {Kind::kGaussian, action_dim};
  }

  bool is_discrete() const { return kind == Kind::kDiscrete; }
  int policy_dim() const { return is_discrete() ? action_dim : 2 * action_dim; }
  int output_dim() const { return policy_dim() + 1; }
  int value_index() const { return policy_dim(); }
  // Start of the log-std block, or -1 for discrete layouts.
  int log_std_begin() const { return is_discrete() ? -1 : action_dim; }
  bool is_log_std(int dim) const {
    return !is_discrete() && dim >= action_dim && dim < 2 * action_dim;
  }

  std::string describe() const;
  bool operator==(const OutputLayout&) const = default;
};

// Ensemble output for one state, interpreted through a layout.
struct PolicyParams {
  OutputLayout layout;
  std::vector<double> theta;

  PolicyParams() = default;
  PolicyParams(OutputLayout l, std::vector<double> t)
      : layout(l), theta(std::move(t)) {}

  std::span<const double> logits() const {
    return {theta.data(), static_cast<std::size_t>(layout.action_dim)};
  }
  std::span<const double> mu() const { return logits(); }
  std::span<const double> log_std() const {
    return {theta.data() + layout.action_dim,
            static_cast<std::size_t>(layout.action_dim)};
  }
  std::span<const double> policy() const {
    return {theta.data(), static_cast<std::size_t>(layout.policy_dim())};
  }
  double value() const {
    return theta[static_cast<std::size_t>(layout.value_index())];
  }
};

}  // namespace gbrl

#endif  // GBRL_LAYOUT_HPP_
