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

#include "gbrl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace gbrl {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * ln(2 pi)

int discrete_action(const PolicyParams& params, const Action& action) {
  if (!params.layout.is_discrete()) {
    throw PolicyError("continuous policy given a discrete action");
  }
  const int* a = std::get_if<int>(&action);
  if (a == nullptr) throw PolicyError("discrete policy given a vector action");
  if (*a < 0 || *a >= params.layout.action_dim) {
    throw PolicyError("action " + std::to_string(*a) + " out of range [0, " +
                      std::to_string(params.layout.action_dim) + ")");
  }
  return *a;
}

const std::vector<double>& continuous_action(const PolicyParams& params,
                                             const Action& action) {
  const auto* a = std::get_if<std::vector<double>>(&action);
  if (a == nullptr || params.layout.is_discrete()) {
    throw PolicyError("gaussian policy needs a vector action");
  }
  if (static_cast<int>(a->size()) != params.layout.action_dim) {
    throw PolicyError("action has wrong dimension");
  }
  return *a;
}

}  // namespace

double log_sum_exp(std::span<const double> values) {
  const double m = *std::max_element(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

std::vector<double> softmax(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double s = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    s += p[i];
  }
  for (double& v : p) v /= s;
  return p;
}

ActionSample sample(const PolicyParams& params, Rng& rng) {
  if (params.layout.is_discrete()) {
    const auto p = softmax(params.logits());
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    int a = static_cast<int>(p.size()) - 1;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      cumulative += p[i];
      if (u < cumulative) {
        a = static_cast<int>(i);
        break;
      }
    }
    // Guard against rounding picking a zero-probability tail action.
    while (p[static_cast<std::size_t>(a)] == 0.0 && a > 0) --a;
    Action action = a;
    return {action, log_prob(params, action)};
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto mu = params.mu();
  const auto log_std = params.log_std();
  std::vector<double> a(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    a[i] = mu[i] + std::exp(log_std[i]) * normal(rng);
  }
  Action action = std::move(a);
  const double lp = log_prob(params, action);
  return {std::move(action), lp};
}

Action greedy_action(const PolicyParams& params) {
  if (params.layout.is_discrete()) {
    const auto logits = params.logits();
    return static_cast<int>(std::max_element(logits.begin(), logits.end()) -
                            logits.begin());
  }
  const auto mu = params.mu();
  return std::vector<double>(mu.begin(), mu.end());
}

double log_prob(const PolicyParams& params, const Action& action) {
  if (params.layout.is_discrete()) {
    const int a = discrete_action(params, action);
    const auto logits = params.logits();
    return logits[static_cast<std::size_t>(a)] - log_sum_exp(logits);
  }
  const auto& a = continuous_action(params, action);
  const auto mu = params.mu();
  const auto log_std = params.log_std();
  double lp = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double z = (a[i] - mu[i]) * std::exp(-log_std[i]);
    lp += -0.5 * z * z - log_std[i] - kHalfLog2Pi;
  }
  return lp;
}

double entropy(const PolicyParams& params) {
  if (params.layout.is_discrete()) {
    const auto logits = params.logits();
    const double lse = log_sum_exp(logits);
    double h = 0.0;
    for (double z : logits) {
      const double logp = z - lse;
      const double p = std::exp(logp);
      if (p > 0.0) h -= p * logp;
    }
    return h;
  }
  double h = 0.0;
  for (double ls : params.log_std()) h += 0.5 + kHalfLog2Pi + ls;
  return h;
}

std::vector<double> grad_log_prob(const PolicyParams& params,
                                  const Action& action) {
  if (params.layout.is_discrete()) {
    const int a = discrete_action(params, action);
    std::vector<double> g = softmax(params.logits());
    for (double& v : g) v = -v;
    g[static_cast<std::size_t>(a)] += 1.0;
    return g;
  }
  const auto& a = continuous_action(params, action);
  const auto mu = params.mu();
  const auto log_std = params.log_std();
  const std::size_t n = a.size();
  std::vector<double> g(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double inv_std = std::exp(-log_std[i]);
    const double z = (a[i] - mu[i]) * inv_std;
    g[i] = z * inv_std;
    g[n + i] = z * z - 1.0;
  }
  return g;
}

std::vector<double> grad_entropy(const PolicyParams& params) {
  if (params.layout.is_discrete()) {
    // dH/dz_j = -p_j (log p_j + H)
    const auto logits = params.logits();
    const double lse = log_sum_exp(logits);
    const double h = entropy(params);
    std::vector<double> g(logits.size());
    for (std::size_t j = 0; j < logits.size(); ++j) {
      const double logp = logits[j] - lse;
      g[j] = -std::exp(logp) * (logp + h);
    }
    return g;
  }
  const auto n = static_cast<std::size_t>(params.layout.action_dim);
  std::vector<double> g(2 * n, 0.0);
  std::fill(g.begin() + static_cast<std::ptrdiff_t>(n), g.end(), 1.0);
  return g;
}

}  // namespace gbrl
