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

// Test-only reference computations. Nothing here calls into the code paths
// it is used to check.

#ifndef GBRL_TESTS_ORACLES_HPP_
#define GBRL_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <vector>

#include "gbrl/features.hpp"
#include "gbrl/matrix.hpp"

namespace gbrl::oracle {

// Sum over rows of squared distance to the row mean, computed naively.
inline double sse(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return 0.0;
  const std::size_t dim = rows[0].size();
  std::vector<double> mean(dim, 0.0);
  for (const auto& r : rows) {
    for (std::size_t d = 0; d < dim; ++d) mean[d] += r[d];
  }
  for (double& m : mean) m /= static_cast<double>(rows.size());
  double s = 0.0;
  for (const auto& r : rows) {
    for (std::size_t d = 0; d < dim; ++d) s += (r[d] - mean[d]) * (r[d] - mean[d]);
  }
  return s;
}

inline std::vector<double> row(const Matrix& m, Eigen::Index i) {
  return {m.row(i).begin(), m.row(i).end()};
}

struct ExhaustiveSplit {
  bool found = false;
  double gain = -std::numeric_limits<double>::infinity();
};

// Tries every (feature, observed value) pair: x <= v for numerical slots,
// x == v for categorical ones.
inline ExhaustiveSplit best_split(const FeatureSchema& schema,
                                  const std::vector<FeatureVector>& xs,
                                  const Matrix& targets, int min_leaf = 1) {
  std::vector<std::vector<double>> all;
  for (Eigen::Index i = 0; i < targets.rows(); ++i) all.push_back(row(targets, i));
  const double parent = sse(all);
  ExhaustiveSplit best;
  for (std::size_t f = 0; f < schema.size(); ++f) {
    std::set<double> values;
    for (const auto& x : xs) values.insert(x.values[f]);
    for (double v : values) {
      std::vector<std::vector<double>> left;
      std::vector<std::vector<double>> right;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = xs[i].values[f];
        const bool go_left = schema.is_categorical(f) ? x == v : x <= v;
        (go_left ? left : right).push_back(row(targets, static_cast<Eigen::Index>(i)));
      }
      if (static_cast<int>(left.size()) < min_leaf ||
          static_cast<int>(right.size()) < min_leaf) {
        continue;
      }
      const double gain = parent - sse(left) - sse(right);
      if (gain > best.gain) {
        best.found = true;
        best.gain = gain;
      }
    }
  }
  return best;
}

// A_t = sum_l (gamma lambda)^l delta_{t+l}, stopping after the first done.
inline std::vector<double> gae_by_summation(const std::vector<double>& rewards,
                                            const std::vector<double>& values,
                                            const std::vector<std::uint8_t>& dones,
                                            double last_value, double gamma,
                                            double lambda) {
  const std::size_t n = rewards.size();
  auto value_at = [&](std::size_t t) { return t < n ? values[t] : last_value; };
  std::vector<double> delta(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double next = dones[t] ? 0.0 : value_at(t + 1);
    delta[t] = rewards[t] + gamma * next - values[t];
  }
  std::vector<double> adv(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double weight = 1.0;
    for (std::size_t k = t; k < n; ++k) {
      adv[t] += weight * delta[k];
      if (dones[k]) break;
      weight *= gamma * lambda;
    }
  }
  return adv;
}

// Discounted return to the end of each episode (or bootstrapped with
// last_value at the tail).
inline std::vector<double> discounted_returns(const std::vector<double>& rewards,
                                              const std::vector<std::uint8_t>& dones,
                                              double last_value, double gamma) {
  const std::size_t n = rewards.size();
  std::vector<double> g(n);
  for (std::size_t t = 0; t < n; ++t) {
    double total = 0.0;
    double discount = 1.0;
    std::size_t k = t;
    for (; k < n; ++k) {
      total += discount * rewards[k];
      discount *= gamma;
      if (dones[k]) break;
    }
    if (k == n) total += discount * last_value;
    g[t] = total;
  }
  return g;
}

// Central differences of f around x, one coordinate at a time.
inline std::vector<double> finite_difference(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double h = 1e-5) {
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f(x);
    x[i] = saved - h;
    const double down = f(x);
    x[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

// Per-sample surrogate objectives written straight from the definitions.
// theta is one row [policy | value]; n is the action count (discrete) or
// action dimension (gaussian).
inline double ref_log_prob(const std::vector<double>& theta, bool discrete,
                           int n, int action, const std::vector<double>& a) {
  if (discrete) {
    double z = 0.0;
    for (int j = 0; j < n; ++j) z += std::exp(theta[j]);
    return theta[action] - std::log(z);
  }
  double lp = 0.0;
  for (int j = 0; j < n; ++j) {
    const double s = std::exp(theta[n + j]);
    const double u = (a[j] - theta[j]) / s;
    lp += -0.5 * u * u - theta[n + j] - 0.5 * std::log(2.0 * M_PI);
  }
  return lp;
}

inline double ref_entropy(const std::vector<double>& theta, bool discrete, int n) {
  if (discrete) {
    double z = 0.0;
    for (int j = 0; j < n; ++j) z += std::exp(theta[j]);
    double h = 0.0;
    for (int j = 0; j < n; ++j) {
      const double p = std::exp(theta[j]) / z;
      h -= p * std::log(p);
    }
    return h;
  }
  double h = 0.0;
  for (int j = 0; j < n; ++j) h += theta[n + j] + 0.5 * std::log(2.0 * M_PI * M_E);
  return h;
}

enum class Objective { kA2C, kPPO, kAWR };

struct ObjectiveSample {
  bool discrete = true;
  int n = 2;
  int action = 0;
  std::vector<double> continuous_action;
  double advantage = 0.0;
  double ret = 0.0;
  double log_prob_old = 0.0;
  double clip_range = 0.2;
  double ent_coef = 0.0;
  double awr_weight = 1.0;  // held fixed, evaluated at the base point
};

// Objective whose ascent gradient the training code feeds to the trees.
inline double objective(Objective kind, const ObjectiveSample& s,
                        const std::vector<double>& theta) {
  const double lp =
      ref_log_prob(theta, s.discrete, s.n, s.action, s.continuous_action);
  const double value = theta.back();
  double policy = 0.0;
  switch (kind) {
    case Objective::kA2C:
      policy = s.advantage * lp;
      break;
    case Objective::kPPO: {
      const double r = std::exp(lp - s.log_prob_old);
      const double rc = std::clamp(r, 1.0 - s.clip_range, 1.0 + s.clip_range);
      policy = std::min(r * s.advantage, rc * s.advantage);
      break;
    }
    case Objective::kAWR:
      policy = s.awr_weight * lp;
      break;
  }
  return policy + s.ent_coef * ref_entropy(theta, s.discrete, s.n) -
         0.5 * (s.ret - value) * (s.ret - value);
}

// Random batch over a schema with `numeric` numerical then `categorical`
// categorical features. Numerical values are drawn from a small grid so
// ties occur; token ids from [0, tokens).
inline std::shared_ptr<FeatureSchema> mixed_schema(int numeric, int categorical,
                                                   int tokens) {
  auto schema = std::make_shared<FeatureSchema>();
  for (int i = 0; i < numeric; ++i) schema->add_numerical("x" + std::to_string(i));
  for (int i = 0; i < categorical; ++i) {
    const auto slot = schema->add_categorical("c" + std::to_string(i));
    for (int t = 0; t < tokens; ++t) schema->intern(slot, "t" + std::to_string(t));
  }
  return schema;
}

inline std::vector<FeatureVector> random_states(const FeatureSchema& schema,
                                                std::size_t n, int tokens,
                                                std::mt19937_64& rng) {
  std::uniform_int_distribution<int> grid(0, 15);
  std::uniform_int_distribution<int> tok(0, tokens - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coarse(0.5);
  std::vector<FeatureVector> xs(n);
  for (auto& x : xs) {
    for (std::size_t f = 0; f < schema.size(); ++f) {
      if (schema.is_categorical(f)) {
        x.values.push_back(tok(rng));
      } else {
        x.values.push_back(coarse(rng) ? grid(rng) * 0.25 : normal(rng));
      }
    }
  }
  return xs;
}

}  // namespace gbrl::oracle

#endif  // GBRL_TESTS_ORACLES_HPP_
