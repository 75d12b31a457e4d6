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

#ifndef GBRL_ENSEMBLE_HPP_
#define GBRL_ENSEMBLE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gbrl/features.hpp"
#include "gbrl/layout.hpp"
#include "gbrl/matrix.hpp"
#include "gbrl/tree.hpp"

namespace gbrl {

class EnsembleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SerializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Additive multi-output ensemble: out(x) = theta0 + sum_m lr_m * tree_m(x).
// Each tree is bound to the learning-rate vector in force when it was
// added, so changing the rates (e.g. a linear schedule) only affects trees
// added afterwards.
class TreeEnsemble {
 public:
  TreeEnsemble(std::vector<double> theta0, std::vector<double> learning_rates);

  int output_dim() const { return static_cast<int>(theta0_.size()); }
  const std::vector<double>& theta0() const { return theta0_; }
  const std::vector<double>& learning_rates() const { return lr_; }
  void set_learning_rates(std::vector<double> lr);

  void add_tree(DecisionTree tree);
  // Appends with an explicit rate vector (deserialization).
  void add_tree(DecisionTree tree, std::vector<double> lr);

  std::size_t num_trees() const { return trees_.size(); }
  std::size_t num_nodes() const;
  const DecisionTree& tree(std::size_t i) const { return trees_[i]; }
  std::span<const double> tree_learning_rates(std::size_t i) const {
    return {tree_lr_.data() + i * theta0_.size(), theta0_.size()};
  }

  // out += sum of scaled tree outputs (theta0 excluded).
  void accumulate(const FeatureVector& x, std::span<double> out) const;
  void accumulate_tree(std::size_t i, const FeatureVector& x,
                       std::span<double> out) const;

 private:
  // Compact copy of every tree for prediction: pre-order nodes, so a left
  // child always follows its parent. Leaves point at rows of scaled_leaves_,
  // which already include the tree's learning rates.
  struct PackedNode {
    double value;
    std::int32_t feature;  // (feature << 1) | kind, or -1 for a leaf
    std::int32_t next;     // right child, or leaf row offset
  };
  void pack(const DecisionTree& tree, std::span<const double> lr);

  std::vector<double> theta0_;
  std::vector<double> lr_;
  std::vector<DecisionTree> trees_;
  std::vector<double> tree_lr_;
  std::vector<PackedNode> packed_;
  std::vector<std::uint32_t> packed_roots_;
  std::vector<double> scaled_leaves_;
};

enum class EnsembleMode : std::uint8_t { kShared = 0, kSeparate = 1 };

struct LearningRates {
  double actor = 0.01;
  double critic = 0.01;
  double log_std = 0.01;
};

// Per-dimension rates for a layout: actor on logits / mu, log_std on the
// log-std block, critic on the value dimension.
std::vector<double> per_dim_learning_rates(const OutputLayout& layout,
                                           const LearningRates& rates);

// Actor-critic parameterization theta(s) = [policy params..., V(s)].
//
// Shared mode keeps a single ensemble whose trees emit every output
// dimension. Separate mode keeps an actor ensemble over the policy
// dimensions and a critic ensemble over the value dimension, and so grows
// two trees per boosting iteration.
class ActorCriticEnsemble {
 public:
  ActorCriticEnsemble(OutputLayout layout,
                      std::shared_ptr<FeatureSchema> schema,
                      LearningRates rates,
                      EnsembleMode mode = EnsembleMode::kShared,
                      double log_std_init = -2.0);

  const OutputLayout& layout() const { return layout_; }
  EnsembleMode mode() const { return mode_; }
  int output_dim() const { return layout_.output_dim(); }
  const FeatureSchema& schema() const { return *schema_; }
  const std::shared_ptr<FeatureSchema>& shared_schema() const {
    return schema_;
  }

  std::vector<double> theta0() const;
  const LearningRates& learning_rates() const { return rates_; }
  std::vector<double> lr_per_dim() const {
    return per_dim_learning_rates(layout_, rates_);
  }
  void set_learning_rates(const LearningRates& rates);

  PolicyParams predict(const FeatureVector& x) const;
  void predict_into(const FeatureVector& x, std::span<double> theta) const;
  std::vector<PolicyParams> predict_batch(
      std::span<const FeatureVector> xs) const;
  // Row i holds theta(xs[i]). Iterates tree-major for cache locality.
  Matrix predict_matrix(std::span<const FeatureVector> xs) const;

  // Shared mode only: one tree over all output dimensions.
  void add_tree(DecisionTree tree);
  // Separate mode only: actor tree over policy dims, critic tree over the
  // value dim.
  void add_trees(DecisionTree actor, DecisionTree critic);
  // theta += contribution of the most recent boosting iteration.
  void accumulate_last_iteration(const FeatureVector& x,
                                 std::span<double> theta) const;

  std::size_t num_iterations() const { return heads_.front().num_trees(); }
  std::size_t num_trees() const;
  std::size_t num_nodes() const;
  const std::vector<TreeEnsemble>& heads() const { return heads_; }

  // Total split gain per feature slot across every tree.
  std::vector<double> feature_importance() const;

  std::string serialize() const;
  static ActorCriticEnsemble deserialize(std::string_view bytes);
  void save(const std::filesystem::path& path) const;
  static ActorCriticEnsemble load(const std::filesystem::path& path);

 private:
  OutputLayout layout_;
  std::shared_ptr<FeatureSchema> schema_;
  LearningRates rates_;
  EnsembleMode mode_;
  std::vector<TreeEnsemble> heads_;
};

inline constexpr std::uint32_t kModelFormatVersion = 1;

}  // namespace gbrl

#endif  // GBRL_ENSEMBLE_HPP_
