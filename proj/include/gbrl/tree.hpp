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

#ifndef GBRL_TREE_HPP_
#define GBRL_TREE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "gbrl/features.hpp"
#include "gbrl/matrix.hpp"

namespace gbrl {

class TreeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SplitKind : std::uint8_t { kNumericLE = 0, kCategoricalEq = 1 };

// NumericLE sends x to the left child iff x[feature] <= value;
// CategoricalEq iff x[feature] == value (a token id).
struct SplitCondition {
  std::size_t feature = 0;
  SplitKind kind = SplitKind::kNumericLE;
  double value = 0.0;

  bool goes_left(const FeatureVector& x) const {
    const double v = x.values[feature];
    return kind == SplitKind::kNumericLE ? v <= value : v == value;
  }
  bool operator==(const SplitCondition&) const = default;
};

struct TreeFitConfig {
  int max_depth = 4;
  int min_samples_leaf = 1;
  int num_bins = 256;
  int output_dim = 1;

  void validate() const;
};

// Binary regression tree with vector-valued leaves, stored as a flat node
// array in pre-order. Leaves hold the raw mean target; learning rates are
// applied by the ensemble.
class DecisionTree {
 public:
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    SplitKind kind = SplitKind::kNumericLE;
    double value = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t leaf = -1;  // row in the leaf table, leaves only
    double gain = 0.0;

    bool is_leaf() const { return feature < 0; }
  };

  explicit DecisionTree(int output_dim);
  // Single-leaf tree.
  static DecisionTree constant(std::span<const double> value);

  int output_dim() const { return output_dim_; }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_leaves() const { return leaf_values_.size() / output_dim_; }
  std::size_t num_splits() const { return num_nodes() - num_leaves(); }
  int depth() const;

  const std::vector<Node>& nodes() const { return nodes_; }
  std::optional<SplitCondition> split(std::size_t node) const;
  std::span<const double> leaf_value(std::size_t leaf) const {
    return {leaf_values_.data() + leaf * output_dim_,
            static_cast<std::size_t>(output_dim_)};
  }

  std::size_t leaf_index(const FeatureVector& x) const {
    const Node* node = &nodes_[0];
    while (!node->is_leaf()) {
      const double v = x.values[static_cast<std::size_t>(node->feature)];
      const bool left =
          node->kind == SplitKind::kNumericLE ? v <= node->value : v == node->value;
      node = &nodes_[static_cast<std::size_t>(left ? node->left : node->right)];
    }
    return static_cast<std::size_t>(node->leaf);
  }
  std::span<const double> predict(const FeatureVector& x) const {
    return leaf_value(leaf_index(x));
  }

  // Low-level construction, used by the fitter and the deserializer. Nodes
  // must be appended in pre-order; children are wired with set_children.
  std::int32_t append_leaf(std::span<const double> value);
  std::int32_t append_split(const SplitCondition& cond, double gain);
  void set_children(std::int32_t node, std::int32_t left, std::int32_t right);
  // Throws TreeError unless every split has two in-range children and the
  // node graph is a tree rooted at 0.
  void check_structure() const;

  bool operator==(const DecisionTree&) const;

 private:
  int output_dim_;
  std::vector<Node> nodes_;
  std::vector<double> leaf_values_;
};

// Greedy top-down CART on the multi-output squared error. Each split
// maximizes split_gain; ties go to the lowest feature index, then the
// smallest threshold or token id. Stops at max_depth, min_samples_leaf or
// zero gain.
DecisionTree fit_tree(const FeatureSchema& schema,
                      std::span<const FeatureVector> states,
                      const Matrix& targets, const TreeFitConfig& cfg);

inline std::span<const double> predict_tree(const DecisionTree& tree,
                                            const FeatureVector& x) {
  return tree.predict(x);
}

// Sum of squared L2 distances of rows to their mean.
double sum_squared_error(const Matrix& targets);

// SSE(node) - SSE(left) - SSE(right). Throws TreeError on an empty child or
// when the children do not add up to the node.
double split_gain(const Matrix& node, const Matrix& left, const Matrix& right);

}  // namespace gbrl

#endif  // GBRL_TREE_HPP_
