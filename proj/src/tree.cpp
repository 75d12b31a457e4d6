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

#include "gbrl/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

namespace gbrl {

void TreeFitConfig::validate() const {
  if (max_depth < 1) throw TreeError("max_depth must be >= 1");
  if (min_samples_leaf < 1) throw TreeError("min_samples_leaf must be >= 1");
  if (num_bins < 2) throw TreeError("num_bins must be >= 2");
  if (output_dim < 1) throw TreeError("output_dim must be >= 1");
}

DecisionTree::DecisionTree(int output_dim) : output_dim_(output_dim) {
  if (output_dim < 1) throw TreeError("output_dim must be >= 1");
}

DecisionTree DecisionTree::constant(std::span<const double> value) {
  DecisionTree tree(static_cast<int>(value.size()));
  tree.append_leaf(value);
  return tree;
}

int DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<int> depth(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.is_leaf()) continue;
    depth[static_cast<std::size_t>(n.left)] = depth[i] + 1;
    depth[static_cast<std::size_t>(n.right)] = depth[i] + 1;
    deepest = std::max(deepest, depth[i] + 1);
  }
  return deepest;
}

std::optional<SplitCondition> DecisionTree::split(std::size_t node) const {
  const Node& n = nodes_.at(node);
  if (n.is_leaf()) return std::nullopt;
  return SplitCondition{static_cast<std::size_t>(n.feature), n.kind, n.value};
}

std::int32_t DecisionTree::append_leaf(std::span<const double> value) {
  if (static_cast<int>(value.size()) != output_dim_) {
    throw TreeError("leaf dimension mismatch");
  }
  Node node;
  node.leaf = static_cast<std::int32_t>(num_leaves());
  leaf_values_.insert(leaf_values_.end(), value.begin(), value.end());
  nodes_.push_back(node);
  return static_cast<std::int32_t>(nodes_.size() - 1);
}

std::int32_t DecisionTree::append_split(const SplitCondition& cond,
                                        double gain) {
  Node node;
  node.feature = static_cast<std::int32_t>(cond.feature);
  node.kind = cond.kind;
  node.value = cond.value;
  node.gain = gain;
  nodes_.push_back(node);
  return static_cast<std::int32_t>(nodes_.size() - 1);
}

void DecisionTree::set_children(std::int32_t node, std::int32_t left,
                                std::int32_t right) {
  Node& n = nodes_.at(static_cast<std::size_t>(node));
  n.left = left;
  n.right = right;
}

void DecisionTree::check_structure() const {
  if (nodes_.empty()) throw TreeError("tree has no nodes");
  std::vector<int> parents(nodes_.size(), 0);
  const auto count = static_cast<std::int32_t>(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.is_leaf()) {
      if (n.leaf < 0 || static_cast<std::size_t>(n.leaf) >= num_leaves()) {
        throw TreeError("leaf index out of range");
      }
      continue;
    }
    for (std::int32_t child : {n.left, n.right}) {
      if (child <= static_cast<std::int32_t>(i) || child >= count) {
        throw TreeError("child index out of range at node " +
                        std::to_string(i));
      }
      ++parents[static_cast<std::size_t>(child)];
    }
  }
  if (parents[0] != 0) throw TreeError("root has a parent");
  for (std::size_t i = 1; i < parents.size(); ++i) {
    if (parents[i] != 1) throw TreeError("node without exactly one parent");
  }
}

bool DecisionTree::operator==(const DecisionTree& other) const {
  if (output_dim_ != other.output_dim_ || nodes_.size() != other.nodes_.size() ||
      leaf_values_ != other.leaf_values_) {
    return false;
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& a = nodes_[i];
    const Node& b = other.nodes_[i];
    if (a.feature != b.feature || a.kind != b.kind || a.value != b.value ||
        a.left != b.left || a.right != b.right || a.leaf != b.leaf ||
        a.gain != b.gain) {
      return false;
    }
  }
  return true;
}

double sum_squared_error(const Matrix& targets) {
  if (targets.rows() == 0) return 0.0;
  const Eigen::RowVectorXd mean = targets.colwise().mean();
  return (targets.rowwise() - mean).squaredNorm();
}

double split_gain(const Matrix& node, const Matrix& left, const Matrix& right) {
  if (left.rows() == 0 || right.rows() == 0) {
    throw TreeError("split_gain: empty child");
  }
  if (left.rows() + right.rows() != node.rows() ||
      left.cols() != node.cols() || right.cols() != node.cols()) {
    throw TreeError("split_gain: children do not partition the node");
  }
  return sum_squared_error(node) - sum_squared_error(left) -
         sum_squared_error(right);
}

namespace {

// Candidate thresholds for one numerical feature plus each sample's bin.
// bin(x) = number of thresholds strictly below x, so x <= thresholds[j]
// exactly when bin(x) <= j.
struct NumericBins {
  std::vector<double> thresholds;
  std::vector<std::int32_t> bin_of_sample;
};

double midpoint(double lo, double hi) {
  double mid = lo + (hi - lo) / 2.0;
  if (!(mid < hi)) mid = lo;
  return mid;
}

NumericBins make_bins(std::span<const FeatureVector> states,
                      std::size_t feature, int num_bins) {
  const std::size_t n = states.size();
  std::vector<double> sorted(n);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = states[i].values[feature];
  std::sort(sorted.begin(), sorted.end());

  std::vector<double> distinct(sorted);
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  NumericBins bins;
  if (distinct.size() <= static_cast<std::size_t>(num_bins)) {
    for (std::size_t j = 0; j + 1 < distinct.size(); ++j) {
      bins.thresholds.push_back(midpoint(distinct[j], distinct[j + 1]));
    }
  } else {
    // Quantile edges: each edge starts a new bin at a sample-rank quantile.
    for (int b = 1; b < num_bins; ++b) {
      const std::size_t rank = static_cast<std::size_t>(b) * n /
                               static_cast<std::size_t>(num_bins);
      const double edge = sorted[rank];
      auto it = std::lower_bound(distinct.begin(), distinct.end(), edge);
      if (it == distinct.begin()) continue;
      const double t = midpoint(*(it - 1), *it);
      if (bins.thresholds.empty() || t > bins.thresholds.back()) {
        bins.thresholds.push_back(t);
      }
    }
  }
  bins.bin_of_sample.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = states[i].values[feature];
    bins.bin_of_sample[i] = static_cast<std::int32_t>(
        std::lower_bound(bins.thresholds.begin(), bins.thresholds.end(), v) -
        bins.thresholds.begin());
  }
  return bins;
}

struct Candidate {
  bool found = false;
  double gain = 0.0;
  SplitCondition cond;
};

class TreeBuilder {
 public:
  TreeBuilder(const FeatureSchema& schema, std::span<const FeatureVector> states,
              const Matrix& targets, const TreeFitConfig& cfg)
      : schema_(schema),
        states_(states),
        targets_(targets),
        cfg_(cfg),
        dim_(static_cast<std::size_t>(cfg.output_dim)),
        tree_(cfg.output_dim) {
    bins_.resize(schema.size());
    for (std::size_t f = 0; f < schema.size(); ++f) {
      if (!schema.is_categorical(f)) {
        bins_[f] = make_bins(states, f, cfg.num_bins);
      }
    }
  }

  DecisionTree build() {
    std::vector<std::size_t> all(states_.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    grow(all, 0);
    return std::move(tree_);
  }

 private:
  // sum of rows and the quantity |S|^2 / n used by the gain identity
  // SSE(S) = sum |g|^2 - |sum g|^2 / n.
  double score(const double* sum, double n) const {
    double s = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) s += sum[d] * sum[d];
    return s / n;
  }

  std::int32_t grow(std::vector<std::size_t>& idx, int depth) {
    const double n = static_cast<double>(idx.size());
    std::vector<double> sum(dim_, 0.0);
    for (std::size_t i : idx) {
      for (std::size_t d = 0; d < dim_; ++d) sum[d] += targets_(i, d);
    }
    std::vector<double> mean(dim_);
    for (std::size_t d = 0; d < dim_; ++d) mean[d] = sum[d] / n;
    double sse = 0.0;
    for (std::size_t i : idx) {
      for (std::size_t d = 0; d < dim_; ++d) {
        const double r = targets_(i, d) - mean[d];
        sse += r * r;
      }
    }

    Candidate best;
    if (depth < cfg_.max_depth &&
        idx.size() >= 2 * static_cast<std::size_t>(cfg_.min_samples_leaf) &&
        sse > 0.0) {
      const double parent = score(sum.data(), n);
      for (std::size_t f = 0; f < schema_.size(); ++f) {
        if (schema_.is_categorical(f)) {
          search_categorical(idx, f, sum, parent, best);
        } else {
          search_numeric(idx, f, sum, parent, best);
        }
      }
      // Gains below rounding noise of the node's own SSE count as zero.
      if (best.found && !(best.gain > 1e-12 * sse)) best.found = false;
    }

    if (!best.found) return tree_.append_leaf(mean);

    const std::int32_t node = tree_.append_split(best.cond, best.gain);
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    left.reserve(idx.size());
    right.reserve(idx.size());
    for (std::size_t i : idx) {
      (best.cond.goes_left(states_[i]) ? left : right).push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();
    const std::int32_t l = grow(left, depth + 1);
    const std::int32_t r = grow(right, depth + 1);
    tree_.set_children(node, l, r);
    return node;
  }

  void consider(double gain, const SplitCondition& cond, Candidate& best) {
    if (!best.found || gain > best.gain) {
      best.found = true;
      best.gain = gain;
      best.cond = cond;
    }
  }

  void search_numeric(const std::vector<std::size_t>& idx, std::size_t f,
                      const std::vector<double>& total, double parent,
                      Candidate& best) {
    const NumericBins& bins = bins_[f];
    const std::size_t num_thresholds = bins.thresholds.size();
    if (num_thresholds == 0) return;
    const std::size_t nb = num_thresholds + 1;
    hist_sum_.assign(nb * dim_, 0.0);
    hist_count_.assign(nb, 0);
    for (std::size_t i : idx) {
      const auto b = static_cast<std::size_t>(bins.bin_of_sample[i]);
      ++hist_count_[b];
      double* row = &hist_sum_[b * dim_];
      for (std::size_t d = 0; d < dim_; ++d) row[d] += targets_(i, d);
    }
    const std::size_t n = idx.size();
    const auto min_leaf = static_cast<std::size_t>(cfg_.min_samples_leaf);
    std::vector<double> left(dim_, 0.0);
    std::vector<double> right(dim_);
    std::size_t n_left = 0;
    for (std::size_t j = 0; j < num_thresholds; ++j) {
      const std::size_t c = hist_count_[j];
      if (c == 0) continue;
      n_left += c;
      for (std::size_t d = 0; d < dim_; ++d) left[d] += hist_sum_[j * dim_ + d];
      if (n_left >= n) break;
      if (n_left < min_leaf || n - n_left < min_leaf) continue;
      for (std::size_t d = 0; d < dim_; ++d) right[d] = total[d] - left[d];
      const double gain = score(left.data(), static_cast<double>(n_left)) +
                          score(right.data(), static_cast<double>(n - n_left)) -
                          parent;
      consider(gain, {f, SplitKind::kNumericLE, bins.thresholds[j]}, best);
    }
  }

  void search_categorical(const std::vector<std::size_t>& idx, std::size_t f,
                          const std::vector<double>& total, double parent,
                          Candidate& best) {
    order_.assign(idx.begin(), idx.end());
    std::sort(order_.begin(), order_.end(),
              [&](std::size_t a, std::size_t b) {
                const double ta = states_[a].values[f];
                const double tb = states_[b].values[f];
                return ta < tb || (ta == tb && a < b);
              });
    const std::size_t n = idx.size();
    const auto min_leaf = static_cast<std::size_t>(cfg_.min_samples_leaf);
    std::vector<double> in(dim_);
    std::vector<double> out(dim_);
    std::size_t start = 0;
    while (start < n) {
      const double token = states_[order_[start]].values[f];
      std::size_t end = start;
      std::fill(in.begin(), in.end(), 0.0);
      while (end < n && states_[order_[end]].values[f] == token) {
        for (std::size_t d = 0; d < dim_; ++d) in[d] += targets_(order_[end], d);
        ++end;
      }
      const std::size_t n_in = end - start;
      if (n_in < n && n_in >= min_leaf && n - n_in >= min_leaf) {
        for (std::size_t d = 0; d < dim_; ++d) out[d] = total[d] - in[d];
        const double gain = score(in.data(), static_cast<double>(n_in)) +
                            score(out.data(), static_cast<double>(n - n_in)) -
                            parent;
        consider(gain, {f, SplitKind::kCategoricalEq, token}, best);
      }
      start = end;
    }
  }

  const FeatureSchema& schema_;
  std::span<const FeatureVector> states_;
  const Matrix& targets_;
  const TreeFitConfig& cfg_;
  std::size_t dim_;
  DecisionTree tree_;
  std::vector<NumericBins> bins_;
  std::vector<double> hist_sum_;
  std::vector<std::size_t> hist_count_;
  std::vector<std::size_t> order_;
};

}  // namespace

DecisionTree fit_tree(const FeatureSchema& schema,
                      std::span<const FeatureVector> states,
                      const Matrix& targets, const TreeFitConfig& cfg) {
  cfg.validate();
  if (states.empty()) throw TreeError("fit_tree: empty batch");
  if (static_cast<std::size_t>(targets.rows()) != states.size()) {
    throw TreeError("fit_tree: " + std::to_string(targets.rows()) +
                    " targets for " + std::to_string(states.size()) +
                    " states");
  }
  if (targets.cols() != cfg.output_dim) {
    throw TreeError("fit_tree: target dimension " +
                    std::to_string(targets.cols()) + " != output_dim " +
                    std::to_string(cfg.output_dim));
  }
  if (!targets.allFinite()) throw TreeError("fit_tree: non-finite gradient");
  for (const auto& x : states) {
    if (x.size() != schema.size()) {
      throw TreeError("fit_tree: state does not conform to schema");
    }
  }
  return TreeBuilder(schema, states, targets, cfg).build();
}

}  // namespace gbrl
