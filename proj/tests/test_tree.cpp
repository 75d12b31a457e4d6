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
#include <random>

#include "gbrl/tree.hpp"
#include "oracles.hpp"

namespace gbrl {
namespace {

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

TreeFitConfig config(int depth, int dim = 1) {
  TreeFitConfig cfg;
  cfg.max_depth = depth;
  cfg.output_dim = dim;
  return cfg;
}

// Leaf id -> mean of the training targets routed there, computed by replay.
void expect_leaf_means(const DecisionTree& tree,
                       const std::vector<FeatureVector>& xs,
                       const Matrix& targets) {
  const auto dim = static_cast<std::size_t>(targets.cols());
  std::vector<std::vector<double>> sums(tree.num_leaves(),
                                        std::vector<double>(dim, 0.0));
  std::vector<int> counts(tree.num_leaves(), 0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto leaf = tree.leaf_index(xs[i]);
    ++counts[leaf];
    for (std::size_t d = 0; d < dim; ++d) {
      sums[leaf][d] += targets(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d));
    }
  }
  for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
    ASSERT_GT(counts[l], 0) << "empty leaf " << l;
    for (std::size_t d = 0; d < dim; ++d) {
      const double mean = sums[l][d] / counts[l];
      EXPECT_LE(std::abs(tree.leaf_value(l)[d] - mean),
                1e-12 * std::max(1.0, std::abs(mean)));
    }
  }
}

double training_sse(const DecisionTree& tree, const std::vector<FeatureVector>& xs,
                    const Matrix& targets) {
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto p = tree.predict(xs[i]);
    for (Eigen::Index d = 0; d < targets.cols(); ++d) {
      const double r = targets(static_cast<Eigen::Index>(i), d) - p[static_cast<std::size_t>(d)];
      s += r * r;
    }
  }
  return s;
}

TEST(FitTree, ConstantTargetsGiveSingleLeaf) {
  FeatureSchema schema;
  schema.add_numerical("x");
  std::vector<FeatureVector> xs = {{{0.0}}, {{1.0}}, {{2.0}}};
  Matrix y(3, 2);
  y << 1.0, 2.0, 1.0, 2.0, 1.0, 2.0;
  const auto tree = fit_tree(schema, xs, y, config(4, 2));
  EXPECT_EQ(tree.num_nodes(), 1u);
  EXPECT_EQ(tree.num_splits(), 0u);
  EXPECT_EQ(tree.leaf_value(0)[0], 1.0);
  EXPECT_EQ(tree.leaf_value(0)[1], 2.0);
}

TEST(FitTree, NumericStepFunction) {
  FeatureSchema schema;
  schema.add_numerical("x");
  std::vector<FeatureVector> xs = {{{0.0}}, {{0.0}}, {{1.0}}, {{1.0}}};
  const Matrix y = column({-1, -1, 1, 1});
  const auto tree = fit_tree(schema, xs, y, config(1));
  const auto split = tree.split(0);
  ASSERT_TRUE(split.has_value());
  EXPECT_EQ(split->feature, 0u);
  EXPECT_EQ(split->kind, SplitKind::kNumericLE);
  EXPECT_DOUBLE_EQ(split->value, 0.5);
  EXPECT_DOUBLE_EQ(tree.nodes()[0].gain, 4.0);
  EXPECT_EQ(predict_tree(tree, {{0.0}})[0], -1.0);
  EXPECT_EQ(predict_tree(tree, {{1.0}})[0], 1.0);
  // The brute-force search agrees that this is the best split.
  EXPECT_DOUBLE_EQ(oracle::best_split(schema, xs, y).gain, 4.0);
}

TEST(FitTree, CategoricalEqualitySplit) {
  FeatureSchema schema;
  const auto c = schema.add_categorical("c");
  const double a = static_cast<double>(schema.intern(c, "a"));
  const double b = static_cast<double>(schema.intern(c, "b"));
  std::vector<FeatureVector> xs = {{{a}}, {{a}}, {{b}}};
  const Matrix y = column({0, 0, 3});
  const auto tree = fit_tree(schema, xs, y, config(4));
  ASSERT_EQ(tree.num_splits(), 1u);
  const auto split = *tree.split(0);
  EXPECT_EQ(split.kind, SplitKind::kCategoricalEq);
  // Both one-vs-rest splits give the same partition; the smaller id wins.
  EXPECT_EQ(split.value, a);
  EXPECT_EQ(predict_tree(tree, {{a}})[0], 0.0);
  EXPECT_EQ(predict_tree(tree, {{b}})[0], 3.0);
  EXPECT_DOUBLE_EQ(tree.nodes()[0].gain, oracle::best_split(schema, xs, y).gain);
}

TEST(FitTree, UnseenTokenTakesTheElseBranch) {
  FeatureSchema schema;
  const auto c = schema.add_categorical("c");
  const double a = static_cast<double>(schema.intern(c, "a"));
  const double b = static_cast<double>(schema.intern(c, "b"));
  std::vector<FeatureVector> xs = {{{a}}, {{b}}};
  const auto tree = fit_tree(schema, xs, column({5, -5}), config(1));
  const double fresh = static_cast<double>(schema.intern(c, "new"));
  EXPECT_EQ(predict_tree(tree, {{fresh}})[0], -5.0);
}

TEST(FitTree, TieBreaksOnLowestFeature) {
  FeatureSchema schema;
  schema.add_numerical("x0");
  schema.add_numerical("x1");
  std::vector<FeatureVector> xs = {{{0, 0}}, {{1, 1}}};
  const auto tree = fit_tree(schema, xs, column({0, 1}), config(1));
  EXPECT_EQ(tree.split(0)->feature, 0u);
}

TEST(FitTree, Errors) {
  FeatureSchema schema;
  schema.add_numerical("x");
  std::vector<FeatureVector> none;
  EXPECT_THROW(fit_tree(schema, none, Matrix(0, 1), config(1)), TreeError);
  std::vector<FeatureVector> xs = {{{0.0}}, {{1.0}}};
  EXPECT_THROW(fit_tree(schema, xs, column({0, std::nan("")}), config(1)), TreeError);
  EXPECT_THROW(fit_tree(schema, xs, column({0, INFINITY}), config(1)), TreeError);
  EXPECT_THROW(fit_tree(schema, xs, column({0}), config(1)), TreeError);
  EXPECT_THROW(fit_tree(schema, xs, Matrix::Zero(2, 2), config(1)), TreeError);
  TreeFitConfig bad = config(0);
  EXPECT_THROW(fit_tree(schema, xs, column({0, 1}), bad), TreeError);
  bad = config(1);
  bad.num_bins = 1;
  EXPECT_THROW(fit_tree(schema, xs, column({0, 1}), bad), TreeError);
}

TEST(FitTree, MinSamplesLeafIsRespected) {
  FeatureSchema schema;
  schema.add_numerical("x");
  std::vector<FeatureVector> xs;
  for (int i = 0; i < 10; ++i) xs.push_back({{static_cast<double>(i)}});
  const Matrix y = column({9, 0, 0, 0, 0, 0, 0, 0, 0, 0});
  TreeFitConfig cfg = config(3);
  cfg.min_samples_leaf = 3;
  const auto tree = fit_tree(schema, xs, y, cfg);
  std::vector<int> counts(tree.num_leaves(), 0);
  for (const auto& x : xs) ++counts[tree.leaf_index(x)];
  for (int c : counts) EXPECT_GE(c, 3);
}

TEST(FitTree, QuantileBinsWhenManyDistinctValues) {
  FeatureSchema schema;
  schema.add_numerical("x");
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  std::vector<FeatureVector> xs;
  Matrix y(500, 1);
  for (int i = 0; i < 500; ++i) {
    const double x = normal(rng);
    xs.push_back({{x}});
    y(i, 0) = x > 0.3 ? 1.0 : -1.0;
  }
  TreeFitConfig cfg = config(1);
  cfg.num_bins = 16;
  const auto tree = fit_tree(schema, xs, y, cfg);
  ASSERT_EQ(tree.num_splits(), 1u);
  // 16 quantile bins put a threshold within a couple of bin widths.
  EXPECT_NEAR(tree.split(0)->value, 0.3, 0.25);
  expect_leaf_means(tree, xs, y);
}

TEST(FitTree, Depth1MatchesExhaustiveSearchOnRandomBatches) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto schema = oracle::mixed_schema(2, 2, 4);
    const std::size_t n = 2 + rng() % 40;
    auto xs = oracle::random_states(*schema, n, 4, rng);
    Matrix y = Matrix::NullaryExpr(static_cast<Eigen::Index>(n), 3, [&] {
      return std::normal_distribution<double>()(rng);
    });
    const auto tree = fit_tree(*schema, xs, y, config(1, 3));
    const auto best = oracle::best_split(*schema, xs, y);
    ASSERT_TRUE(best.found);
    ASSERT_EQ(tree.num_splits(), 1u);
    EXPECT_NEAR(tree.nodes()[0].gain, best.gain, 1e-9 * std::max(1.0, best.gain));
  }
}

TEST(FitTree, LeafMeansMonotoneDepthAndDeterminism) {
  std::mt19937_64 rng(5);
  auto schema = oracle::mixed_schema(3, 2, 5);
  auto xs = oracle::random_states(*schema, 200, 5, rng);
  Matrix y = Matrix::NullaryExpr(200, 2, [&] {
    return std::normal_distribution<double>()(rng);
  });
  double previous = std::numeric_limits<double>::infinity();
  for (int depth = 1; depth <= 6; ++depth) {
    const auto tree = fit_tree(*schema, xs, y, config(depth, 2));
    EXPECT_LE(tree.depth(), depth);
    expect_leaf_means(tree, xs, y);
    const double sse = training_sse(tree, xs, y);
    EXPECT_LE(sse, previous + 1e-9);
    previous = sse;
    EXPECT_EQ(tree, fit_tree(*schema, xs, y, config(depth, 2)));
  }
}

TEST(SplitGain, PerfectSplit) {
  const Matrix node = column({-1, -1, 1, 1});
  EXPECT_DOUBLE_EQ(split_gain(node, column({-1, -1}), column({1, 1})), 4.0);
}

TEST(SplitGain, HalvesWithParentMeanGiveZero) {
  const Matrix node = column({-1, 1, -1, 1});
  EXPECT_NEAR(split_gain(node, column({-1, 1}), column({-1, 1})), 0.0, 1e-15);
}

TEST(SplitGain, NonNegativeAndEmptyChildThrows) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 100; ++t) {
    Matrix node = Matrix::NullaryExpr(10, 2, [&] { return normal(rng); });
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng() % 9);
    EXPECT_GE(split_gain(node, node.topRows(k), node.bottomRows(10 - k)), -1e-12);
  }
  EXPECT_THROW(split_gain(column({1, 2}), Matrix(0, 1), column({1, 2})), TreeError);
}

}  // namespace
}  // namespace gbrl
