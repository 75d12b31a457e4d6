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

#include "gbrl/ensemble.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <utility>

namespace gbrl {

std::string OutputLayout::describe() const {
  if (is_discrete()) {
    return "discrete(" + std::to_string(action_dim) + ")";
  }
  return "gaussian(" + std::to_string(action_dim) + ")";
}

TreeEnsemble::TreeEnsemble(std::vector<double> theta0,
                           std::vector<double> learning_rates)
    : theta0_(std::move(theta0)) {
  if (theta0_.empty()) throw EnsembleError("ensemble needs output_dim >= 1");
  set_learning_rates(std::move(learning_rates));
}

void TreeEnsemble::set_learning_rates(std::vector<double> lr) {
  if (lr.size() != theta0_.size()) {
    throw EnsembleError("learning-rate vector has " +
                        std::to_string(lr.size()) + " entries, expected " +
                        std::to_string(theta0_.size()));
  }
  for (double r : lr) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw EnsembleError("learning rates must be finite and > 0");
    }
  }
  lr_ = std::move(lr);
}

void TreeEnsemble::add_tree(DecisionTree tree) {
  add_tree(std::move(tree), lr_);
}

void TreeEnsemble::add_tree(DecisionTree tree, std::vector<double> lr) {
  if (tree.output_dim() != output_dim()) {
    throw EnsembleError("tree output_dim " + std::to_string(tree.output_dim()) +
                        " != ensemble output_dim " +
                        std::to_string(output_dim()));
  }
  if (lr.size() != theta0_.size()) {
    throw EnsembleError("tree learning-rate vector has wrong length");
  }
  pack(tree, lr);
  trees_.push_back(std::move(tree));
  tree_lr_.insert(tree_lr_.end(), lr.begin(), lr.end());
}

void TreeEnsemble::pack(const DecisionTree& tree, std::span<const double> lr) {
  const auto base = static_cast<std::int32_t>(packed_.size());
  const auto dim = static_cast<std::size_t>(output_dim());
  packed_roots_.push_back(static_cast<std::uint32_t>(base));
  const auto& nodes = tree.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    PackedNode p{};
    if (n.is_leaf()) {
      p.value = 0.0;
      p.feature = -1;
      p.next = static_cast<std::int32_t>(scaled_leaves_.size());
      const auto leaf = tree.leaf_value(static_cast<std::size_t>(n.leaf));
      for (std::size_t d = 0; d < dim; ++d) {
        scaled_leaves_.push_back(lr[d] * leaf[d]);
      }
    } else {
      if (n.left != static_cast<std::int32_t>(i) + 1) {
        throw EnsembleError("tree nodes are not in pre-order");
      }
      p.value = n.value;
      p.feature = (n.feature << 1) | static_cast<std::int32_t>(n.kind);
      p.next = base + n.right;
    }
    packed_.push_back(p);
  }
}

std::size_t TreeEnsemble::num_nodes() const {
  std::size_t n = 0;
  for (const auto& t : trees_) n += t.num_nodes();
  return n;
}

void TreeEnsemble::accumulate_tree(std::size_t i, const FeatureVector& x,
                                   std::span<double> out) const {
  const PackedNode* nodes = packed_.data();
  const double* values = x.values.data();
  std::size_t k = packed_roots_[i];
  while (nodes[k].feature >= 0) {
    const PackedNode& n = nodes[k];
    const double v = values[n.feature >> 1];
    const bool left = (n.feature & 1) ? v == n.value : v <= n.value;
    k = left ? k + 1 : static_cast<std::size_t>(n.next);
  }
  const double* leaf = scaled_leaves_.data() + nodes[k].next;
  for (std::size_t d = 0; d < out.size(); ++d) out[d] += leaf[d];
}

void TreeEnsemble::accumulate(const FeatureVector& x,
                              std::span<double> out) const {
  for (std::size_t i = 0; i < trees_.size(); ++i) accumulate_tree(i, x, out);
}

std::vector<double> per_dim_learning_rates(const OutputLayout& layout,
                                           const LearningRates& rates) {
  std::vector<double> lr(static_cast<std::size_t>(layout.output_dim()),
                         rates.actor);
  for (int d = 0; d < layout.output_dim(); ++d) {
    if (layout.is_log_std(d)) lr[static_cast<std::size_t>(d)] = rates.log_std;
  }
  lr.back() = rates.critic;
  return lr;
}

ActorCriticEnsemble::ActorCriticEnsemble(OutputLayout layout,
                                         std::shared_ptr<FeatureSchema> schema,
                                         LearningRates rates,
                                         EnsembleMode mode,
                                         double log_std_init)
    : layout_(layout), schema_(std::move(schema)), rates_(rates), mode_(mode) {
  if (!schema_) throw EnsembleError("ensemble needs a feature schema");
  if (layout_.action_dim < 1) throw EnsembleError("action_dim must be >= 1");
  std::vector<double> theta0(static_cast<std::size_t>(layout_.output_dim()),
                             0.0);
  for (int d = 0; d < layout_.output_dim(); ++d) {
    if (layout_.is_log_std(d)) {
      theta0[static_cast<std::size_t>(d)] = log_std_init;
    }
  }
  std::vector<double> lr = per_dim_learning_rates(layout_, rates_);
  if (mode_ == EnsembleMode::kShared) {
    heads_.emplace_back(std::move(theta0), std::move(lr));
  } else {
    const auto p = static_cast<std::size_t>(layout_.policy_dim());
    heads_.emplace_back(std::vector<double>(theta0.begin(), theta0.begin() + p),
                        std::vector<double>(lr.begin(), lr.begin() + p));
    heads_.emplace_back(std::vector<double>{theta0.back()},
                        std::vector<double>{lr.back()});
  }
}

std::vector<double> ActorCriticEnsemble::theta0() const {
  std::vector<double> out;
  for (const auto& h : heads_) {
    out.insert(out.end(), h.theta0().begin(), h.theta0().end());
  }
  return out;
}

void ActorCriticEnsemble::set_learning_rates(const LearningRates& rates) {
  std::vector<double> lr = per_dim_learning_rates(layout_, rates);
  if (mode_ == EnsembleMode::kShared) {
    heads_[0].set_learning_rates(lr);
  } else {
    const auto p = static_cast<std::size_t>(layout_.policy_dim());
    heads_[0].set_learning_rates(
        std::vector<double>(lr.begin(), lr.begin() + p));
    heads_[1].set_learning_rates({lr.back()});
  }
  rates_ = rates;
}

void ActorCriticEnsemble::predict_into(const FeatureVector& x,
                                       std::span<double> theta) const {
  std::size_t offset = 0;
  for (const auto& h : heads_) {
    auto out = theta.subspan(offset, static_cast<std::size_t>(h.output_dim()));
    std::copy(h.theta0().begin(), h.theta0().end(), out.begin());
    h.accumulate(x, out);
    offset += out.size();
  }
}

PolicyParams ActorCriticEnsemble::predict(const FeatureVector& x) const {
  PolicyParams params(layout_, std::vector<double>(
                                   static_cast<std::size_t>(output_dim())));
  predict_into(x, params.theta);
  return params;
}

Matrix ActorCriticEnsemble::predict_matrix(
    std::span<const FeatureVector> xs) const {
  const auto n = static_cast<Eigen::Index>(xs.size());
  Matrix theta(n, output_dim());
  Eigen::Index offset = 0;
  for (const auto& h : heads_) {
    const int dim = h.output_dim();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int d = 0; d < dim; ++d) {
        theta(i, offset + d) = h.theta0()[static_cast<std::size_t>(d)];
      }
    }
    for (std::size_t t = 0; t < h.num_trees(); ++t) {
      for (Eigen::Index i = 0; i < n; ++i) {
        h.accumulate_tree(
            t, xs[static_cast<std::size_t>(i)],
            std::span<double>(theta.row(i).data() + offset,
                              static_cast<std::size_t>(dim)));
      }
    }
    offset += dim;
  }
  return theta;
}

std::vector<PolicyParams> ActorCriticEnsemble::predict_batch(
    std::span<const FeatureVector> xs) const {
  const Matrix theta = predict_matrix(xs);
  std::vector<PolicyParams> out;
  out.reserve(xs.size());
  for (Eigen::Index i = 0; i < theta.rows(); ++i) {
    out.emplace_back(layout_, std::vector<double>(theta.row(i).begin(),
                                                  theta.row(i).end()));
  }
  return out;
}

void ActorCriticEnsemble::add_tree(DecisionTree tree) {
  if (mode_ != EnsembleMode::kShared) {
    throw EnsembleError("add_tree needs a shared ensemble; use add_trees");
  }
  heads_[0].add_tree(std::move(tree));
}

void ActorCriticEnsemble::add_trees(DecisionTree actor, DecisionTree critic) {
  if (mode_ != EnsembleMode::kSeparate) {
    throw EnsembleError("add_trees needs a separate-mode ensemble");
  }
  if (actor.output_dim() != heads_[0].output_dim() ||
      critic.output_dim() != heads_[1].output_dim()) {
    throw EnsembleError("actor/critic tree dimension mismatch");
  }
  heads_[0].add_tree(std::move(actor));
  heads_[1].add_tree(std::move(critic));
}

void ActorCriticEnsemble::accumulate_last_iteration(
    const FeatureVector& x, std::span<double> theta) const {
  std::size_t offset = 0;
  for (const auto& h : heads_) {
    const auto dim = static_cast<std::size_t>(h.output_dim());
    if (h.num_trees() > 0) {
      h.accumulate_tree(h.num_trees() - 1, x, theta.subspan(offset, dim));
    }
    offset += dim;
  }
}

std::size_t ActorCriticEnsemble::num_trees() const {
  std::size_t n = 0;
  for (const auto& h : heads_) n += h.num_trees();
  return n;
}

std::size_t ActorCriticEnsemble::num_nodes() const {
  std::size_t n = 0;
  for (const auto& h : heads_) n += h.num_nodes();
  return n;
}

std::vector<double> ActorCriticEnsemble::feature_importance() const {
  std::vector<double> importance(schema_->size(), 0.0);
  for (const auto& h : heads_) {
    for (std::size_t t = 0; t < h.num_trees(); ++t) {
      for (const auto& node : h.tree(t).nodes()) {
        if (!node.is_leaf()) {
          importance[static_cast<std::size_t>(node.feature)] += node.gain;
        }
      }
    }
  }
  return importance;
}

// ---------------------------------------------------------------------------
// Binary model format, little-endian:
//   "GBRLMDL\0" | u32 version | u8 mode | u8 layout kind | u32 action_dim
//   | f64 lr actor, critic, log_std
//   | schema: u32 entries {str name, u8 kind, str vocabulary}
//             u32 vocabularies {str name, u32 count, str tokens...}
//   | u32 heads {u32 dim, f64[dim] theta0, f64[dim] lr, u64 trees
//                {f64[dim] lr, u32 nodes {i32 feature, u8 kind, f64 value,
//                  i32 left, i32 right, i32 leaf, f64 gain},
//                 u32 leaves, f64[leaves*dim]}}
//   | u64 FNV-1a of everything before it
// Reals are written as their IEEE-754 binary64 bit patterns.
namespace {

constexpr char kMagic[8] = {'G', 'B', 'R', 'L', 'M', 'D', 'L', '\0'};

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  template <typename T>
  void uint(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
    }
  }
  void u8(std::uint8_t v) { uint(v); }
  void u32(std::uint32_t v) { uint(v); }
  void i32(std::int32_t v) { uint(static_cast<std::uint32_t>(v)); }
  void u64(std::uint64_t v) { uint(v); }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  void raw(std::string_view s) { out_.append(s); }
  std::string& bytes() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  template <typename T>
  T uint() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i]))
           << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  std::uint8_t u8() { return uint<std::uint8_t>(); }
  std::uint32_t u32() { return uint<std::uint32_t>(); }
  std::int32_t i32() { return static_cast<std::int32_t>(uint<std::uint32_t>()); }
  std::uint64_t u64() { return uint<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string_view raw(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  // Bounds a count read from the stream by the bytes left, so a corrupted
  // length cannot trigger a huge allocation.
  std::size_t count(std::size_t min_bytes_each) {
    const std::uint64_t n = u32();
    if (min_bytes_each > 0 && n > (in_.size() - pos_) / min_bytes_each) {
      throw SerializationError("truncated model stream");
    }
    return static_cast<std::size_t>(n);
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw SerializationError("truncated model stream");
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

void write_tree(Writer& w, const DecisionTree& tree) {
  w.u32(static_cast<std::uint32_t>(tree.num_nodes()));
  for (const auto& n : tree.nodes()) {
    w.i32(n.feature);
    w.u8(static_cast<std::uint8_t>(n.kind));
    w.f64(n.value);
    w.i32(n.left);
    w.i32(n.right);
    w.i32(n.leaf);
    w.f64(n.gain);
  }
  w.u32(static_cast<std::uint32_t>(tree.num_leaves()));
  for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
    for (double v : tree.leaf_value(l)) w.f64(v);
  }
}

DecisionTree read_tree(Reader& r, int dim, std::size_t num_features) {
  struct RawNode {
    std::int32_t feature, left, right, leaf;
    std::uint8_t kind;
    double value, gain;
  };
  const std::size_t num_nodes = r.count(29);
  std::vector<RawNode> raw(num_nodes);
  for (auto& n : raw) {
    n.feature = r.i32();
    n.kind = r.u8();
    n.value = r.f64();
    n.left = r.i32();
    n.right = r.i32();
    n.leaf = r.i32();
    n.gain = r.f64();
  }
  const std::size_t num_leaves = r.count(8 * static_cast<std::size_t>(dim));
  std::vector<double> leaves(num_leaves * static_cast<std::size_t>(dim));
  for (double& v : leaves) v = r.f64();

  DecisionTree tree(dim);
  for (const auto& n : raw) {
    if (n.feature < 0) {
      if (n.leaf < 0 || static_cast<std::size_t>(n.leaf) >= num_leaves) {
        throw SerializationError("leaf index out of range");
      }
      // Leaves are appended in the order they were written, which is the
      // order their leaf ids were assigned.
      const std::int32_t id = tree.append_leaf(std::span<const double>(
          leaves.data() + static_cast<std::size_t>(n.leaf) * dim,
          static_cast<std::size_t>(dim)));
      if (tree.nodes()[static_cast<std::size_t>(id)].leaf != n.leaf) {
        throw SerializationError("leaves out of order");
      }
    } else {
      if (static_cast<std::size_t>(n.feature) >= num_features || n.kind > 1) {
        throw SerializationError("invalid split node");
      }
      const std::int32_t id = tree.append_split(
          {static_cast<std::size_t>(n.feature), static_cast<SplitKind>(n.kind),
           n.value},
          n.gain);
      tree.set_children(id, n.left, n.right);
    }
  }
  if (tree.num_leaves() != num_leaves) {
    throw SerializationError("leaf count mismatch");
  }
  try {
    tree.check_structure();
  } catch (const TreeError& e) {
    throw SerializationError(std::string("corrupt tree: ") + e.what());
  }
  return tree;
}

}  // namespace

std::string ActorCriticEnsemble::serialize() const {
  Writer w;
  w.raw(std::string_view(kMagic, sizeof(kMagic)));
  w.u32(kModelFormatVersion);
  w.u8(static_cast<std::uint8_t>(mode_));
  w.u8(static_cast<std::uint8_t>(layout_.kind));
  w.u32(static_cast<std::uint32_t>(layout_.action_dim));
  w.f64(rates_.actor);
  w.f64(rates_.critic);
  w.f64(rates_.log_std);

  w.u32(static_cast<std::uint32_t>(schema_->size()));
  for (const auto& e : schema_->entries()) {
    w.str(e.name);
    w.u8(static_cast<std::uint8_t>(e.kind));
    w.str(e.vocabulary >= 0
              ? schema_->vocabulary_name(static_cast<std::size_t>(e.vocabulary))
              : std::string());
  }
  w.u32(static_cast<std::uint32_t>(schema_->num_vocabularies()));
  for (std::size_t v = 0; v < schema_->num_vocabularies(); ++v) {
    w.str(schema_->vocabulary_name(v));
    const auto tokens = schema_->vocabulary_tokens(v);
    w.u32(static_cast<std::uint32_t>(tokens.size()));
    for (const auto& t : tokens) w.str(t);
  }

  w.u32(static_cast<std::uint32_t>(heads_.size()));
  for (const auto& h : heads_) {
    w.u32(static_cast<std::uint32_t>(h.output_dim()));
    for (double v : h.theta0()) w.f64(v);
    for (double v : h.learning_rates()) w.f64(v);
    w.u64(h.num_trees());
    for (std::size_t t = 0; t < h.num_trees(); ++t) {
      for (double v : h.tree_learning_rates(t)) w.f64(v);
      write_tree(w, h.tree(t));
    }
  }
  w.u64(fnv1a(w.bytes()));
  return std::move(w.bytes());
}

ActorCriticEnsemble ActorCriticEnsemble::deserialize(std::string_view bytes) {
  if (bytes.size() < sizeof(kMagic) + 4 + 8) {
    throw SerializationError("truncated model stream");
  }
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw SerializationError("not a gbrl model (bad magic)");
  }
  Reader header(bytes.substr(sizeof(kMagic)));
  const std::uint32_t version = header.u32();
  if (version != kModelFormatVersion) {
    throw SerializationError("unsupported model format version " +
                             std::to_string(version) + " (expected " +
                             std::to_string(kModelFormatVersion) + ")");
  }
  const std::string_view body = bytes.substr(0, bytes.size() - 8);
  Reader trailer(bytes.substr(bytes.size() - 8));
  if (trailer.u64() != fnv1a(body)) {
    throw SerializationError("model checksum mismatch");
  }

  Reader r(body.substr(sizeof(kMagic) + 4));
  const std::uint8_t mode = r.u8();
  const std::uint8_t kind = r.u8();
  const std::uint32_t action_dim = r.u32();
  if (mode > 1 || kind > 1 || action_dim == 0 || action_dim > (1u << 20)) {
    throw SerializationError("invalid model header");
  }
  LearningRates rates;
  rates.actor = r.f64();
  rates.critic = r.f64();
  rates.log_std = r.f64();

  auto schema = std::make_shared<FeatureSchema>();
  const std::size_t num_entries = r.count(9);
  for (std::size_t i = 0; i < num_entries; ++i) {
    std::string name = r.str();
    const std::uint8_t fkind = r.u8();
    std::string vocab = r.str();
    if (fkind == static_cast<std::uint8_t>(FeatureKind::kNumerical)) {
      schema->add_numerical(std::move(name));
    } else if (fkind == static_cast<std::uint8_t>(FeatureKind::kCategorical)) {
      schema->add_categorical(std::move(name), std::move(vocab));
    } else {
      throw SerializationError("invalid feature kind");
    }
  }
  const std::size_t num_vocab = r.count(8);
  if (num_vocab != schema->num_vocabularies()) {
    throw SerializationError("vocabulary count mismatch");
  }
  for (std::size_t v = 0; v < num_vocab; ++v) {
    if (r.str() != schema->vocabulary_name(v)) {
      throw SerializationError("vocabulary name mismatch");
    }
    std::vector<std::string> tokens(r.count(4));
    for (auto& t : tokens) t = r.str();
    try {
      schema->restore_vocabulary(v, tokens);
    } catch (const SchemaError& e) {
      throw SerializationError(e.what());
    }
  }

  OutputLayout layout{static_cast<OutputLayout::Kind>(kind),
                      static_cast<int>(action_dim)};
  auto ens = [&] {
    try {
      return ActorCriticEnsemble(layout, schema, rates,
                                 static_cast<EnsembleMode>(mode));
    } catch (const EnsembleError& e) {
      throw SerializationError(e.what());
    }
  }();
  const std::size_t num_heads = r.count(4);
  if (num_heads != ens.heads_.size()) {
    throw SerializationError("head count does not match ensemble mode");
  }
  try {
    for (auto& h : ens.heads_) {
      const auto dim = r.u32();
      if (static_cast<int>(dim) != h.output_dim()) {
        throw SerializationError("head dimension mismatch");
      }
      std::vector<double> theta0(dim);
      std::vector<double> lr(dim);
      for (double& v : theta0) v = r.f64();
      for (double& v : lr) v = r.f64();
      TreeEnsemble head(std::move(theta0), std::move(lr));
      const std::uint64_t num_trees = r.u64();
      for (std::uint64_t t = 0; t < num_trees; ++t) {
        std::vector<double> tree_lr(dim);
        for (double& v : tree_lr) v = r.f64();
        head.add_tree(read_tree(r, static_cast<int>(dim), schema->size()),
                      std::move(tree_lr));
      }
      h = std::move(head);
    }
  } catch (const EnsembleError& e) {
    throw SerializationError(e.what());
  }
  if (!r.done()) throw SerializationError("trailing bytes in model stream");
  if (ens.mode_ == EnsembleMode::kSeparate &&
      ens.heads_[0].num_trees() != ens.heads_[1].num_trees()) {
    throw SerializationError("actor and critic tree counts differ");
  }
  return ens;
}

void ActorCriticEnsemble::save(const std::filesystem::path& path) const {
  const std::string bytes = serialize();
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::ios_base::failure("cannot open " + tmp + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::ios_base::failure("failed writing " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

ActorCriticEnsemble ActorCriticEnsemble::load(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace gbrl
