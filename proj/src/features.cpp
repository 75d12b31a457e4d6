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

#include "gbrl/features.hpp"

#include <cmath>
#include <string>

namespace gbrl {

FeatureSchema::FeatureSchema(const FeatureSchema& other) {
  std::shared_lock lock(other.mutex_);
  entries_ = other.entries_;
  vocabularies_ = other.vocabularies_;
}

std::size_t FeatureSchema::add_numerical(std::string name) {
  std::unique_lock lock(mutex_);
  entries_.push_back({std::move(name), FeatureKind::kNumerical, -1});
  return entries_.size() - 1;
}

std::size_t FeatureSchema::add_categorical(std::string name,
                                           std::string vocabulary) {
  std::unique_lock lock(mutex_);
  if (vocabulary.empty()) vocabulary = name;
  int v = -1;
  for (std::size_t i = 0; i < vocabularies_.size(); ++i) {
    if (vocabularies_[i].name == vocabulary) v = static_cast<int>(i);
  }
  if (v < 0) {
    vocabularies_.push_back({std::move(vocabulary), {}, {}});
    v = static_cast<int>(vocabularies_.size() - 1);
  }
  entries_.push_back({std::move(name), FeatureKind::kCategorical, v});
  return entries_.size() - 1;
}

const FeatureSchema::Entry& FeatureSchema::entry(std::size_t slot) const {
  if (slot >= entries_.size()) {
    throw SchemaError("feature slot " + std::to_string(slot) +
                      " out of range (schema has " +
                      std::to_string(entries_.size()) + ")");
  }
  return entries_[slot];
}

const FeatureSchema::Vocabulary& FeatureSchema::vocabulary_of(
    std::size_t slot) const {
  const Entry& e = entry(slot);
  if (e.kind != FeatureKind::kCategorical) {
    throw SchemaError("feature '" + e.name + "' is numerical");
  }
  return vocabularies_[static_cast<std::size_t>(e.vocabulary)];
}

TokenId FeatureSchema::intern(std::size_t slot, std::string_view token) {
  {
    std::shared_lock lock(mutex_);
    const Vocabulary& vocab = vocabulary_of(slot);
    auto it = vocab.ids.find(std::string(token));
    if (it != vocab.ids.end()) return it->second;
  }
  std::unique_lock lock(mutex_);
  auto& vocab =
      vocabularies_[static_cast<std::size_t>(entries_[slot].vocabulary)];
  auto [it, inserted] = vocab.ids.try_emplace(
      std::string(token), static_cast<TokenId>(vocab.tokens.size()));
  if (inserted) vocab.tokens.emplace_back(token);
  return it->second;
}

std::optional<TokenId> FeatureSchema::find(std::size_t slot,
                                           std::string_view token) const {
  std::shared_lock lock(mutex_);
  const Vocabulary& vocab = vocabulary_of(slot);
  auto it = vocab.ids.find(std::string(token));
  if (it == vocab.ids.end()) return std::nullopt;
  return it->second;
}

std::string FeatureSchema::token(std::size_t slot, TokenId id) const {
  std::shared_lock lock(mutex_);
  const Vocabulary& vocab = vocabulary_of(slot);
  if (id < 0 || static_cast<std::size_t>(id) >= vocab.tokens.size()) {
    throw SchemaError("unknown token id " + std::to_string(id));
  }
  return vocab.tokens[static_cast<std::size_t>(id)];
}

std::size_t FeatureSchema::vocabulary_size(std::size_t slot) const {
  std::shared_lock lock(mutex_);
  return vocabulary_of(slot).tokens.size();
}

std::vector<std::string> FeatureSchema::vocabulary_tokens(std::size_t v) const {
  std::shared_lock lock(mutex_);
  return vocabularies_.at(v).tokens;
}

void FeatureSchema::restore_vocabulary(std::size_t v,
                                       const std::vector<std::string>& tokens) {
  std::unique_lock lock(mutex_);
  Vocabulary& vocab = vocabularies_.at(v);
  vocab.tokens.clear();
  vocab.ids.clear();
  for (const auto& t : tokens) {
    auto [it, inserted] =
        vocab.ids.try_emplace(t, static_cast<TokenId>(vocab.tokens.size()));
    if (!inserted) throw SchemaError("duplicate token '" + t + "'");
    vocab.tokens.push_back(t);
  }
}

bool FeatureSchema::same_layout(const FeatureSchema& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Entry& a = entries_[i];
    const Entry& b = other.entries_[i];
    if (a.name != b.name || a.kind != b.kind || a.vocabulary != b.vocabulary) {
      return false;
    }
  }
  return true;
}

void FeatureSchema::validate(const FeatureVector& x) const {
  if (x.size() != entries_.size()) {
    throw SchemaError("feature vector has " + std::to_string(x.size()) +
                      " values, schema expects " +
                      std::to_string(entries_.size()));
  }
  std::shared_lock lock(mutex_);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const double v = x.values[i];
    if (entries_[i].kind == FeatureKind::kNumerical) {
      if (!std::isfinite(v)) {
        throw SchemaError("non-finite value in numerical feature '" +
                          entries_[i].name + "'");
      }
    } else {
      const auto& vocab =
          vocabularies_[static_cast<std::size_t>(entries_[i].vocabulary)];
      if (!(v >= 0.0) || v != std::floor(v) ||
          v >= static_cast<double>(vocab.tokens.size())) {
        throw SchemaError("invalid token id in categorical feature '" +
                          entries_[i].name + "'");
      }
    }
  }
}

std::string_view direction_name(Direction d) {
  switch (d) {
    case Direction::kRight: return "right";
    case Direction::kDown: return "down";
    case Direction::kLeft: return "left";
    case Direction::kUp: return "up";
  }
  return "right";
}

std::shared_ptr<FeatureSchema> make_grid_schema() {
  auto schema = std::make_shared<FeatureSchema>();
  for (int row = 0; row < kGridViewSize; ++row) {
    for (int col = 0; col < kGridViewSize; ++col) {
      schema->add_categorical(
          "cell_" + std::to_string(row) + "_" + std::to_string(col), "tile");
    }
  }
  schema->add_categorical("direction");
  schema->add_categorical("mission");
  return schema;
}

FeatureVector encode_grid_observation(FeatureSchema& schema,
                                      const GridView& view,
                                      Direction direction,
                                      std::string_view mission) {
  if (schema.size() != kGridFeatureCount) {
    throw SchemaError("grid observations need a 51-slot grid schema");
  }
  FeatureVector x;
  x.values.reserve(kGridFeatureCount);
  std::size_t slot = 0;
  for (const auto& row : view) {
    for (const Tile& tile : row) {
      std::string token = tile.type;
      token += ':';
      token += tile.color;
      token += ':';
      token += std::to_string(tile.state);
      x.values.push_back(static_cast<double>(schema.intern(slot++, token)));
    }
  }
  x.values.push_back(
      static_cast<double>(schema.intern(slot++, direction_name(direction))));
  x.values.push_back(static_cast<double>(schema.intern(slot++, mission)));
  return x;
}

}  // namespace gbrl
