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

#ifndef GBRL_FEATURES_HPP_
#define GBRL_FEATURES_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gbrl {

enum class FeatureKind : std::uint8_t { kNumerical = 0, kCategorical = 1 };

using TokenId = std::int64_t;

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One observation. Numerical slots hold finite reals; categorical slots hold
// interned token ids stored exactly as doubles.
struct FeatureVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  bool operator==(const FeatureVector&) const = default;
};

// Ordered list of named features. Categorical slots point at a vocabulary;
// several slots may share one vocabulary (e.g. all cells of a grid view), in
// which case a token has the same id in each of them.
//
// Interning is serialized through an internal lock, so a schema shared by a
// set of environments can be extended from any thread.
class FeatureSchema {
 public:
  struct Entry {
    std::string name;
    FeatureKind kind = FeatureKind::kNumerical;
    int vocabulary = -1;
  };

  FeatureSchema() = default;
  FeatureSchema(const FeatureSchema& other);
  FeatureSchema& operator=(const FeatureSchema&) = delete;

  std::size_t add_numerical(std::string name);
  // Creates the named vocabulary on first use.
  std::size_t add_categorical(std::string name, std::string vocabulary = {});

  std::size_t size() const { return entries_.size(); }
  const Entry& entry(std::size_t slot) const;
  const std::vector<Entry>& entries() const { return entries_; }
  bool is_categorical(std::size_t slot) const {
    return entry(slot).kind == FeatureKind::kCategorical;
  }

  // Returns the id of `token` in the slot's vocabulary, assigning the next
  // id when unseen. Throws SchemaError on a numerical slot.
  TokenId intern(std::size_t slot, std::string_view token);
  std::optional<TokenId> find(std::size_t slot, std::string_view token) const;
  std::string token(std::size_t slot, TokenId id) const;
  std::size_t vocabulary_size(std::size_t slot) const;

  std::size_t num_vocabularies() const { return vocabularies_.size(); }
  const std::string& vocabulary_name(std::size_t v) const {
    return vocabularies_.at(v).name;
  }
  std::vector<std::string> vocabulary_tokens(std::size_t v) const;
  // Replaces a vocabulary wholesale (deserialization).
  void restore_vocabulary(std::size_t v, const std::vector<std::string>& tokens);

  // Same entries (names, kinds and vocabulary wiring); vocab contents ignored.
  bool same_layout(const FeatureSchema& other) const;

  // Throws SchemaError when x has the wrong length, a non-finite numerical
  // value, or a categorical slot holding something that is not a known id.
  void validate(const FeatureVector& x) const;

 private:
  struct Vocabulary {
    std::string name;
    std::vector<std::string> tokens;
    std::unordered_map<std::string, TokenId> ids;
  };

  const Vocabulary& vocabulary_of(std::size_t slot) const;

  std::vector<Entry> entries_;
  std::vector<Vocabulary> vocabularies_;
  mutable std::shared_mutex mutex_;
};

// MiniGrid-style tile: (object type, color, state).
struct Tile {
  std::string type;
  std::string color;
  int state = 0;

  bool operator==(const Tile&) const = default;
};

enum class Direction : std::uint8_t { kRight = 0, kDown = 1, kLeft = 2, kUp = 3 };

std::string_view direction_name(Direction d);

inline constexpr int kGridViewSize = 7;
inline constexpr std::size_t kGridFeatureCount =
    kGridViewSize * kGridViewSize + 2;

using GridView = std::array<std::array<Tile, kGridViewSize>, kGridViewSize>;

// 49 cell slots sharing the "tile" vocabulary, then "direction", "mission".
std::shared_ptr<FeatureSchema> make_grid_schema();

// Encodes each tile as the token "type:color:state" plus one direction and
// one mission token. `schema` must come from make_grid_schema().
FeatureVector encode_grid_observation(FeatureSchema& schema,
                                      const GridView& view,
                                      Direction direction,
                                      std::string_view mission);

}  // namespace gbrl

#endif  // GBRL_FEATURES_HPP_
