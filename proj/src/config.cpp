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

#include "gbrl/config.hpp"

#include <fmt/format.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace gbrl {
namespace {

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(fmt::format("{}: cannot parse '{}' as a number", key, text));
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, text));
}

struct Field {
  std::string_view section;
  std::string_view name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

template <typename T, typename Access>
Field number_field(std::string_view section, std::string_view name, Access access) {
  return {section, name,
          [access](const RunConfig& c) {
            return fmt::format("{}", access(const_cast<RunConfig&>(c)));
          },
          [access, name](RunConfig& c, std::string_view v) {
            access(c) = parse_number<T>(name, v);
          }};
}

template <typename Access>
Field bool_field(std::string_view section, std::string_view name, Access access) {
  return {section, name,
          [access](const RunConfig& c) {
            return std::string(access(const_cast<RunConfig&>(c)) ? "true" : "false");
          },
          [access, name](RunConfig& c, std::string_view v) {
            access(c) = parse_bool(name, v);
          }};
}

#define GBRL_NUM(section, T, member) \
  number_field<T>(section, #member, [](RunConfig& c) -> T& { return c.member; })

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"run", "env", [](const RunConfig& c) { return c.env; },
                 [](RunConfig& c, std::string_view v) { c.env = std::string(v); }});
    f.push_back(number_field<std::uint64_t>(
        "run", "seed", [](RunConfig& c) -> std::uint64_t& { return c.seed; }));
    f.push_back(number_field<std::int64_t>(
        "run", "total_timesteps",
        [](RunConfig& c) -> std::int64_t& { return c.total_timesteps; }));
    f.push_back(number_field<std::int64_t>(
        "run", "checkpoint_interval",
        [](RunConfig& c) -> std::int64_t& { return c.checkpoint_interval; }));
    f.push_back({"run", "output_dir", [](const RunConfig& c) { return c.output_dir; },
                 [](RunConfig& c, std::string_view v) { c.output_dir = std::string(v); }});
    f.push_back(bool_field("run", "shared_ac",
                           [](RunConfig& c) -> bool& { return c.shared_ac; }));

    f.push_back({"algo", "algo",
                 [](const RunConfig& c) { return std::string(algorithm_name(c.algo.algo)); },
                 [](RunConfig& c, std::string_view v) {
                   auto a = parse_algorithm(v);
                   if (!a) {
                     throw ConfigError(fmt::format(
                         "algo: unknown algorithm '{}' (expected a2c, ppo or awr)", v));
                   }
                   c.algo.algo = *a;
                 }});
    f.push_back(GBRL_NUM("algo", double, algo.gamma));
    f.push_back(GBRL_NUM("algo", double, algo.gae_lambda));
    f.push_back(GBRL_NUM("algo", double, algo.clip_range));
    f.push_back(GBRL_NUM("algo", double, algo.ent_coef));
    f.push_back(GBRL_NUM("algo", double, algo.beta));
    f.push_back(GBRL_NUM("algo", int, algo.n_steps));
    f.push_back(GBRL_NUM("algo", int, algo.n_envs));
    f.push_back(GBRL_NUM("algo", int, algo.batch_size));
    f.push_back(GBRL_NUM("algo", int, algo.n_epochs));
    f.push_back(GBRL_NUM("algo", std::int64_t, algo.total_iterations));
    f.push_back(GBRL_NUM("algo", double, algo.lr_actor));
    f.push_back(GBRL_NUM("algo", double, algo.lr_critic));
    f.push_back(GBRL_NUM("algo", double, algo.lr_logstd));
    f.push_back({"algo", "lr_logstd_schedule",
                 [](const RunConfig& c) {
                   return std::string(c.algo.lr_logstd_linear ? "linear" : "constant");
                 },
                 [](RunConfig& c, std::string_view v) {
                   if (v == "linear") {
                     c.algo.lr_logstd_linear = true;
                   } else if (v == "constant") {
                     c.algo.lr_logstd_linear = false;
                   } else {
                     throw ConfigError(fmt::format(
                         "lr_logstd_schedule: expected constant or linear, got '{}'", v));
                   }
                 }});
    f.push_back(GBRL_NUM("algo", double, algo.log_std_init));
    f.push_back(GBRL_NUM("algo", double, algo.grad_clip_policy));
    f.push_back(GBRL_NUM("algo", double, algo.grad_clip_value));
    f.push_back(bool_field("algo", "grad_clip_per_sample", [](RunConfig& c) -> bool& {
      return c.algo.grad_clip_per_sample;
    }));
    f.push_back(bool_field("algo", "normalize_advantage", [](RunConfig& c) -> bool& {
      return c.algo.normalize_advantage;
    }));
    f.push_back(GBRL_NUM("algo", double, algo.awr_weight_max));
    f.push_back(GBRL_NUM("algo", int, algo.awr_train_freq));
    f.push_back(GBRL_NUM("algo", int, algo.awr_gradient_steps));
    f.push_back(GBRL_NUM("algo", int, algo.awr_buffer_size));

    f.push_back(GBRL_NUM("tree", int, tree.max_depth));
    f.push_back(GBRL_NUM("tree", int, tree.min_samples_leaf));
    f.push_back(GBRL_NUM("tree", int, tree.num_bins));

    // The macro stringizes "algo.gamma"; keep only the part after the dot.
    for (auto& field : f) {
      const auto dot = field.name.find('.');
      if (dot != std::string_view::npos) field.name = field.name.substr(dot + 1);
    }
    return f;
  }();
  return table;
}

#undef GBRL_NUM

const Field* find_field(std::string_view section, std::string_view name) {
  for (const auto& f : fields()) {
    if (f.section == section && f.name == name) return &f;
  }
  return nullptr;
}

}  // namespace

void RunConfig::validate() const {
  try {
    algo.validate();
    TreeFitConfig t = tree;
    t.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (env != "cartpole" && env != "catgrid" && env != "pendulum") {
    throw ConfigError("env: unknown environment '" + env + "'");
  }
  if (total_timesteps < 0) throw ConfigError("total_timesteps must be >= 0");
  if (checkpoint_interval < 0) throw ConfigError("checkpoint_interval must be >= 0");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

RunConfig parse_run_config(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax error: ") + e.what());
  }
  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("key '" + section + "' must be inside a section");
    }
    for (const auto& [key, value] : body) {
      const Field* f = find_field(section, key);
      if (f == nullptr) {
        throw ConfigError("unknown config key '" + section + "." + key + "'");
      }
      f->set(cfg, value.data());
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string serialize_run_config(const RunConfig& cfg) {
  std::string out;
  std::string_view section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) out += '\n';
      section = f.section;
      out += fmt::format("[{}]\n", section);
    }
    out += fmt::format("{} = {}\n", f.name, f.get(cfg));
  }
  return out;
}

void apply_override(RunConfig& cfg, std::string_view key,
                    std::string_view value) {
  const auto dot = key.find('.');
  if (dot != std::string_view::npos) {
    const Field* f = find_field(key.substr(0, dot), key.substr(dot + 1));
    if (f == nullptr) throw ConfigError("unknown config key '" + std::string(key) + "'");
    f->set(cfg, value);
    return;
  }
  const Field* match = nullptr;
  for (const auto& f : fields()) {
    if (f.name != key) continue;
    if (match != nullptr) {
      throw ConfigError("ambiguous config key '" + std::string(key) +
                        "'; use section.key");
    }
    match = &f;
  }
  if (match == nullptr) throw ConfigError("unknown config key '" + std::string(key) + "'");
  match->set(cfg, value);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) {
    keys.push_back(std::string(f.section) + "." + std::string(f.name));
  }
  return keys;
}

}  // namespace gbrl
