#pragma once

#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "mwdenoise/model.hpp"
#include "mwdenoise/trainer.hpp"

namespace mwd {

/// Everything a pipeline run needs, assembled from a key=value file. Every
/// key has a default (the struct initializers); unknown keys are rejected.
struct RunConfig {
  ModelConfig model;  // levels, convs_per_block, channel_schedule, residual_mode
  TrainConfig train;
  std::string manifest;            // dataset manifest path (required for train)
  std::string out_dir = ".";
  std::string checkpoint = "model.mwck";
  std::string loss_csv = "loss.csv";
  int threads = 1;
};

namespace detail {

inline int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const int x = std::stoi(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: key '" + key + "' needs an integer, got '" + v + "'");
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: key '" + key + "' needs a number, got '" + v + "'");
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const std::uint64_t x = std::stoull(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: key '" + key + "' needs an unsigned integer, got '" +
                    v + "'");
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("config: key '" + key + "' needs a boolean, got '" + v + "'");
}

inline std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::istringstream is(v);
  std::string item;
  while (std::getline(is, item, ','))
    if (!item.empty()) out.push_back(parse_int(key, item));
  if (out.empty())
    throw ConfigError("config: key '" + key + "' needs a comma-separated list");
  return out;
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

/// Applies one key=value setting; shared by the file parser and CLI overrides.
inline void apply_setting(RunConfig& cfg, const std::string& key,
                          const std::string& value) {
  using namespace detail;
  if (key == "levels") cfg.model.levels = parse_int(key, value);
  else if (key == "convs_per_block") cfg.model.convs_per_block = parse_int(key, value);
  else if (key == "channel_schedule") cfg.model.channel_schedule = parse_int_list(key, value);
  else if (key == "residual_mode") cfg.model.residual_mode = parse_bool(key, value);
  else if (key == "learning_rate") cfg.train.learning_rate = parse_double(key, value);
  else if (key == "adam_beta1") cfg.train.adam_beta1 = parse_double(key, value);
  else if (key == "adam_beta2") cfg.train.adam_beta2 = parse_double(key, value);
  else if (key == "adam_epsilon") cfg.train.adam_epsilon = parse_double(key, value);
  else if (key == "epochs") cfg.train.epochs = parse_int(key, value);
  else if (key == "batch_size") cfg.train.batch_size = parse_int(key, value);
  else if (key == "split_fraction") cfg.train.split_fraction = parse_double(key, value);
  else if (key == "seed") cfg.train.seed = parse_u64(key, value);
  else if (key == "checkpoint_every") cfg.train.checkpoint_every = parse_int(key, value);
  else if (key == "manifest") cfg.manifest = value;
  else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "checkpoint") cfg.checkpoint = value;
  else if (key == "loss_csv") cfg.loss_csv = value;
  else if (key == "threads") cfg.threads = parse_int(key, value);
  else throw ConfigError("config: unknown key '" + key + "'");
}

/// key = value lines; '#' comments and blank lines are skipped.
inline RunConfig parse_run_config(std::istream& in) {
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) +
                        " is not key=value");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config: empty key on line " + std::to_string(lineno));
    apply_setting(cfg, key, value);
  }
  return cfg;
}

inline RunConfig read_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config '" + path + "'");
  return parse_run_config(in);
}

}  // namespace mwd
