#pragma once

#include <filesystem>
#include <sstream>
#include <string>

#include "kdmcse/errors.hpp"
#include "kdmcse/io.hpp"
#include "kdmcse/trainer.hpp"

namespace kdmcse {

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  std::size_t e = s.find_last_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::ConfigError, key + ": bad number '" + value + "'");
  }
}

inline std::size_t parse_size(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    fail(ErrorCode::ConfigError, key + ": bad integer '" + value + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  fail(ErrorCode::ConfigError, key + ": bad boolean '" + value + "'");
}

}  // namespace detail

/// Applies one `key = value` setting. Unknown keys are rejected so a typo in
/// a config file or a --set override cannot silently change nothing.
inline void apply_config_entry(TrainConfig& config, const std::string& raw_key,
                               const std::string& raw_value) {
  const std::string key = detail::trim(raw_key);
  const std::string value = detail::trim(raw_value);
  if (key == "objective") {
    config.objective = parse_objective(value);
  } else if (key == "batch_size") {
    config.batch_size = detail::parse_size(key, value);
  } else if (key == "learning_rate") {
    config.learning_rate = detail::parse_double(key, value);
  } else if (key == "steps") {
    config.steps = detail::parse_size(key, value);
  } else if (key == "eval_every") {
    config.eval_every = detail::parse_size(key, value);
  } else if (key == "seed") {
    config.seed = static_cast<std::uint64_t>(detail::parse_size(key, value));
  } else if (key == "optimizer") {
    config.optimizer = parse_optimizer(value);
  } else if (key == "dropout_rate") {
    config.dropout_rate = detail::parse_double(key, value);
  } else if (key == "dim_h") {
    config.dim_h = detail::parse_size(key, value);
  } else if (key == "dim_g") {
    config.dim_g = detail::parse_size(key, value);
  } else if (key == "tau") {
    config.objective_config.tau = detail::parse_double(key, value);
  } else if (key == "tau_prime") {
    config.objective_config.tau_prime = detail::parse_double(key, value);
  } else if (key == "margin") {
    config.objective_config.margin = detail::parse_double(key, value);
  } else if (key == "threshold") {
    config.objective_config.threshold = detail::parse_double(key, value);
  } else if (key == "sum_over_both_dropout_views") {
    config.objective_config.sum_over_both_dropout_views = detail::parse_bool(key, value);
  } else if (key == "filter_enabled") {
    config.objective_config.filter_enabled = detail::parse_bool(key, value);
  } else if (key == "filter_orientation") {
    if (value == "exclude_high") {
      config.objective_config.filter_orientation = FilterOrientation::exclude_high;
    } else if (value == "paper_literal") {
      config.objective_config.filter_orientation = FilterOrientation::paper_literal;
    } else {
      fail(ErrorCode::ConfigError, "filter_orientation: '" + value + "'");
    }
  } else {
    fail(ErrorCode::ConfigError, "unknown config key '" + key + "'");
  }
}

/// `KEY=VALUE` override as passed on the command line.
inline void apply_override(TrainConfig& config, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos) {
    fail(ErrorCode::ConfigError, "override '" + assignment + "' is not KEY=VALUE");
  }
  apply_config_entry(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

/// Flat `key = value` file, UTF-8, `#` comments.
inline TrainConfig load_train_config(const std::filesystem::path& path) {
  TrainConfig config;
  const std::string data = read_file(path);
  std::istringstream stream(data);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::ConfigError,
           path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    apply_config_entry(config, line.substr(0, eq), line.substr(eq + 1));
  }
  return config;
}

inline std::string dump_train_config(const TrainConfig& config) {
  std::string out;
  out += "objective = " + std::string(objective_name(config.objective)) + "\n";
  out += "batch_size = " + std::to_string(config.batch_size) + "\n";
  out += "learning_rate = " + format_double(config.learning_rate) + "\n";
  out += "steps = " + std::to_string(config.steps) + "\n";
  out += "eval_every = " + std::to_string(config.eval_every) + "\n";
  out += "seed = " + std::to_string(config.seed) + "\n";
  out += "optimizer = " + std::string(optimizer_name(config.optimizer)) + "\n";
  out += "dropout_rate = " + format_double(config.dropout_rate) + "\n";
  out += "dim_h = " + std::to_string(config.dim_h) + "\n";
  out += "dim_g = " + std::to_string(config.dim_g) + "\n";
  out += "tau = " + format_double(config.objective_config.tau) + "\n";
  out += "tau_prime = " + format_double(config.objective_config.tau_prime) + "\n";
  out += "margin = " + format_double(config.objective_config.margin) + "\n";
  out += "threshold = " + format_double(config.objective_config.threshold) + "\n";
  out += std::string("sum_over_both_dropout_views = ") +
         (config.objective_config.sum_over_both_dropout_views ? "true" : "false") + "\n";
  out += std::string("filter_enabled = ") +
         (config.objective_config.filter_enabled ? "true" : "false") + "\n";
  out += std::string("filter_orientation = ") +
         (config.objective_config.filter_orientation == FilterOrientation::exclude_high
              ? "exclude_high"
              : "paper_literal") +
         "\n";
  return out;
}

}  // namespace kdmcse
