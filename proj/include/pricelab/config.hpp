#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

namespace pricelab {

struct ExperimentConfig {
  std::string policy = "rmlp";
  // Policy parameters.
  int c = 5;
  double delta = 0.1;
  double beta_lo = 0.05;
  double beta_hi = 20.0;
  double lambda_scale = 1.0;
  std::string dip_response = "zero_one";  // or "pm1"
  // Market.
  std::string noise = "logistic";
  double noise_scale = 1.0;
  std::string link = "identity";
  std::string feature_dist = "uniform_pm1";
  std::string feature_map = "identity";
  int d = 100;
  int s0 = 5;
  std::int64_t T = 1024;
  double W = 5.0;
  // Experiment.
  int R = 20;
  std::uint64_t base_seed = 1;
  std::string output;  // directory; empty disables persistence
  bool persist_traces = false;

  // Throws ConfigError on any inconsistency.
  void validate() const;

  nlohmann::json to_json() const;
  // Unknown keys are rejected; missing keys keep their defaults.
  static ExperimentConfig from_json(const nlohmann::json& doc);
  static ExperimentConfig load(const std::string& path);

  bool operator==(const ExperimentConfig&) const = default;
};

// Sets one field from its textual value, e.g. ("T", "4096").
void set_config_field(ExperimentConfig& config, const std::string& key,
                      const std::string& value);

}  // namespace pricelab
