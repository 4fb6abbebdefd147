#include "pricelab/config.hpp"

#include <fstream>

#include "pricelab/errors.hpp"
#include "pricelab/market_env.hpp"
#include "pricelab/noise_models.hpp"
#include "pricelab/policies.hpp"

namespace pricelab {

using nlohmann::json;

namespace {

void check(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

template <typename T>
void read(const json& doc, const char* key, T& field) {
  const auto it = doc.find(key);
  if (it == doc.end()) return;
  try {
    field = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  check(T >= 1, "T must be >= 1");
  check(R >= 1, "R must be >= 1");
  check(d >= 1, "d must be >= 1");
  check(s0 >= 1 && s0 <= d + 1, "s0 must lie in [1, d+1]");
  check(W > 0.0, "W must be > 0");
  check(noise_scale > 0.0, "noise_scale must be > 0");
  check(lambda_scale >= 0.0, "lambda_scale must be >= 0");
  check(c >= 1, "c must be >= 1");
  check(delta > 0.0, "delta must be > 0");
  check(beta_lo > 0.0 && beta_hi > beta_lo,
        "beta box must satisfy 0 < beta_lo < beta_hi");
  check(dip_response == "zero_one" || dip_response == "pm1",
        "dip_response must be 'zero_one' or 'pm1'");
  try {
    validate_policy_id(policy);
    NoiseModel::from_name(noise, noise_scale);
    LinkFunction::from_name(link);
    parse_feature_distribution(feature_dist);
    parse_feature_map(feature_map);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const bool identity_link = link == "identity";
  if (policy == "rmlp" || policy == "rmlp2" || policy == "dip")
    check(identity_link, "policy '" + policy +
                             "' requires the identity link; use "
                             "rmlp_nonlinear for link '" + link + "'");
  if (feature_map == "componentwise_log")
    check(feature_dist == "uniform_pos",
          "componentwise_log features need the positive feature "
          "distribution 'uniform_pos'");
  if (policy == "dip")
    check(noise == "uniform" && noise_scale <= delta,
          "dip needs uniform noise with half-width <= delta");
}

json ExperimentConfig::to_json() const {
  return json{{"policy", policy},
              {"c", c},
              {"delta", delta},
              {"beta_lo", beta_lo},
              {"beta_hi", beta_hi},
              {"lambda_scale", lambda_scale},
              {"dip_response", dip_response},
              {"noise", noise},
              {"noise_scale", noise_scale},
              {"link", link},
              {"feature_dist", feature_dist},
              {"feature_map", feature_map},
              {"d", d},
              {"s0", s0},
              {"T", T},
              {"W", W},
              {"R", R},
              {"base_seed", base_seed},
              {"output", output},
              {"persist_traces", persist_traces}};
}

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  const json known = cfg.to_json();
  for (const auto& [key, value] : doc.items())
    if (!known.contains(key))
      throw ConfigError("unknown config key '" + key + "'");
  read(doc, "policy", cfg.policy);
  read(doc, "c", cfg.c);
  read(doc, "delta", cfg.delta);
  read(doc, "beta_lo", cfg.beta_lo);
  read(doc, "beta_hi", cfg.beta_hi);
  read(doc, "lambda_scale", cfg.lambda_scale);
  read(doc, "dip_response", cfg.dip_response);
  read(doc, "noise", cfg.noise);
  read(doc, "noise_scale", cfg.noise_scale);
  read(doc, "link", cfg.link);
  read(doc, "feature_dist", cfg.feature_dist);
  read(doc, "feature_map", cfg.feature_map);
  read(doc, "d", cfg.d);
  read(doc, "s0", cfg.s0);
  read(doc, "T", cfg.T);
  read(doc, "W", cfg.W);
  read(doc, "R", cfg.R);
  read(doc, "base_seed", cfg.base_seed);
  read(doc, "output", cfg.output);
  read(doc, "persist_traces", cfg.persist_traces);
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return from_json(doc);
}

void set_config_field(ExperimentConfig& config, const std::string& key,
                      const std::string& value) {
  json doc = config.to_json();
  if (!doc.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  if (doc[key].is_string()) {
    doc[key] = value;
  } else {
    try {
      doc[key] = json::parse(value);
    } catch (const json::parse_error&) {
      throw ConfigError("bad value '" + value + "' for key '" + key + "'");
    }
  }
  config = ExperimentConfig::from_json(doc);
}

}  // namespace pricelab
