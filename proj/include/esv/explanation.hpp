#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "esv/common.hpp"

namespace esv {

// Additive explanation of one prediction: base value plus one attribution per
// interpretable feature.
struct Explanation {
  double base_value = 0.0;
  std::vector<double> phi;
  std::vector<std::string> feature_names;
  std::string estimator;
  std::uint64_t budget = 0;  // distinct set-function evaluations consumed
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(phi.size()); }

  double total() const {
    double sum = base_value;
    for (double p : phi) sum += p;
    return sum;
  }
};

inline std::vector<std::string> default_feature_names(int m) {
  std::vector<std::string> names;
  names.reserve(m);
  for (int i = 0; i < m; ++i) names.push_back("f" + std::to_string(i));
  return names;
}

inline nlohmann::json explanation_to_json(const Explanation& e) {
  nlohmann::json j;
  j["base_value"] = e.base_value;
  j["phi"] = e.phi;
  j["feature_names"] =
      e.feature_names.empty() ? default_feature_names(e.size()) : e.feature_names;
  j["estimator"] = e.estimator;
  j["budget"] = e.budget;
  j["seed"] = e.seed;
  return j;
}

inline Explanation explanation_from_json(const nlohmann::json& j) {
  Explanation e;
  for (const char* key : {"base_value", "phi", "feature_names", "estimator", "budget", "seed"}) {
    if (!j.contains(key)) {
      throw ParseError(std::string("explanation document missing \"") + key + "\"");
    }
  }
  e.base_value = j.at("base_value").get<double>();
  e.phi = j.at("phi").get<std::vector<double>>();
  e.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  e.estimator = j.at("estimator").get<std::string>();
  e.budget = j.at("budget").get<std::uint64_t>();
  e.seed = j.at("seed").get<std::uint64_t>();
  if (e.feature_names.size() != e.phi.size()) {
    throw ParseError("explanation feature_names/phi length mismatch");
  }
  return e;
}

}  // namespace esv
