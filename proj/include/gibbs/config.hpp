#pragma once
// Suite configuration: named schemes plus an experiment list, read from one JSON document.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gibbs/weightspec.hpp"

namespace gibbs {

using Json = nlohmann::json;

struct ExperimentSpec {
  std::string id;
  std::string verifier;
  std::string scheme;
  std::vector<std::size_t> n_ladder;
  std::size_t replicates = 0;  // 0: verifier default
  std::optional<std::uint64_t> seed;
  Json tol = Json::object();  // number (primary check) or {check: value}
  Json params = Json::object();
  std::optional<std::string> phase;  // declared phase, checked against the classifier
  bool expect_pass = true;
};

struct SuiteConfig {
  std::map<std::string, SchemeSpec> schemes;
  std::map<std::string, Json> scheme_json;
  std::vector<ExperimentSpec> experiments;
  std::optional<std::uint64_t> seed;
};

// `where` is a JSON path used in diagnostics; critical resolves "rho": "critical".
WeightSequence parse_sequence(const Json& j, const std::string& where, std::optional<double> critical = {});
SchemeSpec parse_scheme(const std::string& name, const Json& j);
SuiteConfig parse_config(const std::string& text, const std::string& source = "<config>");
SuiteConfig load_config(const std::string& path);

// FNV-1a 64 of the canonical (key-sorted) dump, as 16 hex digits
std::string fingerprint(const Json& j);

}  // namespace gibbs
