#pragma once
// Verifiers: each compares exact laws (or Monte Carlo where order statistics are involved)
// against the limit objects, and the suite runner that turns a config into verdict files.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gibbs/config.hpp"
#include "gibbs/phase.hpp"

namespace gibbs {

struct Check {
  std::string name;
  std::string metric;  // sup-LLT | TV | KS | abs-error | rel-error | neg-log10-p | increase | indicator
  std::vector<double> observed;  // one per ladder n, or a single value
  double tol = 0.0;
  bool strict = false;  // pass needs observed < tol instead of <=
  bool pass = false;
  std::string note;
};

struct VerdictReport {
  std::string id, verifier, scheme, fingerprint, phase;
  std::vector<std::size_t> n_values;
  // the primary check, echoed at top level
  std::string metric;
  std::vector<double> observed;
  double tolerance = 0.0;
  bool trend_nonincreasing = true;
  bool pass = false;
  std::vector<Check> checks;
  Json details = Json::object();
  std::string error;
  bool expect_pass = true;
  double runtime_s = 0.0;

  bool expectation_met() const { return pass == expect_pass; }
  Json to_json() const;  // runtime is left out so verdicts stay reproducible
};

struct RunOptions {
  std::uint64_t seed = 0;
  std::size_t replicates = 0;  // 0: verifier default
  Json tol = Json::object();
  Json params = Json::object();
  std::string csv_dir;  // empty: no CSV output
};

VerdictReport verify_dense_llt(const SchemeSpec& s, const std::vector<std::size_t>& ladder, const RunOptions& o);
VerdictReport verify_dense_extremes(const SchemeSpec& s, const std::vector<std::size_t>& ladder, const RunOptions& o);
VerdictReport verify_prefix_independence(const SchemeSpec& s, const std::vector<std::size_t>& ladder,
                                         const RunOptions& o);
VerdictReport verify_convergent(const SchemeSpec& s, const std::vector<std::size_t>& ladder, const RunOptions& o);
VerdictReport verify_mixture(const SchemeSpec& s, const std::vector<std::size_t>& ladder, const RunOptions& o);
VerdictReport verify_dilute(const SchemeSpec& s, const std::vector<std::size_t>& ladder, const RunOptions& o);
VerdictReport verify_extended(const SchemeSpec& s, const std::vector<std::size_t>& ladder, const RunOptions& o);

using VerifierFn = VerdictReport (*)(const SchemeSpec&, const std::vector<std::size_t>&, const RunOptions&);
// nullptr for unknown names
VerifierFn find_verifier(const std::string& name);
std::vector<std::string> verifier_names();

// Dilute limit: the exact law of N_n / n^alpha against Z, and the Z distribution function.
double dilute_Z_cdf(double alpha, double b, double lambda, double x);

struct SuiteOptions {
  std::string out_dir;
  std::optional<std::uint64_t> seed;  // overrides the config seed
  unsigned threads = 1;
  bool write_csv = true;
};

struct SuiteResult {
  std::vector<VerdictReport> reports;
  int exit_code = 0;  // 0 all expectations met, 1 some not met, 2 config or phase error
  Json error;         // set when exit_code == 2
};

SuiteResult run_suite(const SuiteConfig& cfg, const SuiteOptions& opt);
// reads the config, writes verdicts.json and runtimes.json (or error.json) under out_dir
SuiteResult run_suite_file(const std::string& path, const SuiteOptions& opt);

// flat JSON view of a classification, as printed by `gibbs classify`
Json phase_report_json(const PhaseReport& r);

// JSON text with every float printed with 17 significant digits; inf and nan become strings.
std::string dump_json17(const Json& j, int indent = 2);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

}  // namespace gibbs
