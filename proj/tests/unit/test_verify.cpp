#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "gibbs/config.hpp"
#include "gibbs/verify.hpp"

using namespace gibbs;
namespace fs = std::filesystem;

namespace {

const char* kSchemes = R"({
  "A": {"w": {"kind": "closed_form", "e": 4}, "v": {"kind": "closed_form", "e": 2, "rho": "critical"}},
  "C": {"w": {"kind": "closed_form", "e": 1.5}, "v": {"kind": "closed_form", "e": 3, "rho": "critical"}},
  "id": {"v": {"kind": "explicit", "coeffs": [0, 1]}, "w": {"kind": "closed_form", "e": 4}},
  "bell": {"v": {"kind": "inverse_factorial", "terms": 60}, "w": {"kind": "inverse_factorial", "terms": 60}}
})";

std::string suite(const std::string& experiments) {
  return std::string("{\"seed\": 7, \"schemes\": ") + kSchemes + ", \"experiments\": " + experiments + "}";
}

fs::path tmpdir(const std::string& tag) {
  auto p = fs::temp_directory_path() / ("gibbs_unit_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("config syntax errors carry line and column") {
  std::string text = "{\n  \"schemes\": {\n    \"a\": [1, 2,]\n  }\n}";
  try {
    parse_config(text, "bad.json");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    std::string m = e.what();
    CHECK(m.find("bad.json:3:") != std::string::npos);
  }
}

TEST_CASE("config semantic errors name the field") {
  try {
    parse_config(suite(R"([{"verifier": "dense_llt", "scheme": "nope", "n": 10}])"));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("experiments[0].scheme") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(R"({"schemes": {"x": {"v": {"kind": "wat"}, "w": {"kind": "explicit", "coeffs": [0, 1]}}}})"),
                  Error);
}

TEST_CASE("critical v resolves to W at its radius") {
  auto cfg = parse_config(suite("[]"));
  const auto& A = cfg.schemes.at("A");
  CHECK(radius(A.v) == doctest::Approx(series_value(A.w, 1.0)).epsilon(1e-15));
  CHECK(cfg.seed == 7u);
}

TEST_CASE("fingerprint is stable and sensitive") {
  Json a = Json::parse(R"({"x": 1, "y": [1, 2]})"), b = Json::parse(R"({"y": [1, 2], "x": 1})");
  Json c = Json::parse(R"({"x": 2, "y": [1, 2]})");
  CHECK(fingerprint(a) == fingerprint(b));
  CHECK(fingerprint(a) != fingerprint(c));
  CHECK(fingerprint(a).size() == 16);
}

TEST_CASE("empty experiment list") {
  auto cfg = parse_config(suite("[]"));
  auto res = run_suite(cfg, {});
  CHECK(res.exit_code == 0);
  CHECK(res.reports.empty());
}

TEST_CASE("unclassified scheme under a phase verifier is a structured error") {
  auto dir = tmpdir("phase");
  auto path = dir / "cfg.json";
  std::ofstream(path) << suite(R"([{"id": "x", "verifier": "dense_llt", "scheme": "bell", "n": 20}])");
  SuiteOptions so;
  so.out_dir = (dir / "out").string();
  auto res = run_suite_file(path.string(), so);
  CHECK(res.exit_code == 2);
  CHECK(res.error["kind"] == "phase");
  CHECK(fs::exists(dir / "out" / "error.json"));
  // a declared phase that disagrees with the classifier
  std::ofstream(path) << suite(R"([{"verifier": "dense_llt", "scheme": "A", "n": 20, "phase": "dilute"}])");
  CHECK(run_suite_file(path.string(), so).exit_code == 2);
  std::ofstream(path) << suite(R"([{"verifier": "dense_llt", "scheme": "A", "n": 20, "phase": "gaseous"}])");
  CHECK(run_suite_file(path.string(), so).exit_code == 2);
  std::ofstream(path) << "{ \"schemes\": ";
  CHECK(run_suite_file(path.string(), so).exit_code == 2);
}

TEST_CASE("dump_json17") {
  Json j = {{"a", 0.1}, {"b", std::numeric_limits<double>::infinity()}, {"c", {1, 2}}, {"d", "s"}};
  std::string s = dump_json17(j);
  CHECK(s.find("0.10000000000000001") != std::string::npos);
  CHECK(s.find("\"inf\"") != std::string::npos);
  CHECK(Json::parse(s)["c"][1] == 2);
}

TEST_CASE("prefix verifier passes on A and fails on the identity outer series") {
  RunOptions o;
  auto ok = verify_prefix_independence(fx::scheme_A(), {100, 400, 1600}, o);
  CHECK(ok.pass);
  CHECK(ok.trend_nonincreasing);
  CHECK(ok.observed.back() < 0.05);
  auto bad = verify_prefix_independence(fx::identity_outer(), {100, 400, 1600}, o);
  CHECK_FALSE(bad.pass);
  CHECK(bad.observed.back() > 0.9);
}

TEST_CASE("convergent verifier on the identity outer series is exact") {
  RunOptions o;
  o.replicates = 200;
  auto r = verify_convergent(fx::identity_outer(), {50, 100}, o);
  CHECK(r.pass);
  CHECK(r.observed.back() == 0.0);
}

TEST_CASE("verdicts are deterministic for a fixed seed") {
  auto cfg = parse_config(suite(R"([{"id": "c", "verifier": "convergent", "scheme": "C", "n_ladder": [100, 200], "replicates": 500},
                                    {"id": "p", "verifier": "prefix_independence", "scheme": "A", "n_ladder": [50, 100]}])"));
  SuiteOptions so;
  so.threads = 2;
  auto a = run_suite(cfg, so), b = run_suite(cfg, so);
  REQUIRE(a.reports.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK(dump_json17(a.reports[i].to_json()) == dump_json17(b.reports[i].to_json()));
}

TEST_CASE("verifiers refuse other phases without passing vacuously") {
  RunOptions o;
  o.replicates = 200;
  auto r = verify_dense_llt(fx::scheme_C(), {100, 200}, o);
  CHECK_FALSE(r.pass);
  bool flagged = false;
  for (const auto& c : r.checks)
    if (c.name == "phase_hypothesis") flagged = !c.pass;
  CHECK(flagged);
}

TEST_CASE("verifier registry") {
  for (const char* n : {"dense_llt", "dense_extremes", "prefix_independence", "convergent", "mixture", "dilute", "extended"})
    CHECK(find_verifier(n) != nullptr);
  CHECK(find_verifier("nope") == nullptr);
}

TEST_CASE("Z cdf is a distribution function") {
  double lam = std::sqrt(M_PI) / (0.5 * 2.612375348685488);
  double prev = 0.0;
  for (double x : {0.01, 0.1, 0.5, 1.0, 3.0}) {
    double F = dilute_Z_cdf(0.5, 1.5, lam, x);
    CHECK(F >= prev);
    prev = F;
  }
  CHECK(dilute_Z_cdf(0.5, 1.5, lam, 60.0) == doctest::Approx(1.0).epsilon(1e-8));
}
