#include "gibbs/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gibbs {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
  throw Error(Error::Kind::config, where + ": " + msg);
}

double number_at(const Json& j, const char* key, const std::string& where, std::optional<double> dflt = {}) {
  if (!j.contains(key)) {
    if (dflt) return *dflt;
    fail(where, std::string("missing field '") + key + "'");
  }
  const Json& v = j.at(key);
  if (!v.is_number()) fail(where + "." + key, "expected a number");
  return v.get<double>();
}

std::size_t index_at(const Json& j, const char* key, const std::string& where, std::size_t dflt) {
  if (!j.contains(key)) return dflt;
  const Json& v = j.at(key);
  if (!v.is_number_unsigned()) fail(where + "." + key, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

WeightSequence parse_sequence(const Json& j, const std::string& where, std::optional<double> critical) {
  if (!j.is_object()) fail(where, "a weight sequence must be an object");
  std::string kind = j.value("kind", std::string());
  if (kind == "explicit") {
    if (!j.contains("coeffs") || !j.at("coeffs").is_array()) fail(where, "explicit sequence needs a 'coeffs' array");
    std::vector<double> c;
    for (const auto& x : j.at("coeffs")) {
      if (!x.is_number()) fail(where + ".coeffs", "coefficients must be numbers");
      c.push_back(x.get<double>());
    }
    try {
      return WeightSequence::explicit_coeffs(std::move(c));
    } catch (const Error& e) {
      fail(where, e.what());
    }
  }
  if (kind == "inverse_factorial") {
    std::size_t terms = index_at(j, "terms", where, 0);
    if (terms == 0) fail(where, "inverse_factorial needs 'terms' >= 1");
    std::vector<double> c(terms + 1, 0.0);
    for (std::size_t i = 1; i <= terms; ++i) c[i] = std::exp(-std::lgamma(static_cast<double>(i) + 1.0));
    return WeightSequence::explicit_coeffs(std::move(c));
  }
  if (kind == "closed_form") {
    SlowVaryingFactor L{number_at(j, "c", where, 1.0), number_at(j, "log_exp", where, 0.0)};
    double e = number_at(j, "e", where);
    double rho = 0.0;
    if (j.contains("rho") && j.at("rho").is_string()) {
      if (j.at("rho").get<std::string>() != "critical") fail(where + ".rho", "expected a number or \"critical\"");
      if (!critical) fail(where + ".rho", "\"critical\" is only meaningful for v with a closed-form w");
      rho = *critical;
    } else {
      rho = number_at(j, "rho", where, 1.0);
    }
    std::size_t start = index_at(j, "start", where, 1);
    double zero = number_at(j, "zero_term", where, 0.0);
    std::map<std::size_t, double> ov;
    if (j.contains("overrides")) {
      const Json& o = j.at("overrides");
      if (!o.is_object()) fail(where + ".overrides", "expected an object {index: value}");
      for (auto it = o.begin(); it != o.end(); ++it) {
        std::size_t idx = 0;
        try {
          std::size_t pos = 0;
          idx = std::stoul(it.key(), &pos);
          if (pos != it.key().size()) throw std::invalid_argument("index");
        } catch (const std::exception&) {
          fail(where + ".overrides", "key '" + it.key() + "' is not an index");
        }
        if (!it.value().is_number()) fail(where + ".overrides." + it.key(), "expected a number");
        ov[idx] = it.value().get<double>();
      }
    }
    try {
      return WeightSequence::closed_form(L, e, rho, start, ov, zero);
    } catch (const Error& err) {
      fail(where, err.what());
    }
  }
  fail(where, "unknown sequence kind '" + kind + "' (closed_form, explicit, inverse_factorial)");
}

SchemeSpec parse_scheme(const std::string& name, const Json& j) {
  std::string where = "schemes." + name;
  if (!j.is_object()) fail(where, "a scheme must be an object");
  if (!j.contains("w")) fail(where, "missing 'w'");
  if (!j.contains("v")) fail(where, "missing 'v'");
  WeightSequence w = parse_sequence(j.at("w"), where + ".w");
  std::optional<double> crit;
  if (!w.is_explicit()) {
    double W = series_value(w, radius(w));
    if (std::isfinite(W)) crit = W;
  }
  WeightSequence v = parse_sequence(j.at("v"), where + ".v", crit);
  SchemeSpec s(name, v, w);
  if (j.contains("h")) s.h = parse_sequence(j.at("h"), where + ".h");
  if (j.contains("product_factors")) {
    const Json& f = j.at("product_factors");
    if (!f.is_array()) fail(where + ".product_factors", "expected an array");
    for (std::size_t i = 0; i < f.size(); ++i)
      s.product_factors.push_back(parse_sequence(f[i], where + ".product_factors[" + std::to_string(i) + "]"));
  }
  try {
    s.validate();
  } catch (const Error& e) {
    fail(where, e.what());
  }
  return s;
}

SuiteConfig parse_config(const std::string& text, const std::string& source) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    throw Error(Error::Kind::config,
                source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON syntax error: " + e.what());
  }
  if (!doc.is_object()) fail(source, "top level must be an object");
  SuiteConfig cfg;
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) fail(source + ": seed", "expected an unsigned integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("schemes")) {
    const Json& sc = doc.at("schemes");
    if (!sc.is_object()) fail("schemes", "expected an object");
    for (auto it = sc.begin(); it != sc.end(); ++it) {
      cfg.schemes.emplace(it.key(), parse_scheme(it.key(), it.value()));
      cfg.scheme_json[it.key()] = it.value();
    }
  }
  if (doc.contains("experiments")) {
    const Json& ex = doc.at("experiments");
    if (!ex.is_array()) fail("experiments", "expected an array");
    for (std::size_t i = 0; i < ex.size(); ++i) {
      const Json& e = ex[i];
      std::string where = "experiments[" + std::to_string(i) + "]";
      if (!e.is_object()) fail(where, "expected an object");
      ExperimentSpec x;
      x.verifier = e.value("verifier", std::string());
      if (x.verifier.empty()) fail(where, "missing 'verifier'");
      x.scheme = e.value("scheme", std::string());
      if (x.scheme.empty()) fail(where, "missing 'scheme'");
      if (!cfg.schemes.count(x.scheme)) fail(where + ".scheme", "unknown scheme '" + x.scheme + "'");
      x.id = e.value("id", x.verifier + "_" + x.scheme);
      if (e.contains("n_ladder")) {
        if (!e.at("n_ladder").is_array()) fail(where + ".n_ladder", "expected an array of integers");
        for (const auto& n : e.at("n_ladder")) {
          if (!n.is_number_unsigned() || n.get<std::size_t>() == 0)
            fail(where + ".n_ladder", "entries must be positive integers");
          x.n_ladder.push_back(n.get<std::size_t>());
        }
      } else if (e.contains("n")) {
        x.n_ladder.push_back(index_at(e, "n", where, 0));
      }
      if (x.n_ladder.empty()) fail(where, "needs 'n_ladder' or 'n'");
      x.replicates = index_at(e, "replicates", where, 0);
      if (e.contains("seed")) {
        if (!e.at("seed").is_number_unsigned()) fail(where + ".seed", "expected an unsigned integer");
        x.seed = e.at("seed").get<std::uint64_t>();
      }
      if (e.contains("tol")) {
        x.tol = e.at("tol");
        if (!x.tol.is_number() && !x.tol.is_object()) fail(where + ".tol", "expected a number or an object");
      }
      if (e.contains("params")) {
        x.params = e.at("params");
        if (!x.params.is_object()) fail(where + ".params", "expected an object");
      }
      if (e.contains("phase")) x.phase = e.at("phase").get<std::string>();
      if (e.value("negative_control", false)) x.expect_pass = false;
      if (e.contains("expect")) {
        std::string ex2 = e.at("expect").get<std::string>();
        if (ex2 != "pass" && ex2 != "fail") fail(where + ".expect", "expected \"pass\" or \"fail\"");
        x.expect_pass = ex2 == "pass";
      }
      cfg.experiments.push_back(std::move(x));
    }
  }
  return cfg;
}

SuiteConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Error::Kind::config, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string fingerprint(const Json& j) {
  std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace gibbs
