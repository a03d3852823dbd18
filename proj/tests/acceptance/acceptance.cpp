// Acceptance run: one PASS/FAIL line per criterion.
//   acceptance [--config PATH] [--golden PATH] [--only K] [--threads T]
// Exit 0 when every selected criterion passes, 1 otherwise.
// Thresholds live here, not in the config, so a config edit cannot relax them.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>

#include "gibbs/config.hpp"
#include "gibbs/exact.hpp"
#include "gibbs/limit_laws.hpp"
#include "gibbs/series.hpp"
#include "gibbs/verify.hpp"

using namespace gibbs;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string info;
  void need(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      info += (info.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& s) { info += (info.empty() ? "" : "; ") + s; }
};

std::string g(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4g", x);
  return b;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double tv_maps(const std::map<std::vector<std::size_t>, double>& a, const std::map<std::vector<std::size_t>, double>& b) {
  std::map<std::vector<std::size_t>, double> d = a;
  for (const auto& [k, v] : b) d[k] -= v;
  double s = 0.0;
  for (const auto& [k, v] : d) s += std::abs(v);
  return 0.5 * s;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
    double x = i < a.size() ? a[i] : 0.0, y = i < b.size() ? b[i] : 0.0;
    m = std::max(m, std::abs(x - y));
  }
  return m;
}

// the Gibbs partition of every bundled scheme, h and product factors aside
std::vector<SchemeSpec> partition_schemes(const SuiteConfig& cfg) {
  std::vector<SchemeSpec> out;
  for (const auto& [name, s] : cfg.schemes)
    if (term(s.w, 0) == 0.0) out.push_back(SchemeSpec(name, s.v, s.w));
  return out;
}

struct Ctx {
  std::string config, golden;
  unsigned threads = 1;
  SuiteConfig cfg;
  std::map<std::string, VerdictReport> reports;  // filled lazily, per experiment id

  const ExperimentSpec& spec(const std::string& id) const {
    for (const auto& e : cfg.experiments)
      if (e.id == id) return e;
    throw std::runtime_error("no experiment " + id + " in " + config);
  }

  const VerdictReport& report(const std::string& id) {
    auto it = reports.find(id);
    if (it != reports.end()) return it->second;
    SuiteConfig sub = cfg;
    sub.experiments.clear();
    for (const auto& e : cfg.experiments)
      if (e.id == id) sub.experiments.push_back(e);
    if (sub.experiments.empty()) throw std::runtime_error("no experiment " + id + " in " + config);
    SuiteOptions so;
    so.threads = threads;
    so.write_csv = false;
    auto res = run_suite(sub, so);
    if (res.exit_code == 2) throw std::runtime_error("suite error: " + res.error.dump());
    return reports.emplace(id, res.reports.at(0)).first->second;
  }
};

const Check* find_check(const VerdictReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

double last(const VerdictReport& r, const std::string& check) {
  const Check* c = find_check(r, check);
  if (!c || c->observed.empty()) return std::numeric_limits<double>::quiet_NaN();
  return c->observed.back();
}

bool nonincreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] <= v[i - 1])) return false;
  return true;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

std::vector<double> observed(const VerdictReport& r, const std::string& check) {
  const Check* c = find_check(r, check);
  return c ? c->observed : std::vector<double>{};
}

// ---- criteria -----------------------------------------------------------------------------

Outcome c1(Ctx& x) {
  Outcome o;
  auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t count = 0;
  for (const auto& s : partition_schemes(x.cfg)) {
    for (std::size_t n = 1; n <= 8; ++n) {
      auto bf = brute_force_partition_law(s, n);
      ExactModel M(s, n);
      double a = tv_with_deficit(M.law_Nn(), bf.N), b = tv_maps(size_multiset_law(M), bf.multiset);
      worst = std::max({worst, a, b});
      o.need(a <= 1e-12 && b <= 1e-12, s.name + " n=" + std::to_string(n));
    }
    ++count;
  }
  double t = seconds_since(t0);
  o.need(t < 10.0, "runtime " + g(t) + " s");
  o.note(std::to_string(count) + " schemes, max TV " + g(worst) + ", " + g(t) + " s");
  return o;
}

Outcome c2(Ctx& x) {
  Outcome o;
  auto t0 = Clock::now();
  double worst = 0.0;
  for (const char* name : {"bell", "A", "B", "C", "D", "E"}) {
    const auto& s = x.cfg.schemes.at(name);
    ExactModel M(s, 200);
    auto pf = M.partition_function();
    auto c = compose(s.v, s.w, 200);
    for (std::size_t m = 1; m <= 200; ++m) {
      if (c[m] == 0.0 && pf[m] == 0.0) continue;
      double rel = std::abs(pf[m] / c[m] - 1.0);
      worst = std::max(worst, rel);
      if (!(rel <= 1e-10)) o.need(false, std::string(name) + " m=" + std::to_string(m));
    }
    if (std::string(name) == "bell") {
      o.need(std::abs(pf[3] / (5.0 / 6.0) - 1.0) <= 1e-10, "bell u_3 = 5/6");
      o.need(std::abs(pf[4] / (15.0 / 24.0) - 1.0) <= 1e-10, "bell u_4 = 15/24");
    }
  }
  double t = seconds_since(t0);
  o.need(t < 5.0, "runtime " + g(t) + " s");
  o.note("max rel " + g(worst) + ", " + g(t) + " s");
  return o;
}

Outcome c3(Ctx& x) {
  Outcome o;
  double worst = 0.0;
  for (const auto& s : partition_schemes(x.cfg)) {
    ExactModel M(s, 500);
    auto N = M.law_Nn();
    auto P = M.prefix(1).joint[0];
    auto D = M.giant_deficit();
    for (double t : {0.5, 2.0}) {
      ExactModel T(tilt_scheme(s, t), 500);
      double d = std::max({max_abs_diff(N.pmf, T.law_Nn().pmf), max_abs_diff(P, T.prefix(1).joint[0]),
                           max_abs_diff(D.pmf, T.giant_deficit().pmf)});
      worst = std::max(worst, d);
      o.need(d <= 1e-12, s.name + " t=" + g(t) + " diff " + g(d));
    }
  }
  o.note("max diff " + g(worst));
  return o;
}

Outcome c4(Ctx&) {
  Outcome o;
  double worst = 0.0;
  std::size_t points = 0;
  auto cmp = [&](const StableParams& p, double xv) {
    SeriesEval s = stable_density_series_eval(p, xv);
    if (!s.used_series) return;  // cancellation zone
    double inv = stable_density_inversion(p, xv, 1e-14);
    double rel = std::abs(s.value - inv) / std::max(std::abs(inv), 1e-300);
    worst = std::max(worst, rel);
    ++points;
    o.need(rel <= 1e-6, "alpha=" + g(p.alpha) + " x=" + g(xv));
  };
  StableParams dense{1.5, dense_gamma(1.5), -1.0, 0.0};
  for (double xv = -4.0; xv <= 4.0; xv += 0.25) cmp(dense, xv);
  StableParams pos = DiluteParams{0.5, 1.5, 1.0}.stable();
  for (double xv : {0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0}) cmp(pos, xv);
  double h0 = 1.0 / (2.0 * std::sqrt(M_PI));
  o.need(dense_h(2.0, 0.0) == h0, "h(0) = 1/(2 sqrt(pi))");
  // E exp(-t X) = exp(-t^alpha) for the unit positive law
  boost::math::quadrature::exp_sinh<double> es;
  double lworst = 0.0;
  for (double alpha : {0.5, 0.7}) {
    DiluteParams p{alpha, 1.5, 1.0};
    for (double t : {0.5, 1.0, 2.0}) {
      double L = es.integrate([&](double z) { return std::exp(-t * z) * dilute_f(p, z); }, 0.0,
                              std::numeric_limits<double>::infinity(), 1e-12);
      double rel = std::abs(L / std::exp(-std::pow(t, alpha)) - 1.0);
      lworst = std::max(lworst, rel);
      o.need(rel <= 1e-6, "Laplace alpha=" + g(alpha) + " t=" + g(t));
    }
  }
  o.note(std::to_string(points) + " grid points, max rel " + g(worst) + ", Laplace max rel " + g(lworst));
  return o;
}

Outcome c5(Ctx& x) {
  Outcome o;
  const auto& A = x.report("llt_A");
  const auto& B = x.report("llt_B");
  auto a = observed(A, "llt_window"), b = observed(B, "llt_window");
  o.need(A.n_values.back() == 4000 && a.size() == 3, "ladder {1000, 2000, 4000}");
  o.need(a.back() < 0.05, "A at 4000: " + g(a.back()));
  o.need(nonincreasing(a), "A nonincreasing");
  o.need(b.back() < 0.08, "B: " + g(b.back()));
  o.need(A.runtime_s < 120.0 && B.runtime_s < 120.0, "runtime");
  o.note("A " + g(a[0]) + " > " + g(a[1]) + " > " + g(a[2]) + ", B " + g(b.back()) + ", " + g(A.runtime_s) + " s / " +
         g(B.runtime_s) + " s");
  return o;
}

Outcome c6(Ctx& x) {
  Outcome o;
  const auto& r = x.report("extremes_B");
  double ks = last(r, "frechet_ks");
  o.need(r.n_values.back() == 3000, "n = 3000");
  o.need(x.spec("extremes_B").replicates >= 10000, "10^4 replicates");
  o.need(ks < 0.1, "KS " + g(ks));
  o.need(r.runtime_s < 300.0, "runtime");
  o.note("KS " + g(ks) + ", " + g(r.runtime_s) + " s");
  return o;
}

Outcome c7(Ctx& x) {
  Outcome o;
  const auto& r = x.report("prefix_A");
  auto v = observed(r, "tv_m1");
  o.need(strictly_decreasing(v), "decreasing");
  o.need(v.back() < 0.05, "final " + g(v.back()));
  const auto& neg = x.report("prefix_identity_outer");
  o.need(!neg.pass, "negative control reported FAIL");
  o.note("TV " + g(v[0]) + " > " + g(v[1]) + " > " + g(v[2]) + ", control " + (neg.pass ? "PASS" : "FAIL"));
  return o;
}

Outcome c8(Ctx& x) {
  Outcome o;
  const auto& r = x.report("convergent_C");
  double a = last(r, "tv_N"), b = last(r, "tv_deficit");
  o.need(r.n_values.back() == 2000, "n = 2000");
  o.need(a < 0.1, "TV(N_n, Nhat) " + g(a));
  o.need(b < 0.1, "TV deficit " + g(b));
  o.need(r.runtime_s < 180.0, "runtime");
  o.note("TV(N) " + g(a) + ", TV(deficit) " + g(b) + ", " + g(r.runtime_s) + " s");
  return o;
}

Outcome c9(Ctx& x) {
  Outcome o;
  const auto& r = x.report("mixture_D");
  double pe = r.details["P_E_n"].back().get<double>(), p = r.details["p"].get<double>(),
         pf = r.details["p_frac"].get<double>();
  double d = std::min(std::abs(pe - p), std::abs(pe - pf));
  o.need(r.n_values.back() == 4000, "n = 4000");
  o.need(d < 0.05, "min distance " + g(d));
  auto cl = r.details["conditional_llt"].get<std::vector<double>>();
  o.need(nonincreasing(cl), "conditional LLT nonincreasing");
  o.note("P(E_n) " + g(pe) + ", winner " + r.details["winner"].get<std::string>() + " (distance " + g(d) + ")");
  return o;
}

Outcome c10(Ctx& x) {
  Outcome o;
  const auto& r = x.report("dilute_E");
  double llt = last(r, "llt"), ks = last(r, "ks_Z"), lp = last(r, "mixed_poisson_chi2");
  double pp = std::numeric_limits<double>::quiet_NaN();
  for (const auto& c : r.checks)
    if (c.name.rfind("pp_mean_0.4", 0) == 0) pp = c.observed.back();
  double f2 = last(r, "pp_factorial2");
  o.need(r.n_values.back() == 5000, "n = 5000");
  o.need(llt < 0.1, "LLT " + g(llt));
  o.need(ks < 0.1, "KS " + g(ks));
  o.need(lp < 3.0, "chi-square p " + g(std::pow(10.0, -lp)));
  o.need(pp <= 0.1, "point process mean rel " + g(pp));
  o.need(f2 <= 0.2, "factorial moment rel " + g(f2));
  o.need(r.runtime_s < 900.0, "runtime");
  o.note("LLT " + g(llt) + ", KS " + g(ks) + ", p " + g(std::pow(10.0, -lp)) + ", mean rel " + g(pp) +
         ", m2 rel " + g(f2) + ", " + g(r.runtime_s) + " s");
  return o;
}

Outcome c11(Ctx& x) {
  Outcome o;
  for (const char* id : {"extended_h_light", "extended_h_heavy", "extended_h_balanced", "extended_h_unit"}) {
    const auto& r = x.report(id);
    o.need(r.n_values.back() == 1000, std::string(id) + " n = 1000");
    for (const auto& c : r.checks) {
      if (c.metric != "TV" && c.metric != "abs-error") continue;
      o.need(c.observed.back() < 0.1, std::string(id) + " " + c.name + " " + g(c.observed.back()));
    }
  }
  const auto& p = x.report("product_symmetric");
  auto freq = p.details["giant_index_frequency"].get<std::vector<double>>();
  double R = p.details["replicates"].get<double>();
  double sd = std::sqrt(0.25 / R);
  o.need(R >= 10000, "10^4 samples");
  for (double f : freq) o.need(std::abs(f - 0.5) <= 2.0 * sd, "p_k " + g(f) + " vs 1/2 +- " + g(2 * sd));
  o.note("product frequencies " + g(freq[0]) + ", " + g(freq[1]) + " (2 sd " + g(2 * sd) + ")");
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome c12(Ctx& x) {
  Outcome o;
  if (!fs::exists(x.golden)) {
    o.need(false, "missing " + x.golden);
    return o;
  }
  std::string want = slurp(x.golden);
  auto base = fs::temp_directory_path() / ("gibbs_accept_" + std::to_string(::getpid()));
  for (int run = 1; run <= 2; ++run) {
    SuiteOptions so;
    so.out_dir = (base / ("run" + std::to_string(run))).string();
    so.threads = x.threads;
    so.write_csv = false;
    run_suite_file(x.config, so);
    std::string got = slurp(fs::path(so.out_dir) / "verdicts.json");
    o.need(got == want, "run " + std::to_string(run) + " differs from " + x.golden);
  }
  fs::remove_all(base);
  o.note("two runs against " + fs::path(x.golden).filename().string());
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  Ctx x;
  x.config = std::string(GIBBS_SOURCE_DIR) + "/configs/bundled_suite.json";
  x.golden = std::string(GIBBS_SOURCE_DIR) + "/golden/verdicts.json";
  std::vector<int> only;
  app.add_option("--config", x.config);
  app.add_option("--golden", x.golden);
  app.add_option("--only", only, "criterion numbers")->check(CLI::Range(1, 12));
  app.add_option("--threads", x.threads);
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome(Ctx&)>>> criteria = {
      {"oracle equivalence, n <= 8", c1},
      {"dual-path partition function, n <= 200", c2},
      {"tilting invariance, n = 500", c3},
      {"stable density cross-validation", c4},
      {"dense LLT, schemes A and B", c5},
      {"Frechet largest jump, scheme B", c6},
      {"prefix independence, scheme A", c7},
      {"convergent case, scheme C", c8},
      {"mixture case, scheme D", c9},
      {"dilute case, scheme E", c10},
      {"extended schemes and product", c11},
      {"determinism against golden verdicts", c12},
  };
  std::set<int> sel(only.begin(), only.end());
  bool all = true;
  try {
    x.cfg = load_config(x.config);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config: %s\n", e.what());
    return 2;
  }
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    int k = int(i) + 1;
    if (!sel.empty() && !sel.count(k)) continue;
    Outcome o;
    try {
      o = criteria[i].second(x);
    } catch (const std::exception& e) {
      o.pass = false;
      o.info = std::string("error: ") + e.what();
    }
    all = all && o.pass;
    std::printf("[%2d] %s  %s  (%s)\n", k, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(), o.info.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
