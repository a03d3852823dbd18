// gibbs: command line front end.
//   classify | exact | laws | sample | verify, with --config, --out-dir, --seed, --threads.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

#include "gibbs/config.hpp"
#include "gibbs/exact.hpp"
#include "gibbs/limit_laws.hpp"
#include "gibbs/numerics.hpp"
#include "gibbs/phase.hpp"
#include "gibbs/sampler.hpp"
#include "gibbs/verify.hpp"

using namespace gibbs;
namespace fs = std::filesystem;

namespace {

struct Ctx {
  std::string config, out_dir, scheme;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
};

const SchemeSpec& pick_scheme(const SuiteConfig& cfg, const std::string& name) {
  if (name.empty()) {
    if (cfg.schemes.size() == 1) return cfg.schemes.begin()->second;
    throw Error(Error::Kind::config, "several schemes in the config; pick one with --scheme");
  }
  auto it = cfg.schemes.find(name);
  if (it == cfg.schemes.end()) throw Error(Error::Kind::config, "no scheme named '" + name + "'");
  return it->second;
}

// CSV either to a file under out_dir or to stdout
void emit_csv(const Ctx& c, const std::string& file, const std::vector<std::string>& header,
              const std::vector<std::vector<double>>& cols) {
  if (!c.out_dir.empty()) {
    fs::create_directories(c.out_dir);
    write_csv((fs::path(c.out_dir) / file).string(), header, cols);
    return;
  }
  for (std::size_t i = 0; i < header.size(); ++i) std::cout << (i ? "," : "") << header[i];
  std::cout << '\n';
  std::size_t rows = 0;
  for (const auto& col : cols) rows = std::max(rows, col.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < cols.size(); ++i) std::cout << (i ? "," : "") << (r < cols[i].size() ? fmt17(cols[i][r]) : "");
    std::cout << '\n';
  }
}

std::vector<double> iota_d(std::size_t n) {
  std::vector<double> v(n);
  std::iota(v.begin(), v.end(), 0.0);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gibbs partitions of composition schemes: exact laws, limits and verifiers"};
  app.require_subcommand(1);
  Ctx c;
  std::uint64_t seed_in = 0;
  app.add_option("--config", c.config, "suite or scheme config (JSON)");
  app.add_option("--out-dir", c.out_dir, "where reports and CSVs go");
  auto* seed_opt = app.add_option("--seed", seed_in, "master seed");
  app.add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);

  auto* cl = app.add_subcommand("classify", "phase and limit constants of a scheme (JSON)");
  cl->add_option("--scheme", c.scheme, "scheme name");

  auto* ex = app.add_subcommand("exact", "exact law of N_n, the largest part or the giant deficit (CSV)");
  std::size_t n = 0;
  std::string what = "N";
  ex->add_option("--scheme", c.scheme, "scheme name");
  ex->add_option("--n", n, "size")->required();
  ex->add_option("--law", what, "N | largest | deficit | prefix1")
      ->check(CLI::IsMember({"N", "largest", "deficit", "prefix1"}));

  auto* lw = app.add_subcommand("laws", "limit densities on a grid (CSV)");
  std::string family = "dense_h";
  double alpha = 2.0, lo = -5.0, hi = 5.0, b = 1.5, lambda = 1.0, mu = 1.0;
  std::size_t points = 101;
  lw->add_option("--family", family, "dense_h | dilute_Z | frechet | pp_intensity")
      ->check(CLI::IsMember({"dense_h", "dilute_Z", "frechet", "pp_intensity"}));
  lw->add_option("--alpha", alpha);
  lw->add_option("--b", b);
  lw->add_option("--lambda", lambda);
  lw->add_option("--mu", mu);
  lw->add_option("--from", lo);
  lw->add_option("--to", hi);
  lw->add_option("--points", points)->check(CLI::Range(2, 1000000));

  auto* sm = app.add_subcommand("sample", "draw partitions (one CSV row per replicate)");
  std::size_t reps = 10;
  std::string method = "exact";
  bool with_stats = false;
  sm->add_option("--scheme", c.scheme, "scheme name");
  sm->add_option("--n", n, "size")->required();
  sm->add_option("--replicates", reps);
  sm->add_option("--method", method)->check(CLI::IsMember({"exact", "rejection"}));
  sm->add_flag("--stats", with_stats, "N, K1, K2 instead of the size list");

  auto* vf = app.add_subcommand("verify", "run the experiment suite; writes verdicts.json");
  bool no_csv = false;
  vf->add_flag("--no-csv", no_csv, "skip per-experiment CSVs");

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) c.seed = seed_in;

  try {
    if (*vf) {
      if (c.config.empty()) throw Error(Error::Kind::config, "verify needs --config");
      SuiteOptions so;
      so.out_dir = c.out_dir.empty() ? "out" : c.out_dir;
      so.seed = c.seed;
      so.threads = c.threads;
      so.write_csv = !no_csv;
      SuiteResult res = run_suite_file(c.config, so);
      if (res.exit_code == 2) {
        std::cerr << dump_json17(Json{{"error", res.error}});
        return 2;
      }
      for (const auto& r : res.reports)
        std::cout << r.id << ' ' << (r.pass ? "PASS" : "FAIL") << (r.expectation_met() ? "" : "  (unexpected)")
                  << (r.error.empty() ? "" : "  " + r.error) << '\n';
      return res.exit_code;
    }
    if (*lw) {
      std::vector<double> xs(points), ys(points);
      for (std::size_t i = 0; i < points; ++i) {
        double x = lo + (hi - lo) * double(i) / double(points - 1);
        xs[i] = x;
        if (family == "dense_h")
          ys[i] = dense_h(alpha, x);
        else if (family == "dilute_Z")
          ys[i] = x > 0.0 ? dilute_Z_density({alpha, b, lambda}, x) : 0.0;
        else if (family == "frechet")
          ys[i] = x > 0.0 ? FrechetLaw(mu, alpha).density(x) : 0.0;
        else
          ys[i] = x > 0.0 && x <= 1.0 ? pp_intensity(alpha, b, x) : 0.0;
      }
      emit_csv(c, family + ".csv", {"x", family}, {xs, ys});
      return 0;
    }
    if (c.config.empty()) throw Error(Error::Kind::config, "this subcommand needs --config");
    SuiteConfig cfg = load_config(c.config);
    const SchemeSpec& s = pick_scheme(cfg, c.scheme);
    if (*cl) {
      std::cout << dump_json17(phase_report_json(classify(s)));
      return 0;
    }
    if (*ex) {
      ExactModel M(s, n);
      DiscreteLaw law;
      if (what == "N")
        law = M.law_Nn();
      else if (what == "largest")
        law = M.largest_law();
      else if (what == "deficit")
        law = M.giant_deficit();
      else
        law = DiscreteLaw::from_pmf(M.prefix(1).joint[0]);
      emit_csv(c, "exact_" + what + "_" + std::to_string(n) + ".csv", {"k", "pmf"}, {iota_d(law.pmf.size()), law.pmf});
      return 0;
    }
    if (*sm) {
      std::uint64_t seed = c.seed.value_or(cfg.seed.value_or(1));
      std::optional<ExactModel> M;
      std::optional<ExactSampler> es;
      std::optional<RejectionSampler> rs;
      if (method == "exact") {
        M.emplace(s, n);
        es.emplace(*M);
      } else {
        rs.emplace(s, n);
      }
      std::ostream* os = &std::cout;
      std::ofstream f;
      if (!c.out_dir.empty()) {
        fs::create_directories(c.out_dir);
        f.open(fs::path(c.out_dir) / ("samples_" + std::to_string(n) + ".csv"));
        os = &f;
      }
      *os << (with_stats ? "replicate,N,K1,K2\n" : "replicate,sizes\n");
      for (std::size_t r = 0; r < reps; ++r) {
        PartitionSample p;
        if (es) {
          Rng rng = Rng::stream(seed, r);
          p = es->draw(rng);
        } else {
          p = rs->draw(seed, r);
        }
        *os << r << ',';
        if (with_stats) {
          SampleStats st = stats(p);
          *os << p.N() << ',' << (st.order_stats.empty() ? 0 : st.order_stats[0]) << ','
              << (st.order_stats.size() > 1 ? st.order_stats[1] : 0) << '\n';
        } else {
          for (std::size_t i = 0; i < p.sizes.size(); ++i) *os << (i ? " " : "") << p.sizes[i];
          *os << '\n';
        }
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << dump_json17(Json{{"error", {{"kind", kind_name(e.kind())}, {"message", e.what()}}}});
    return 2;
  }
  return 0;
}
