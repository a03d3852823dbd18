// Python bindings. Schemes and configs cross the boundary as JSON text; the
// package wrapper does the dict <-> str conversion.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "gibbs/config.hpp"
#include "gibbs/exact.hpp"
#include "gibbs/limit_laws.hpp"
#include "gibbs/phase.hpp"
#include "gibbs/sampler.hpp"
#include "gibbs/verify.hpp"

namespace py = pybind11;
using namespace gibbs;

namespace {

SchemeSpec scheme_of(const std::string& text) { return parse_scheme("scheme", Json::parse(text)); }

std::string classify_json(const std::string& scheme) { return dump_json17(phase_report_json(classify(scheme_of(scheme)))); }

std::vector<double> exact_law(const std::string& scheme, std::size_t n, const std::string& law) {
  ExactModel M(scheme_of(scheme), n);
  if (law == "N") return M.law_Nn().pmf;
  if (law == "largest") return M.largest_law().pmf;
  if (law == "deficit") return M.giant_deficit().pmf;
  if (law == "prefix1") return M.prefix(1).joint[0];
  if (law == "partition_function") return M.partition_function();
  throw Error(Error::Kind::invalid_argument, "unknown law '" + law + "'");
}

std::vector<std::vector<std::size_t>> sample(const std::string& scheme, std::size_t n, std::size_t replicates,
                                             std::uint64_t seed, const std::string& method) {
  SchemeSpec s = scheme_of(scheme);
  std::vector<std::vector<std::size_t>> out;
  out.reserve(replicates);
  if (method == "exact") {
    ExactModel M(s, n);
    ExactSampler es(M);
    for (std::size_t i = 0; i < replicates; ++i) {
      Rng r = Rng::stream(seed, i);
      out.push_back(es.draw(r).sizes);
    }
  } else if (method == "rejection") {
    RejectionSampler rs(s, n);
    for (std::size_t i = 0; i < replicates; ++i) out.push_back(rs.draw(seed, i).sizes);
  } else {
    throw Error(Error::Kind::invalid_argument, "method must be exact or rejection");
  }
  return out;
}

py::tuple run_suite_json(const std::string& config, const std::string& out_dir, std::optional<std::uint64_t> seed,
                         unsigned threads, bool csv) {
  SuiteOptions so;
  so.out_dir = out_dir;
  so.seed = seed;
  so.threads = threads;
  so.write_csv = csv;
  SuiteResult r;
  {
    py::gil_scoped_release nogil;
    r = run_suite_file(config, so);
  }
  Json reports = Json::array();
  for (const auto& v : r.reports) reports.push_back(v.to_json());
  return py::make_tuple(r.exit_code, dump_json17(reports), r.error.is_null() ? std::string() : r.error.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "exact laws, samplers and limit-law verifiers for Gibbs partitions";
  py::register_exception<Error>(m, "GibbsError");

  m.def("classify", &classify_json, py::arg("scheme"));
  m.def("exact_law", &exact_law, py::arg("scheme"), py::arg("n"), py::arg("law") = "N");
  m.def("sample", &sample, py::arg("scheme"), py::arg("n"), py::arg("replicates") = 1, py::arg("seed") = 0,
        py::arg("method") = "exact");
  m.def("run_suite", &run_suite_json, py::arg("config"), py::arg("out_dir") = "", py::arg("seed") = std::nullopt,
        py::arg("threads") = 1, py::arg("csv") = true);

  m.def("dense_h", &dense_h, py::arg("alpha"), py::arg("x"));
  m.def(
      "dilute_Z_density",
      [](double alpha, double b, double lambda, double x) { return dilute_Z_density(DiluteParams{alpha, b, lambda}, x); },
      py::arg("alpha"), py::arg("b"), py::arg("lam"), py::arg("x"));
  m.def("dilute_Z_cdf", &dilute_Z_cdf, py::arg("alpha"), py::arg("b"), py::arg("lam"), py::arg("x"));
  m.def(
      "frechet_cdf", [](double mu, double alpha, double x, unsigned j) { return FrechetLaw(mu, alpha, j).cdf(x); },
      py::arg("mu"), py::arg("alpha"), py::arg("x"), py::arg("j") = 1);
  m.def("pp_intensity", &pp_intensity, py::arg("alpha"), py::arg("b"), py::arg("x"));
}
