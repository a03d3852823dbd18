#include <doctest.h>

#include <cmath>
#include <complex>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include "gibbs/limit_laws.hpp"
#include "gibbs/numerics.hpp"
#include "gibbs/sampler.hpp"

using namespace gibbs;

namespace {
const double kLambdaE = std::sqrt(M_PI) / (0.5 * boost::math::zeta(1.5));
}

TEST_CASE("stable_cf") {
  StableParams p{1.7, 0.8, -1.0, 0.3};
  CHECK(std::abs(stable_cf(p, 0.0) - std::complex<double>(1.0, 0.0)) < 1e-15);
  StableParams c{1.0, 1.0, 1.0, 0.0};
  CHECK(std::abs(stable_cf(c, 1.0) - std::complex<double>(std::exp(-1.0), 0.0)) < 1e-15);
  // Gaussian: exp(-t^2) for gamma = 1
  StableParams g{2.0, 1.0, 0.0, 0.0};
  CHECK(stable_cf(g, 1.3).real() == doctest::Approx(std::exp(-1.69)).epsilon(1e-14));
}

TEST_CASE("Gaussian case h(0) = 1/(2 sqrt(pi)) exactly") {
  double h0 = 1.0 / (2.0 * std::sqrt(M_PI));
  CHECK(dense_h(2.0, 0.0) == h0);
  CHECK(stable_density_series({2.0, 1.0, -1.0, 0.0}, 0.0) == h0);
  CHECK(stable_density_inversion({2.0, 1.0, 0.0, 0.0}, 0.0) == doctest::Approx(h0).epsilon(1e-10));
  CHECK(dense_h(2.0, 1.5) == doctest::Approx(h0 * std::exp(-1.5 * 1.5 / 4.0)).epsilon(1e-15));
}

TEST_CASE("series against inversion, alpha = 3/2") {
  StableParams p{1.5, dense_gamma(1.5), -1.0, 0.0};
  for (double x = -3.0; x <= 2.0; x += 0.5) {
    SeriesEval s = stable_density_series_eval(p, x);
    if (!s.used_series) continue;
    CHECK(s.value == doctest::Approx(stable_density_inversion(p, x, 1e-13)).epsilon(1e-6));
  }
  // x = 10 sits in the light tail; both paths must agree there too
  double a = stable_density_series(p, 10.0), b = stable_density_inversion(p, 10.0, 1e-30);
  CHECK(std::abs(a - b) <= 1e-6 * std::max(b, 1e-300) + 1e-20);
}

TEST_CASE("series against inversion, alpha = 1/2 spectrally positive") {
  StableParams p = DiluteParams{0.5, 1.5, 1.0}.stable();
  for (double x : {0.1, 0.3, 1.0, 3.0, 10.0}) {
    double a = stable_density_series(p, x), b = stable_density_inversion(p, x, 1e-14);
    CHECK(a == doctest::Approx(b).epsilon(1e-6));
  }
  CHECK(stable_density_series(p, -1.0) == 0.0);
}

TEST_CASE("Levy closed form against the general path") {
  DiluteParams p{0.5, 1.5, 1.0};
  for (double x : {0.2, 1.0, 5.0}) {
    double l = 1.0;
    double levy = l / (2.0 * std::sqrt(M_PI)) * std::pow(x, -1.5) * std::exp(-l * l / (4.0 * x));
    CHECK(dilute_f(p, x) == doctest::Approx(levy).epsilon(1e-14));
    CHECK(stable_density_inversion(p.stable(), x, 1e-14) == doctest::Approx(levy).epsilon(1e-6));
  }
}

TEST_CASE("Laplace transform of the positive stable law") {
  // E exp(-t X) = exp(-lambda t^alpha)
  DiluteParams p{0.5, 1.5, 1.0};
  boost::math::quadrature::exp_sinh<double> es;
  for (double t : {0.5, 1.0, 2.0}) {
    double L = es.integrate([&](double x) { return std::exp(-t * x) * dilute_f(p, x); }, 0.0,
                            std::numeric_limits<double>::infinity(), 1e-12);
    CHECK(L == doctest::Approx(std::exp(-std::pow(t, 0.5))).epsilon(1e-6));
  }
  // the same through the series/inversion path at alpha = 0.7
  DiluteParams q{0.7, 1.5, 1.0};
  double t = 1.0;
  double L = es.integrate([&](double x) { return std::exp(-t * x) * dilute_f(q, x); }, 0.0,
                          std::numeric_limits<double>::infinity(), 1e-10);
  CHECK(L == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
}

TEST_CASE("stable_moment") {
  CHECK(stable_moment(0.5, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(stable_moment(0.5, 1.0, -1.0) == doctest::Approx(2.0).epsilon(1e-14));
  DiluteParams p{0.5, 1.5, kLambdaE};
  boost::math::quadrature::exp_sinh<double> es;
  double q = es.integrate([&](double x) { return std::pow(x, 0.25) * dilute_f(p, x); }, 0.0,
                          std::numeric_limits<double>::infinity(), 1e-12);
  CHECK(stable_moment(0.5, kLambdaE, 0.25) == doctest::Approx(q).epsilon(1e-5));
}

TEST_CASE("Z density integrates to one and its moments match quadrature") {
  DiluteParams p{0.5, 1.5, kLambdaE};
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  // z = t^2 removes the z^(1-b) singularity at the origin
  auto mass = [&](auto&& f) {
    double lo = ts.integrate([&](double t) { return t * t > 0 ? 2 * t * f(t * t) : 0.0; }, 0.0, 1.0, 1e-12);
    double hi = es.integrate(f, 1.0, std::numeric_limits<double>::infinity(), 1e-12);
    return lo + hi;
  };
  CHECK(mass([&](double z) { return dilute_Z_density(p, z); }) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(dilute_Z_moment(p, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  double m1 = mass([&](double z) { return z * dilute_Z_density(p, z); });
  CHECK(dilute_Z_moment(p, 1.0) == doctest::Approx(m1).epsilon(1e-5));
  double r = p.b - 2.0 + 0.05;
  double mr = mass([&](double z) { return std::pow(z, r) * dilute_Z_density(p, z); });
  CHECK(std::isfinite(dilute_Z_moment(p, r)));
  CHECK(dilute_Z_moment(p, r) == doctest::Approx(mr).epsilon(1e-4));
}

TEST_CASE("Z density grows like x^(1-b) near the origin") {
  // the limit at 0+ is not 0 when b > 1; the density blows up at the rate x^(1-b)
  DiluteParams p{0.5, 1.5, kLambdaE};
  double a = dilute_Z_density(p, 1e-6), b = dilute_Z_density(p, 1e-8);
  CHECK(b / a == doctest::Approx(std::pow(1e-2, 1.0 - p.b)).epsilon(1e-3));
  CHECK(std::isfinite(dilute_Z_density(p, 1e-200)));
}

TEST_CASE("mixed Poisson pmf sums to one and P(0) = E exp(-Z)") {
  DiluteParams p{0.5, 1.5, kLambdaE};
  double s = 0.0;
  for (unsigned k = 0; k < 60; ++k) s += dilute_mixed_poisson_pmf(p, 1.0, k);
  CHECK(s == doctest::Approx(1.0).epsilon(1e-8));
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  auto f = [&](double z) { return std::exp(-z) * dilute_Z_density(p, z); };
  double lo = ts.integrate([&](double t) { return t * t > 0 ? 2 * t * f(t * t) : 0.0; }, 0.0, 1.0, 1e-12);
  double hi = es.integrate(f, 1.0, std::numeric_limits<double>::infinity(), 1e-12);
  CHECK(dilute_mixed_poisson_pmf(p, 1.0, 0) == doctest::Approx(lo + hi).epsilon(1e-8));
}

TEST_CASE("Frechet law") {
  FrechetLaw W(1.5, 1.5);
  CHECK(W.cdf(1e12) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(W.cdf(0.0) == 0.0);
  // density integrates to the cdf
  double I = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double x) { return W.density(x); }, 0.5, 3.0, 15, 1e-12);
  CHECK(I == doctest::Approx(W.cdf(3.0) - W.cdf(0.5)).epsilon(1e-9));
  FrechetLaw W2(1.5, 1.5, 2);
  for (double x : {0.3, 1.0, 3.0}) CHECK(W2.cdf(x) >= W.cdf(x) - 1e-15);
  CHECK_THROWS_AS(FrechetLaw(1.5, 2.0), Error);
}

TEST_CASE("Gumbel cdf") {
  CHECK(gumbel_cdf(0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(gumbel_cdf(50.0) == doctest::Approx(1.0));
  CHECK(gumbel_cdf(-std::log(std::log(2.0))) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("point process intensity and factorial moments") {
  double a = 0.5, b = 1.5;
  // divergence at the origin
  CHECK(pp_mean_count(a, b, 1e-6) > 10 * pp_mean_count(a, b, 1e-3));
  CHECK(std::isinf(pp_factorial_moment(a, b, 0.0, 1.0, 1)));
  // m = 1 is the intensity integral
  for (double x : {0.2, 0.4}) {
    // s = (1 - y)^c flattens the endpoint singularity of the intensity at y = 1
    double c = a * (2.0 - b);
    double beta = std::exp(std::lgamma(1.0 - a) + std::lgamma(c) - std::lgamma(1.0 - a + c));
    double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                   [&](double s) { return std::pow(1.0 - std::pow(s, 1.0 / c), -a - 1.0); }, 0.0,
                   std::pow(1.0 - x, c), 15, 1e-13) /
               (c * beta);
    CHECK(pp_factorial_moment(a, b, x, 1.0, 1) == doctest::Approx(q).epsilon(1e-9));
    CHECK(pp_mean_count(a, b, x) == doctest::Approx(q).epsilon(1e-9));
  }
}

TEST_CASE("second factorial moment against Monte Carlo quadrature") {
  double a = 0.5, b = 1.5, lo = 0.4;
  double exact = pp_factorial_moment(a, b, lo, 1.0, 2);
  // prefactor as in the m = 1 case, which the intensity check above pins down
  double pre = 2.0 * std::log(a / std::abs(std::tgamma(1.0 - a))) + std::lgamma(1.0 + a * (1.0 - b)) +
               std::lgamma(4.0 - b) - std::lgamma(1.0 + a * (3.0 - b)) - std::lgamma(2.0 - b);
  double ex = a * (3.0 - b) - 1.0;
  Rng rng(12345);
  NeumaierSum acc;
  const std::size_t M = 4000000;
  double side = 1.0 - 2.0 * lo;
  for (std::size_t i = 0; i < M; ++i) {
    double y1 = lo + side * rng.uniform(), y2 = lo + side * rng.uniform();
    double r = 1.0 - y1 - y2;
    if (r > 0.0) acc.add(std::pow(r, ex) * std::pow(y1 * y2, -a - 1.0));
  }
  double mc = std::exp(pre) * acc.value() / double(M) * side * side;
  CHECK(std::abs(mc - exact) < 1e-3);
  // pairs with y >= 0.6 cannot fit under y1 + y2 <= 1
  CHECK(pp_factorial_moment(a, b, 0.6, 1.0, 2) == 0.0);
}
