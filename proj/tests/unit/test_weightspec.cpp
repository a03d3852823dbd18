#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/special_functions/zeta.hpp>

#include "fixtures.hpp"
#include "gibbs/series.hpp"
#include "gibbs/weightspec.hpp"

using namespace gibbs;
using boost::math::zeta;

TEST_CASE("term reads explicit and closed forms") {
  CHECK(term(WeightSequence::explicit_coeffs({0, 1, 0.5}), 2) == 0.5);
  CHECK(term(fx::power(4.0), 2) == doctest::Approx(0.0625).epsilon(1e-15));
  auto ov = WeightSequence::closed_form({1.0, 0.0}, 1.5, 1.0, 1, {{1, 0.0}});
  CHECK(term(ov, 1) == 0.0);
  CHECK(term(ov, 2) == doctest::Approx(std::pow(2.0, -1.5)));
  // log_power uses log(2 + n)
  auto lp = WeightSequence::closed_form({2.0, 1.0}, 2.0, 1.0);
  CHECK(term(lp, 1) == doctest::Approx(2.0 * std::log(3.0)));
}

TEST_CASE("series_value against zeta") {
  CHECK(series_value(fx::power(4.0), 1.0, 1e-14) == doctest::Approx(zeta(4.0)).epsilon(1e-13));
  CHECK(series_value(fx::power(1.5), 1.0, 1e-12) == doctest::Approx(zeta(1.5)).epsilon(1e-11));
  CHECK(series_value(fx::power(4.0), 0.0) == 0.0);
  auto z = WeightSequence::closed_form({1.0, 0.0}, 4.0, 1.0, 1, {}, 0.25);
  CHECK(series_value(z, 0.0) == 0.25);
  // divergence past the radius and at the radius with e <= 1
  CHECK(std::isinf(series_value(fx::power(4.0), 1.01)));
  CHECK(std::isinf(series_value(fx::power(1.0), 1.0)));
}

TEST_CASE("radius") {
  CHECK(radius(fx::power(4.0)) == 1.0);
  CHECK(std::isinf(radius(WeightSequence::explicit_coeffs({1, 2, 3}))));
  CHECK(radius(fx::power(2.0, 0.5)) == 0.5);
}

TEST_CASE("tilt") {
  auto e = WeightSequence::explicit_coeffs({0, 1, 1});
  auto t = tilt(e, 2.0);
  CHECK(t.as_explicit().coeffs == std::vector<double>{0, 2, 4});
  CHECK(radius(tilt(fx::power(3.0), 0.5)) == 2.0);
  auto same = tilt(fx::power(3.0), 1.0);
  for (std::size_t n = 0; n < 50; ++n) CHECK(term(same, n) == term(fx::power(3.0), n));
}

TEST_CASE("tilt property on random t") {
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> U(0.05, 2.0);
  auto s = fx::power(2.5, 1.3);
  for (int rep = 0; rep < 20; ++rep) {
    double t = U(g);
    auto ts = tilt(s, t);
    for (std::size_t n = 0; n <= 1000; n += 37) {
      double a = term(ts, n), b = term(s, n) * std::pow(t, double(n));
      if (b == 0.0 || !std::isfinite(b)) continue;
      CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
    double x = 0.5 * std::min(radius(ts), 1.0);
    CHECK(series_value(ts, x, 1e-14) == doctest::Approx(series_value(s, t * x, 1e-14)).epsilon(1e-12));
  }
}

TEST_CASE("series_value is monotone in t") {
  auto s = fx::power(2.5);
  double prev = 0.0;
  for (double t = 0.0; t <= 1.0; t += 0.05) {
    double v = series_value(s, t, 1e-14);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("weighted_moment") {
  CHECK(weighted_moment(fx::power(4.0), 1.0, 1, 1e-13) == doctest::Approx(zeta(3.0)).epsilon(1e-11));
  CHECK(weighted_moment(fx::power(4.0), 1.0, 0) == series_value(fx::power(4.0), 1.0));
  CHECK(std::isinf(weighted_moment(fx::power(1.5), 1.0, 1)));
}

TEST_CASE("negative inputs are rejected") {
  CHECK_THROWS_AS(WeightSequence::explicit_coeffs({0, -1}), Error);
  CHECK_THROWS_AS(WeightSequence::closed_form({-1.0, 0.0}, 2.0, 1.0), Error);
  CHECK_THROWS_AS(WeightSequence::closed_form({1.0, 0.0}, 2.0, 0.0), Error);
}

// ------------------------------------------------------------- truncated series

TEST_CASE("mul") {
  TruncatedSeries a{{1, 1}};
  CHECK(mul(a, a, 2).coeffs == std::vector<double>{1, 2, 1});
  TruncatedSeries one{{1}};
  TruncatedSeries b{{0.5, 2, 3}};
  CHECK(mul(b, one, 2).coeffs == b.coeffs);
  TruncatedSeries c{{0, 1, 1}};
  CHECK(mul(c, c, 4)[3] == 2.0);
}

TEST_CASE("mul commutes and associates") {
  TruncatedSeries a{{0.3, 1.1, 0.7, 2.0}}, b{{1.0, 0.2, 0.5}}, c{{0.0, 0.9, 0.4, 0.1}};
  auto ab = mul(a, b, 6), ba = mul(b, a, 6);
  for (std::size_t i = 0; i <= 6; ++i) CHECK(ab[i] == doctest::Approx(ba[i]).epsilon(1e-12));
  auto l = mul(mul(a, b, 6), c, 6), r = mul(a, mul(b, c, 6), 6);
  for (std::size_t i = 0; i <= 6; ++i) CHECK(l[i] == doctest::Approx(r[i]).epsilon(1e-12));
}

TEST_CASE("compose gives Bell numbers over n!") {
  auto u = compose(fx::inv_factorial(20), fx::inv_factorial(20), 8);
  CHECK(u[3] == doctest::Approx(5.0 / 6.0).epsilon(1e-14));
  CHECK(u[4] == doctest::Approx(15.0 / 24.0).epsilon(1e-14));
  CHECK(u[5] == doctest::Approx(52.0 / 120.0).epsilon(1e-14));
}

TEST_CASE("compose with identity outer series") {
  auto w = fx::power(3.0);
  auto u = compose(WeightSequence::explicit_coeffs({0, 1}), w, 30);
  for (std::size_t n = 1; n <= 30; ++n) CHECK(u[n] == doctest::Approx(term(w, n)).epsilon(1e-15));
}

TEST_CASE("compose rejects w_0 != 0") {
  auto w = WeightSequence::explicit_coeffs({1, 1});
  CHECK_THROWS_AS(compose(fx::inv_factorial(5), w, 5), Error);
}

TEST_CASE("pow_coeff") {
  auto w = WeightSequence::explicit_coeffs({0, 1, 1});
  CHECK(pow_coeff(w, 1, 2) == 1.0);
  CHECK(pow_coeff(w, 2, 3) == 2.0);
  CHECK(pow_coeff(fx::power(2.0), 5, 4) == 0.0);
}

TEST_CASE("compose under tilt scales by t^n") {
  auto v = fx::power(2.0, series_value(fx::power(4.0), 1.0));
  auto w = fx::power(4.0);
  double t = 0.7;
  auto u = compose(v, w, 100), ut = compose(v, tilt(w, t), 100);
  for (std::size_t n = 1; n <= 100; n += 9)
    CHECK(ut[n] == doctest::Approx(u[n] * std::pow(t, double(n))).epsilon(1e-12));
}
