#include "gibbs/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <boost/math/distributions/chi_squared.hpp>

namespace gibbs {

SignedLogGamma signed_lgamma(double x) {
  if (x <= 0.0 && x == std::floor(x)) return {std::numeric_limits<double>::infinity(), 0};
  int sg = 1;
  double l = lgamma_r(x, &sg);
  return {l, sg};
}

double gamma_fn(double x) { return std::tgamma(x); }

std::vector<double> log_factorials(std::size_t n) {
  std::vector<double> lf(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) lf[k] = std::lgamma(static_cast<double>(k) + 1.0);
  return lf;
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
  NeumaierSum s;
  std::size_t n = std::max(p.size(), q.size());
  for (std::size_t i = 0; i < n; ++i) {
    double a = i < p.size() ? p[i] : 0.0;
    double b = i < q.size() ? q[i] : 0.0;
    s.add(std::abs(a - b));
  }
  return 0.5 * s.value();
}

std::string fmt17(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}


double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double s = 0.0;
  for (int j = 1; j <= 200; ++j) {
    double t = std::exp(-2.0 * j * j * lambda * lambda);
    s += (j % 2 ? 1.0 : -1.0) * t;
    if (t < 1e-18) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

double ks_pvalue_two_sample(double d, std::size_t n1, std::size_t n2) {
  double ne = static_cast<double>(n1) * static_cast<double>(n2) / static_cast<double>(n1 + n2);
  double sq = std::sqrt(ne);
  // Stephens' small-sample correction
  return kolmogorov_q((sq + 0.12 + 0.11 / sq) * d);
}

double chi2_survival(double stat, double dof) {
  if (dof <= 0.0) return 1.0;
  if (stat <= 0.0) return 1.0;
  boost::math::chi_squared_distribution<double> dist(dof);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace gibbs
