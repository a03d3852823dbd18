#include "gibbs/limit_laws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "gibbs/numerics.hpp"
#include "gibbs/weightspec.hpp"

namespace gibbs {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCancelLimit = 1e6;

using boost::math::quadrature::exp_sinh;
using boost::math::quadrature::gauss_kronrod;
using boost::math::quadrature::tanh_sinh;

// envelope exponent A(t) and phase Phi(t) with phi(t) = exp(-A(t) + i Phi(t)) for t > 0
struct CfParts {
  StableParams p;
  double ga;  // gamma^alpha
  double tn;  // tan(pi alpha / 2)

  explicit CfParts(const StableParams& q) : p(q) {
    ga = std::pow(q.gamma, q.alpha);
    tn = q.alpha == 1.0 ? 0.0 : std::tan(kPi * q.alpha / 2.0);
  }
  double A(double t) const { return p.alpha == 1.0 ? p.gamma * t : ga * std::pow(t, p.alpha); }
  double Phi(double t) const {
    if (p.alpha == 1.0) return t > 0.0 ? -p.gamma * t * p.beta * (2.0 / kPi) * std::log(t) + p.delta * t : 0.0;
    return ga * std::pow(t, p.alpha) * p.beta * tn + p.delta * t;
  }
  double dPhi(double t) const {
    if (p.alpha == 1.0) return -p.gamma * p.beta * (2.0 / kPi) * (std::log(std::max(t, 1e-300)) + 1.0) + p.delta;
    return p.alpha * ga * std::pow(std::max(t, 1e-300), p.alpha - 1.0) * p.beta * tn + p.delta;
  }
};

// Integral over t in (0, inf) of g(t), where |g| <= exp(-A(t)) * (1 + 1/t) and the phase speed
// is |dPhi(t) - x|. Panels follow the local oscillation.
template <class G>
double oscillatory_integral(const CfParts& cf, double x, G g, bool singular_origin) {
  const StableParams& p = cf.p;
  double scale = 1.0 / p.gamma;
  double t_end = std::pow(45.0, 1.0 / p.alpha) * scale;
  NeumaierSum acc;
  double a = 0.0;
  double first = std::min(scale, kPi / (std::abs(x - p.delta) + 1e-300)) * 0.5;
  {
    tanh_sinh<double> ts;
    double v = ts.integrate(g, 0.0, first, 1e-14);
    acc.add(v);
    a = first;
  }
  (void)singular_origin;
  std::size_t panels = 0;
  while (a < t_end) {
    double speed = std::abs(cf.dPhi(a) - x) + std::abs(cf.dPhi(a * 1.5) - x);
    double h = std::min({kPi / std::max(speed, 1e-300), a, t_end - a + 1e-12});
    h = std::max(h, 1e-6 * scale);
    double err = 0.0;
    double v = gauss_kronrod<double, 61>::integrate(g, a, a + h, 0, 0.0, &err);
    acc.add(v);
    a += h;
    if (++panels > 20000000) throw Error(Error::Kind::numeric, "stable inversion did not converge");
  }
  return acc.value();
}

double lgam(double x) { return std::lgamma(x); }

// density of X(gamma0, -1, 0), 1 < alpha < 2
SeriesEval h_series(double alpha, double x) {
  SeriesEval r;
  NeumaierSum s;
  double maxm = 0.0, prev = kInf;
  double lx = x == 0.0 ? -kInf : std::log(std::abs(x));
  double sx = x < 0.0 ? -1.0 : 1.0;
  for (int k = 1; k <= 5000; ++k) {
    double m = k == 1 ? std::exp(lgam(1.0 / alpha + 1.0))
                      : (x == 0.0 ? 0.0 : std::exp(lgam(k / alpha + 1.0) - lgam(k + 1.0) + (k - 1) * lx));
    double sgn = (k % 2 ? -1.0 : 1.0) * ((k - 1) % 2 ? sx : 1.0);
    s.add(m * sgn * std::sin(-k * kPi / alpha));
    maxm = std::max(maxm, m);
    r.terms = k;
    if (x == 0.0) break;
    if (m < prev && (m <= 1e-17 * std::abs(s.value()) || m < 1e-300)) break;
    prev = m;
  }
  r.value = s.value() / kPi;
  r.cancellation = r.value != 0.0 ? maxm / std::abs(s.value()) : kInf;
  return r;
}

// density of the positive stable law with E exp(-tX) = exp(-t^alpha), 0 < alpha < 1
SeriesEval g_series(double alpha, double u) {
  SeriesEval r;
  if (u <= 0.0) {
    r.value = 0.0;
    return r;
  }
  NeumaierSum s;
  double maxm = 0.0, prev = kInf;
  double lu = std::log(u);
  for (int k = 1; k <= 5000; ++k) {
    double m = std::exp(lgam(k * alpha + 1.0) - lgam(k + 1.0) - (k * alpha + 1.0) * lu);
    s.add((k % 2 ? 1.0 : -1.0) * m * std::sin(k * kPi * alpha));
    maxm = std::max(maxm, m);
    r.terms = k;
    if (m < prev && (m <= 1e-17 * std::abs(s.value()) || m < 1e-300)) break;
    prev = m;
  }
  r.value = s.value() / kPi;
  r.cancellation = r.value != 0.0 ? maxm / std::abs(s.value()) : kInf;
  return r;
}


// int_lo^up (R - y)^e y^(-alpha-1) dy, e > -1; s = (R - y)^(e+1) leaves a bounded integrand
double edge_integral(double R, double e, double alpha, double lo, double up, double tol) {
  double k = 1.0 / (e + 1.0);
  double s0 = std::pow(std::max(R - up, 0.0), e + 1.0), s1 = std::pow(R - lo, e + 1.0);
  if (!(s1 > s0)) return 0.0;
  return k * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                 [&](double t) { return std::pow(R - std::pow(t, k), -alpha - 1.0); }, s0, s1, 15, tol);
}

}  // namespace

void StableParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw Error(Error::Kind::invalid_argument, "stable alpha must lie in (0, 2]");
  if (!(gamma > 0.0)) throw Error(Error::Kind::invalid_argument, "stable gamma must be positive");
  if (!(beta >= -1.0 && beta <= 1.0)) throw Error(Error::Kind::invalid_argument, "stable beta must lie in [-1, 1]");
  if (!std::isfinite(delta)) throw Error(Error::Kind::invalid_argument, "stable delta must be finite");
}

std::complex<double> stable_cf(const StableParams& p, double t) {
  p.validate();
  if (t == 0.0) return {1.0, 0.0};
  double at = std::abs(t), sg = t > 0 ? 1.0 : -1.0;
  std::complex<double> e;
  if (p.alpha == 1.0) {
    e = -p.gamma * at * std::complex<double>(1.0, p.beta * (2.0 / kPi) * sg * std::log(at));
  } else {
    double ga = std::pow(p.gamma, p.alpha) * std::pow(at, p.alpha);
    e = -ga * std::complex<double>(1.0, -p.beta * sg * std::tan(kPi * p.alpha / 2.0));
  }
  e += std::complex<double>(0.0, p.delta * t);
  return std::exp(e);
}

double stable_density_inversion(const StableParams& p, double x, double abs_tol) {
  p.validate();
  (void)abs_tol;
  CfParts cf(p);
  auto g = [&](double t) {
    if (t <= 0.0) return 1.0;
    return std::exp(-cf.A(t)) * std::cos(cf.Phi(t) - x * t);
  };
  double v = oscillatory_integral(cf, x, g, p.alpha < 1.0) / kPi;
  return std::max(v, 0.0);
}

double stable_cdf_inversion(const StableParams& p, double x) {
  p.validate();
  CfParts cf(p);
  auto g = [&](double t) {
    if (t <= 0.0) return cf.p.alpha > 1.0 ? (cf.p.delta - x) : 0.0;
    return std::exp(-cf.A(t)) * std::sin(cf.Phi(t) - x * t) / t;
  };
  double v = 0.5 - oscillatory_integral(cf, x, g, true) / kPi;
  return std::clamp(v, 0.0, 1.0);
}

SeriesEval stable_density_series_eval(const StableParams& p, double x) {
  p.validate();
  SeriesEval r;
  if (p.alpha == 2.0) {
    double z = (x - p.delta) / p.gamma;
    r.value = std::exp(-z * z / 4.0) / (2.0 * std::sqrt(kPi) * p.gamma);
    return r;
  }
  if (p.alpha == 1.0 || std::abs(p.beta) != 1.0)
    throw Error(Error::Kind::invalid_argument, "series density needs beta = +-1 and alpha != 1");
  if (p.alpha < 1.0) {
    double xs = p.beta > 0 ? x - p.delta : -(x - p.delta);
    double lam = std::pow(p.gamma, p.alpha) / std::cos(kPi * p.alpha / 2.0);
    double sc = std::pow(lam, 1.0 / p.alpha);
    if (xs <= 0.0) {
      r.value = 0.0;
      return r;
    }
    r = g_series(p.alpha, xs / sc);
    r.value /= sc;
  } else {
    double xs = p.beta < 0 ? x - p.delta : -(x - p.delta);
    double g0 = dense_gamma(p.alpha);
    r = h_series(p.alpha, xs * g0 / p.gamma);
    r.value *= g0 / p.gamma;
  }
  if (!(r.cancellation <= kCancelLimit)) {
    r.value = stable_density_inversion(p, x);
    r.used_series = false;
  }
  r.value = std::max(r.value, 0.0);
  return r;
}

double stable_density_series(const StableParams& p, double x) { return stable_density_series_eval(p, x).value; }

double dense_gamma(double alpha) { return std::pow(-std::cos(kPi * alpha / 2.0), 1.0 / alpha); }

double dense_h(double alpha, double x) {
  return stable_density_series(StableParams{alpha, dense_gamma(alpha), -1.0, 0.0}, x);
}

double stable_moment(double alpha, double lambda, double s) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Error::Kind::invalid_argument, "stable_moment needs 0 < alpha < 1");
  if (!(s < alpha)) throw Error(Error::Kind::invalid_argument, "stable_moment needs s < alpha");
  double a1 = 1.0 - s / alpha, a2 = 1.0 - s;
  if (a2 <= 0.0 && a2 == std::floor(a2)) return 0.0;  // 1/Gamma at a pole
  return std::pow(lambda, s / alpha) * gamma_fn(a1) / gamma_fn(a2);
}

void DiluteParams::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Error::Kind::invalid_argument, "dilute alpha must lie in (0, 1)");
  if (!(b > 1.0 && b < 2.0)) throw Error(Error::Kind::invalid_argument, "dilute b must lie in (1, 2)");
  if (!(lambda > 0.0)) throw Error(Error::Kind::invalid_argument, "dilute lambda must be positive");
}

StableParams DiluteParams::stable() const {
  return {alpha, std::pow(lambda * std::cos(kPi * alpha / 2.0), 1.0 / alpha), 1.0, 0.0};
}

double dilute_f(const DiluteParams& p, double x) {
  p.validate();
  if (x <= 0.0) return 0.0;
  if (p.alpha == 0.5) {
    // Levy law in closed form; avoids the cancellation zone of the series near 0
    double l = p.lambda;
    return l / (2.0 * std::sqrt(kPi)) * std::pow(x, -1.5) * std::exp(-l * l / (4.0 * x));
  }
  double sc = std::pow(p.lambda, 1.0 / p.alpha);
  SeriesEval r = g_series(p.alpha, x / sc);
  if (r.cancellation <= kCancelLimit) return std::max(r.value / sc, 0.0);
  return stable_density_inversion(p.stable(), x);
}

double dilute_Z_density(const DiluteParams& p, double x) {
  p.validate();
  if (!(x > 0.0) || std::isinf(x)) return 0.0;
  double E = stable_moment(p.alpha, p.lambda, p.alpha * (p.b - 1.0));
  double lx = std::log(x);
  double logf;
  if (p.alpha == 0.5) {
    // log of the Levy density at u = x^-2, kept in logs since f underflows while x^-b-2 overflows
    double l = p.lambda;
    logf = std::log(l / (2.0 * std::sqrt(kPi))) + 3.0 * lx - l * l * x * x / 4.0;
  } else {
    double f = dilute_f(p, std::exp(-lx / p.alpha));
    if (f == 0.0) return 0.0;
    logf = std::log(f);
  }
  return std::exp(logf + (-p.b - 1.0 / p.alpha) * lx) / (p.alpha * E);
}

double dilute_Z_moment(const DiluteParams& p, double r) {
  p.validate();
  if (!(r > p.b - 2.0)) throw Error(Error::Kind::invalid_argument, "dilute_Z_moment needs r > b - 2");
  double num = gamma_fn(2.0 - p.b + r) * gamma_fn(1.0 - p.alpha * (p.b - 1.0));
  double den = gamma_fn(2.0 - p.b) * gamma_fn(1.0 - p.alpha * (p.b - r - 1.0));
  return std::pow(p.lambda, -r) * num / den;
}

double dilute_mixed_poisson_pmf(const DiluteParams& p, double upsilon, unsigned k) {
  p.validate();
  double lk = std::lgamma(k + 1.0);
  auto g = [&](double z) {
    if (z <= 0.0) return 0.0;
    double d = dilute_Z_density(p, z);
    if (d == 0.0) return 0.0;
    return d * std::exp(k * std::log(upsilon * z) - upsilon * z - lk);
  };
  tanh_sinh<double> ts;
  double lo = ts.integrate(g, 0.0, 1.0, 1e-12);
  exp_sinh<double> es;
  double hi = es.integrate([&](double s) { return g(1.0 + s); }, 0.0, kInf, 1e-12);
  return lo + hi;
}

FrechetLaw::FrechetLaw(double mu, double alpha, unsigned j) : alpha_(alpha), j_(j) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw Error(Error::Kind::invalid_argument, "Frechet limit needs 1 < alpha < 2");
  if (j == 0) throw Error(Error::Kind::invalid_argument, "order statistic index starts at 1");
  // Gamma(1 - alpha) < 0 here, so -mu^alpha / Gamma(1 - alpha) > 0
  kappa_ = -std::pow(mu, alpha) / gamma_fn(1.0 - alpha);
}

double FrechetLaw::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  double lam = kappa_ * std::pow(x, -alpha_);
  if (j_ == 1) return std::exp(-lam);
  return boost::math::gamma_q(static_cast<double>(j_), lam);
}

double FrechetLaw::density(double x) const {
  if (x <= 0.0) return 0.0;
  double lam = kappa_ * std::pow(x, -alpha_);
  double lp = std::log(alpha_ * kappa_) - (alpha_ + 1.0) * std::log(x) + (j_ - 1.0) * std::log(lam) -
              std::lgamma(static_cast<double>(j_)) - lam;
  return std::exp(lp);
}

double gumbel_cdf(double x) { return std::exp(-std::exp(-x)); }

double pp_intensity(double alpha, double b, double x) {
  if (!(x > 0.0 && x <= 1.0)) throw Error(Error::Kind::invalid_argument, "intensity lives on (0, 1]");
  double c = alpha * (2.0 - b);
  if (x == 1.0 && c < 1.0) return kInf;
  double lb = std::lgamma(1.0 - alpha) + std::lgamma(c) - std::lgamma(1.0 - alpha + c);
  return std::exp(-(alpha + 1.0) * std::log(x) + (c - 1.0) * std::log1p(-x) - lb);
}

double pp_mean_count(double alpha, double b, double x) {
  if (!(x > 0.0)) return kInf;
  if (x >= 1.0) return 0.0;
  double c = alpha * (2.0 - b);
  double lb = std::lgamma(1.0 - alpha) + std::lgamma(c) - std::lgamma(1.0 - alpha + c);
  return edge_integral(1.0, c - 1.0, alpha, x, 1.0, 1e-14) * std::exp(-lb);
}

double pp_factorial_moment(double alpha, double b, double lo, double hi, unsigned m) {
  if (m != 1 && m != 2) throw Error(Error::Kind::invalid_argument, "factorial moments only for m = 1, 2");
  if (!(lo >= 0.0 && hi <= 1.0 && lo < hi)) throw Error(Error::Kind::invalid_argument, "interval must lie in [0, 1]");
  if (lo == 0.0) return kInf;
  double md = m;
  double pre = md * std::log(alpha / std::abs(gamma_fn(1.0 - alpha))) + std::lgamma(1.0 + alpha * (1.0 - b)) +
               std::lgamma(md + 2.0 - b) - std::lgamma(1.0 + alpha * (md + 1.0 - b)) - std::lgamma(2.0 - b);
  double ex = alpha * (md + 1.0 - b) - 1.0;
  tanh_sinh<double> ts;
  double val;
  if (m == 1) {
    val = edge_integral(1.0, ex, alpha, lo, hi, 1e-14);
  } else {
    double top = std::min(hi, 1.0 - lo);
    if (top <= lo) return 0.0;
    auto inner = [&](double y1) {
      double up = std::min(hi, 1.0 - y1);
      if (up <= lo) return 0.0;
      double v = edge_integral(1.0 - y1, ex, alpha, lo, up, 1e-12);
      return v * std::pow(y1, -alpha - 1.0);
    };
    val = ts.integrate(inner, lo, top, 1e-9);
  }
  return std::exp(pre) * val;
}

}  // namespace gibbs
