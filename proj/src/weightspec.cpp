#include "gibbs/weightspec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "gibbs/numerics.hpp"

namespace gibbs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

double closed_log_term(const ClosedForm& cf, std::size_t n) {
  if (auto it = cf.overrides.find(n); it != cf.overrides.end())
    return it->second > 0.0 ? std::log(it->second) : -kInf;
  if (n == 0) return cf.zero_term > 0.0 ? std::log(cf.zero_term) : -kInf;
  if (n < cf.start_index) return -kInf;
  double x = static_cast<double>(n);
  return cf.L.log_value(x) - cf.exponent * std::log(x) - x * std::log(cf.rho);
}

// Regular part of a closed form at real x, with the moment shift k folded into the exponent.
struct RegularTerm {
  double logc, lam, e, logq;

  double phi(double x) const { return logc + lam * std::log(std::log(2.0 + x)) - e * std::log(x) + x * logq; }
  double operator()(double x) const { return std::exp(phi(x)); }
  double d1(double x) const { return lam / ((2.0 + x) * std::log(2.0 + x)) - e / x + logq; }
  double d2(double x) const {
    double y = 2.0 + x, l = std::log(y);
    return -lam * (l + 1.0) / (y * y * l * l) + e / (x * x);
  }
  double d3(double x) const {
    double y = 2.0 + x, l = std::log(y);
    return -lam * (l - 2.0 * (l + 1.0) * (l + 1.0)) / (y * y * y * l * l * l) - 2.0 * e / (x * x * x);
  }
};

double tail_integral(const RegularTerm& f, double N) {
  if (f.lam == 0.0 && f.logq == 0.0) return std::exp(f.logc) * std::pow(N, 1.0 - f.e) / (f.e - 1.0);
  // scale out f(N) so the quadrature sees O(1) values
  double fN = f.phi(N);
  auto g = [&](double u) {
    double x = N * (1.0 + u);
    return N * std::exp(f.phi(x) - fN);
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  double err = 0.0;
  double val = integrator.integrate(g, 0.0, std::numeric_limits<double>::infinity(), 1e-14, &err);
  if (!std::isfinite(val)) throw Error(Error::Kind::numeric, "series tail integral did not converge");
  return val * std::exp(fN);
}

// Sum_{n>=0} n^k term(n) (t/rho)^n rho^n ... i.e. sum of n^k term(n) t^n for a closed form.
double closed_sum(const ClosedForm& cf, double t, unsigned k, double tol) {
  auto head_term = [&](std::size_t n) -> double {
    if (n == 0) {
      if (k > 0) return 0.0;
      auto it = cf.overrides.find(0);
      return it != cf.overrides.end() ? it->second : cf.zero_term;
    }
    double lt = closed_log_term(cf, n);
    if (lt == -kInf) return 0.0;
    return std::exp(lt + static_cast<double>(k) * std::log(static_cast<double>(n)) +
                    static_cast<double>(n) * std::log(t));
  };
  if (t == 0.0) return head_term(0);
  double q = t / cf.rho;
  if (q > 1.0 + 1e-14) return kInf;
  bool boundary = q >= 1.0 - 1e-14;
  double e = cf.exponent - static_cast<double>(k);
  if (boundary && e <= 1.0) return kInf;

  RegularTerm f{std::log(cf.L.c), cf.L.log_exp, e, boundary ? 0.0 : std::log(q)};
  std::size_t irregular = cf.irregular_limit();

  NeumaierSum acc;
  for (std::size_t n = 0; n <= irregular; ++n) acc.add(head_term(n));
  std::size_t n = irregular + 1;

  if (q < 0.999) {
    // geometric bound on the remaining terms
    for (;; ++n) {
      double x = static_cast<double>(n);
      double fn = f(x);
      acc.add(fn);
      double r = q * std::max(1.0, std::pow((x + 1.0) / x, -e)) *
                 std::max(1.0, std::pow(std::log(3.0 + x) / std::log(2.0 + x), f.lam));
      if (r < 1.0 && fn * r / (1.0 - r) <= 0.5 * tol) break;
      if (n > 200000000) throw Error(Error::Kind::numeric, "series summation did not terminate");
    }
    return acc.value();
  }

  // Euler-Maclaurin tail for q close to 1
  std::size_t N = std::max<std::size_t>(n, f.lam == 0.0 ? 2000 : 10000);
  for (;;) {
    double x = static_cast<double>(N);
    double scale = std::abs(f.logq) + (std::abs(e) + std::abs(f.lam) + 1.0) / x;
    double est = 2.0 * f(x) * std::pow(scale, 5) / 30240.0;
    if (est <= 0.25 * tol || N > 50000000) break;
    N *= 4;
  }
  for (; n < N; ++n) acc.add(f(static_cast<double>(n)));
  double x = static_cast<double>(N);
  double fN = f(x), p1 = f.d1(x), p2 = f.d2(x), p3 = f.d3(x);
  double f1 = fN * p1;
  double f3 = fN * (p1 * p1 * p1 + 3.0 * p1 * p2 + p3);
  acc.add(tail_integral(f, x));
  acc.add(0.5 * fN);
  acc.add(-f1 / 12.0);
  acc.add(f3 / 720.0);
  return acc.value();
}

}  // namespace

const char* kind_name(Error::Kind k) {
  switch (k) {
    case Error::Kind::invalid_argument: return "invalid_argument";
    case Error::Kind::divergence: return "divergence";
    case Error::Kind::phase: return "phase";
    case Error::Kind::budget: return "budget";
    case Error::Kind::numeric: return "numeric";
    case Error::Kind::config: return "config";
  }
  return "unknown";
}

double SlowVaryingFactor::operator()(double n) const {
  if (log_exp == 0.0) return c;
  return c * std::pow(std::log(2.0 + n), log_exp);
}

double SlowVaryingFactor::log_value(double n) const {
  if (log_exp == 0.0) return std::log(c);
  return std::log(c) + log_exp * std::log(std::log(2.0 + n));
}

std::size_t ClosedForm::irregular_limit() const {
  std::size_t lim = start_index;
  if (!overrides.empty()) lim = std::max(lim, overrides.rbegin()->first);
  return lim;
}

WeightSequence WeightSequence::explicit_coeffs(std::vector<double> coeffs) {
  for (double c : coeffs)
    if (!finite_nonneg(c)) throw Error(Error::Kind::invalid_argument, "explicit coefficients must be finite and nonnegative");
  WeightSequence s;
  s.kind_ = ExplicitCoeffs{std::move(coeffs)};
  return s;
}

WeightSequence WeightSequence::closed_form(SlowVaryingFactor L, double exponent, double rho,
                                           std::size_t start_index,
                                           std::map<std::size_t, double> overrides,
                                           double zero_term) {
  if (!(L.c > 0.0) || !std::isfinite(L.c)) throw Error(Error::Kind::invalid_argument, "slowly varying factor needs c > 0");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw Error(Error::Kind::invalid_argument, "closed form needs 0 < rho < inf");
  if (!std::isfinite(exponent) || !std::isfinite(L.log_exp)) throw Error(Error::Kind::invalid_argument, "closed form exponents must be finite");
  if (!finite_nonneg(zero_term)) throw Error(Error::Kind::invalid_argument, "term(0) must be nonnegative");
  for (auto& [k, v] : overrides)
    if (!finite_nonneg(v)) throw Error(Error::Kind::invalid_argument, "override values must be nonnegative");
  WeightSequence s;
  s.kind_ = ClosedForm{L, exponent, rho, start_index, std::move(overrides), zero_term};
  return s;
}

double log_term(const WeightSequence& seq, std::size_t n) {
  if (seq.is_explicit()) {
    const auto& c = seq.as_explicit().coeffs;
    if (n >= c.size() || c[n] == 0.0) return -kInf;
    return std::log(c[n]);
  }
  return closed_log_term(seq.as_closed(), n);
}

double term(const WeightSequence& seq, std::size_t n) {
  if (seq.is_explicit()) {
    const auto& c = seq.as_explicit().coeffs;
    return n < c.size() ? c[n] : 0.0;
  }
  const auto& cf = seq.as_closed();
  if (auto it = cf.overrides.find(n); it != cf.overrides.end()) return it->second;
  if (n == 0) return cf.zero_term;
  if (n < cf.start_index) return 0.0;
  double x = static_cast<double>(n);
  double direct = cf.L(x) * std::pow(x, -cf.exponent) * std::pow(cf.rho, -x);
  if (std::isnormal(direct)) return direct;
  return std::exp(closed_log_term(cf, n));
}

double radius(const WeightSequence& seq) {
  if (seq.is_explicit()) return kInf;
  return seq.as_closed().rho;
}

WeightSequence tilt(const WeightSequence& seq, double t) {
  if (!(t > 0.0)) throw Error(Error::Kind::invalid_argument, "tilt needs t > 0");
  if (seq.is_explicit()) {
    auto c = seq.as_explicit().coeffs;
    double p = 1.0;
    for (std::size_t n = 0; n < c.size(); ++n) {
      c[n] *= p;
      p *= t;
    }
    return WeightSequence::explicit_coeffs(std::move(c));
  }
  const auto& cf = seq.as_closed();
  auto ov = cf.overrides;
  for (auto& [k, v] : ov) v *= std::pow(t, static_cast<double>(k));
  return WeightSequence::closed_form(cf.L, cf.exponent, cf.rho / t, cf.start_index, std::move(ov), cf.zero_term);
}

double series_value(const WeightSequence& seq, double t, double tol) {
  return weighted_moment(seq, t, 0, tol);
}

double weighted_moment(const WeightSequence& seq, double t, unsigned k, double tol) {
  if (!(t >= 0.0)) throw Error(Error::Kind::invalid_argument, "series argument must be nonnegative");
  if (!(tol > 0.0)) throw Error(Error::Kind::invalid_argument, "tolerance must be positive");
  if (seq.is_explicit()) {
    const auto& c = seq.as_explicit().coeffs;
    NeumaierSum acc;
    double lt = std::log(t);
    for (std::size_t n = 0; n < c.size(); ++n) {
      if (c[n] == 0.0) continue;
      double nk = k == 0 ? 1.0 : std::pow(static_cast<double>(n), static_cast<double>(k));
      // log form: t^n alone can overflow while c_n t^n does not
      double x = n == 0 ? c[n] * nk : std::exp(std::log(c[n] * nk) + static_cast<double>(n) * lt);
      if (std::isinf(x)) return x;
      acc.add(x);
    }
    return acc.value();
  }
  return closed_sum(seq.as_closed(), t, k, tol);
}

std::size_t first_positive_index(const WeightSequence& seq, std::size_t limit) {
  for (std::size_t n = 0; n <= limit; ++n)
    if (term(seq, n) > 0.0) return n;
  throw Error(Error::Kind::invalid_argument, "weight sequence has no positive term");
}

SchemeSpec::SchemeSpec(std::string name_, WeightSequence v_, WeightSequence w_)
    : name(std::move(name_)), v(std::move(v_)), w(std::move(w_)) {
  validate();
}

void SchemeSpec::validate() const {
  if (term(v, 0) != 0.0) throw Error(Error::Kind::invalid_argument, "scheme needs v_0 = 0");
}

SchemeSpec tilt_scheme(const SchemeSpec& s, double t) {
  SchemeSpec r = s;
  r.w = tilt(s.w, t);
  return r;
}

}  // namespace gibbs
