#include "gibbs/phase.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "gibbs/numerics.hpp"

namespace gibbs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

bool same(double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(x)); }

double series_at(const WeightSequence& s, double t) {
  if (std::isinf(t)) return kInf;
  return series_value(s, t);
}

std::size_t weight_gcd(const WeightSequence& w) {
  std::size_t g = 0, found = 0;
  for (std::size_t n = 0; n < 1000000 && found < 1000; ++n) {
    if (term(w, n) > 0.0) {
      g = std::gcd(g, n);
      ++found;
      if (g == 1) break;
    }
  }
  return g;
}

double lambda_of(const WeightSequence& s) { return s.is_explicit() ? 0.0 : s.as_closed().L.log_exp; }

void fill_dense(const SchemeSpec& s, PhaseReport& r, double alpha) {
  r.alpha = alpha;
  r.gamma = std::pow(-std::cos(kPi * alpha / 2.0), 1.0 / alpha);
  double W = series_value(s.w, r.rho_u);
  double m1 = weighted_moment(s.w, r.rho_u, 1);
  if (!std::isfinite(m1)) {
    r.reason += "; first moment of X diverges";
    return;
  }
  double mu = m1 / W;
  r.mu = mu;
  ScaleShape g;
  if (alpha == 2.0) {
    double m2 = weighted_moment(s.w, r.rho_u, 2);
    if (std::isfinite(m2)) {
      r.variance = m2 / W - mu * mu;
      g = {"constant", std::sqrt(*r.variance / 2.0), 0.0};
    } else {
      // a = 3: K(x) ~ c_w/(W (lam+1)) (log x)^(lam+1), g(n)^2 = K(a_n)/2 with log a_n ~ log(n)/2
      const auto& cf = s.w.as_closed();
      double lam = cf.L.log_exp;
      if (lam <= -1.0) {
        r.reason += "; truncated second moment is not log-regular, scale left unset";
        return;
      }
      double C = cf.L.c / (W * (lam + 1.0));
      double coeff = std::sqrt(C * std::pow(0.5, lam + 1.0) / 2.0);
      g = {lam == 0.0 ? "sqrt_log_n" : "log_power", coeff, (lam + 1.0) / 2.0};
    }
  } else {
    // 1 < alpha < 2: P(X >= x) ~ L_w(x) x^-alpha / (W alpha)
    const auto& cf = s.w.as_closed();
    double lam = cf.L.log_exp;
    double G = std::abs(gamma_fn(1.0 - alpha));
    double coeff = std::pow(cf.L.c * G / (W * alpha), 1.0 / alpha) * std::pow(alpha, -lam / alpha);
    g = {lam == 0.0 ? "constant" : "log_power", coeff, lam / alpha};
  }
  r.scale_g = g;
  ScaleShape L = g;
  L.coeff = std::pow(mu, -1.0 - 1.0 / alpha) * g.coeff;
  r.scale_L = L;
}

}  // namespace

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::dense_critical: return "dense_critical";
    case Phase::dense_supercritical: return "dense_supercritical";
    case Phase::convergent: return "convergent";
    case Phase::mixture: return "mixture";
    case Phase::dilute: return "dilute";
    case Phase::unclassified: return "unclassified";
  }
  return "unclassified";
}

Phase parse_phase(const std::string& s) {
  for (Phase p : {Phase::dense_critical, Phase::dense_supercritical, Phase::convergent, Phase::mixture,
                  Phase::dilute, Phase::unclassified})
    if (s == phase_name(p)) return p;
  throw Error(Error::Kind::invalid_argument, "unknown phase '" + s + "'");
}

const char* criticality_name(Criticality c) {
  switch (c) {
    case Criticality::subcritical: return "subcritical";
    case Criticality::critical: return "critical";
    case Criticality::supercritical: return "supercritical";
  }
  return "subcritical";
}

double ScaleShape::operator()(double n) const {
  if (log_exponent == 0.0) return coeff;
  return coeff * std::pow(std::log(n), log_exponent);
}

std::optional<double> PhaseReport::dense_scale(double n) const {
  if (!scale_L || !alpha) return std::nullopt;
  return (*scale_L)(n)*std::pow(n, 1.0 / *alpha);
}

double solve_rho_u(const SchemeSpec& s) {
  double rho_v = radius(s.v), rho_w = radius(s.w);
  double Wr = series_at(s.w, rho_w);
  if (!(Wr > rho_v)) return rho_w;
  double lo = 0.0, hi = rho_w;
  if (std::isinf(hi)) {
    hi = 1.0;
    for (int i = 0; i < 2000 && !(series_value(s.w, hi) > rho_v); ++i) hi *= 2.0;
    if (!(series_value(s.w, hi) > rho_v)) throw Error(Error::Kind::divergence, "cannot bracket W(rho) = rho_v");
  }
  for (int it = 0; it < 400; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    double Wm = series_value(s.w, mid);
    if (Wm > rho_v)
      hi = mid;
    else
      lo = mid;
    if (hi - lo <= 1e-16 * hi) break;
  }
  // pick the bracket end with the smaller residual
  double rl = std::abs(series_value(s.w, lo) - rho_v);
  double rh = std::isfinite(series_value(s.w, hi)) ? std::abs(series_value(s.w, hi) - rho_v) : kInf;
  return rl <= rh ? lo : hi;
}

double mu_of(const SchemeSpec& s, double rho_u) {
  double W = series_value(s.w, rho_u);
  if (!std::isfinite(W) || W <= 0.0) throw Error(Error::Kind::divergence, "W(rho_u) is not finite and positive");
  double m = weighted_moment(s.w, rho_u, 1);
  if (!std::isfinite(m)) return kInf;
  return m / W;
}

PhaseReport classify(const SchemeSpec& s) {
  PhaseReport r;
  r.rho_v = radius(s.v);
  r.rho_w = radius(s.w);
  r.W_at_rho_w = s.w.is_explicit() ? (weight_gcd(s.w) == 0 ? 0.0 : kInf) : series_value(s.w, r.rho_w);
  if (!s.w.is_explicit()) r.a = s.w.as_closed().exponent;
  if (!s.v.is_explicit()) r.b = s.v.as_closed().exponent;

  if (std::isinf(r.rho_v)) {
    r.criticality = Criticality::subcritical;
  } else if (std::abs(r.W_at_rho_w - r.rho_v) <= 1e-9 * r.rho_v) {
    r.criticality = Criticality::critical;
  } else {
    r.criticality = r.W_at_rho_w < r.rho_v ? Criticality::subcritical : Criticality::supercritical;
  }

  if (std::isinf(r.W_at_rho_w) && std::isinf(r.rho_v)) {
    r.rho_u = r.rho_w;
    r.reason = "W diverges at its radius while V is entire (expansive or polynomial regime)";
    return r;
  }
  r.rho_u = r.criticality == Criticality::supercritical ? solve_rho_u(s) : r.rho_w;
  r.W_at_rho_u = series_value(s.w, r.rho_u);
  if (r.criticality != Criticality::supercritical) {
    double vp = weighted_moment(s.v, r.W_at_rho_w, 1);
    if (std::isfinite(vp)) r.V_prime = vp / r.W_at_rho_w;
  }

  if (r.criticality == Criticality::supercritical) {
    if (weight_gcd(s.w) == 1) {
      r.phase = Phase::dense_supercritical;
      r.reason = "W(rho_w) > rho_v with aperiodic w";
      fill_dense(s, r, 2.0);
    } else {
      r.reason = "supercritical but the support of w is periodic";
    }
    return r;
  }

  bool closed = !s.v.is_explicit() && !s.w.is_explicit();
  double lam_v = lambda_of(s.v), lam_w = lambda_of(s.w);

  if (closed && r.criticality == Criticality::critical) {
    double a = *r.a, b = *r.b;
    bool cw_const = s.w.as_closed().L.is_constant();
    if (1.0 < a && a < 2.0 && 1.0 < b && b < 2.0) {
      if (!cw_const) {
        r.reason = "dilute exponents but L_w is not asymptotically constant";
        return r;
      }
      r.phase = Phase::dilute;
      r.reason = "critical with 1 < a, b < 2";
      r.alpha = a - 1.0;
      r.dilute_lambda = s.w.as_closed().L.c * gamma_fn(1.0 - *r.alpha) / (r.W_at_rho_w * *r.alpha);
      return r;
    }
    if (a > 2.0 && ((1.0 < b && b < a && !same(a, b)) || (same(a, b) && lam_w < lam_v))) {
      r.phase = Phase::dense_critical;
      r.reason = same(a, b) ? "critical, a = b > 2 with L_w = o(L_v)" : "critical with 1 < b < a, a > 2";
      fill_dense(s, r, (a > 3.0 || same(a, 3.0)) ? 2.0 : a - 1.0);
      return r;
    }
    if (a > 2.0 && same(a, b) && lam_v == lam_w) {
      r.phase = Phase::mixture;
      r.reason = "critical, a = b > 2 with L_v / L_w convergent";
      fill_dense(s, r, (a > 3.0 || same(a, 3.0)) ? 2.0 : a - 1.0);
      if (r.V_prime && r.mu) {
        double p = std::pow(*r.mu, a - 1.0) / *r.V_prime * s.v.as_closed().L.c / s.w.as_closed().L.c;
        r.mixture_p = p;
        r.mixture_p_frac = p / (1.0 + p);
      }
      return r;
    }
  }

  // convergent conditions, first match in order i)..iv)
  if (!r.V_prime || !(*r.V_prime > 0.0)) {
    r.reason = "V'(W(rho_w)) is not finite and positive";
    return r;
  }
  auto done = [&](const char* cond) {
    r.phase = Phase::convergent;
    r.convergent_condition = cond;
    r.reason = std::string("convergent condition ") + cond;
    return r;
  };
  if (r.criticality == Criticality::critical && closed) {
    double a = *r.a, b = *r.b;
    if (b > 2.0 && ((1.0 < a && a < b && !same(a, b)) || (same(a, b) && lam_v < lam_w))) return done("i");
  }
  if (r.criticality == Criticality::subcritical && !s.w.is_explicit() && *r.a > 1.0) return done("ii");
  if (r.criticality == Criticality::critical && closed) {
    double a = *r.a, b = *r.b;
    if (a > 1.0 && b > a + 2.0) return done("iii");
    if (a > 1.0 && s.w.as_closed().L.is_constant()) {
      if (b > a + 2.0) return done("iv(a)");
      if (a < 2.0) return done("iv(b)");
      if (same(a, 2.0)) return done("iv(c)");
      if (a > 2.0 && a < 3.0 && (b > a + 1e-12 || (same(a, b) && lam_v < 0.0))) return done("iv(d)");
      if (same(a, 3.0) && (b > 3.0 + 1e-12 || (same(b, 3.0) && lam_v < 0.0))) return done("iv(e)");
    }
  }
  r.reason = "no phase hypothesis matches the closed forms";
  return r;
}

MixtureP mixture_p(const SchemeSpec& s) {
  PhaseReport r = classify(s);
  if (r.phase != Phase::mixture || !r.mixture_p)
    throw Error(Error::Kind::phase, std::string("mixture_p needs a mixture scheme, got ") + phase_name(r.phase));
  return {*r.mixture_p, *r.mixture_p_frac};
}

double working_rho(const SchemeSpec& s) {
  if (s.v.is_explicit() && s.w.is_explicit()) return 1.0;
  double rho_v = radius(s.v), rho_w = radius(s.w);
  double Ww = s.w.is_explicit() ? kInf : series_value(s.w, rho_w);
  double rho = (Ww > rho_v) ? solve_rho_u(s) : rho_w;
  if (std::isfinite(rho)) {
    double W = series_value(s.w, rho);
    if (std::isfinite(W) && W > 0.0 && std::isfinite(series_value(s.v, W))) return rho;
  }
  // back off to W(r) = 0.99 min(rho_v, W(rho_w))
  double target = 0.99 * std::min(rho_v, Ww);
  if (!std::isfinite(target)) target = 1.0;
  double lo = 0.0, hi = std::isfinite(rho_w) ? rho_w : 1.0;
  if (!std::isfinite(rho_w))
    while (series_value(s.w, hi) < target) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (series_value(s.w, mid) > target)
      hi = mid;
    else
      lo = mid;
  }
  if (!(lo > 0.0) || !std::isfinite(series_value(s.v, series_value(s.w, lo))))
    throw Error(Error::Kind::divergence, "no tilt with finite W and V(W)");
  return lo;
}

std::optional<CoeffAsymptotic> partition_asymptotic(const SchemeSpec& s, const PhaseReport& r) {
  if (s.v.is_explicit() && s.w.is_explicit()) return std::nullopt;
  CoeffAsymptotic c;
  c.rho = r.rho_u;
  switch (r.phase) {
    case Phase::convergent: {
      if (s.w.is_explicit() || !r.V_prime) return std::nullopt;
      const auto& w = s.w.as_closed();
      c.exponent = w.exponent;
      c.log_exp = w.L.log_exp;
      c.constant = *r.V_prime * w.L.c;
      return c;
    }
    case Phase::dense_critical:
    case Phase::dense_supercritical: {
      if (s.v.is_explicit() || !r.mu) return std::nullopt;
      const auto& v = s.v.as_closed();
      c.exponent = v.exponent;
      c.log_exp = v.L.log_exp;
      c.constant = v.L.c * std::pow(*r.mu, v.exponent - 1.0);
      return c;
    }
    case Phase::mixture: {
      const auto& v = s.v.as_closed();
      const auto& w = s.w.as_closed();
      c.exponent = w.exponent;
      c.log_exp = w.L.log_exp;
      c.constant = *r.V_prime * w.L.c + v.L.c * std::pow(*r.mu, v.exponent - 1.0);
      return c;
    }
    case Phase::dilute: {
      const auto& v = s.v.as_closed();
      double al = *r.alpha, b = v.exponent, lam = *r.dilute_lambda;
      c.exponent = 1.0 + al * (b - 1.0);
      c.log_exp = v.L.log_exp;
      c.constant = v.L.c * al * std::pow(lam, b - 1.0) * gamma_fn(2.0 - b) / gamma_fn(1.0 - al * (b - 1.0)) *
                   std::pow(al, v.L.log_exp);
      return c;
    }
    default: return std::nullopt;
  }
}

}  // namespace gibbs
