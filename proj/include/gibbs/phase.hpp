#pragma once
// Phase classification of a composition scheme and the constants its limit theorems need.

#include <optional>
#include <string>

#include "gibbs/weightspec.hpp"

namespace gibbs {

enum class Phase { dense_critical, dense_supercritical, convergent, mixture, dilute, unclassified };
enum class Criticality { subcritical, critical, supercritical };

const char* phase_name(Phase p);
const char* criticality_name(Criticality c);
Phase parse_phase(const std::string& s);

// g(n) = coeff * (log n)^log_exponent. shape is "constant", "sqrt_log_n" or "log_power".
struct ScaleShape {
  std::string shape = "constant";
  double coeff = 0.0;
  double log_exponent = 0.0;
  double operator()(double n) const;
};

struct PhaseReport {
  Phase phase = Phase::unclassified;
  Criticality criticality = Criticality::subcritical;
  std::string reason;
  std::string convergent_condition;  // "i".."iv(e)" when convergent

  double rho_v = 0.0, rho_w = 0.0, rho_u = 0.0;
  double W_at_rho_w = 0.0;  // may be +inf
  double W_at_rho_u = 0.0;
  std::optional<double> V_prime;  // V'(W(rho_w))
  std::optional<double> a, b;

  std::optional<double> alpha, mu, gamma, variance;
  std::optional<ScaleShape> scale_g, scale_L;
  std::optional<double> mixture_p, mixture_p_frac;
  std::optional<double> dilute_lambda;

  // L(n) n^(1/alpha), when the dense constants exist
  std::optional<double> dense_scale(double n) const;
};

double solve_rho_u(const SchemeSpec& s);
double mu_of(const SchemeSpec& s, double rho_u);
PhaseReport classify(const SchemeSpec& s);

struct MixtureP {
  double p;
  double p_frac;
};
MixtureP mixture_p(const SchemeSpec& s);

// A tilt at which W and V(W) are both finite; every conditioned law is independent of the choice.
double working_rho(const SchemeSpec& s);

// Leading-order coefficient asymptotics u_n ~ C (log n)^lambda n^-e rho^-n of U = V(W).
struct CoeffAsymptotic {
  double rho = 0.0;
  double exponent = 0.0;
  double log_exp = 0.0;
  double constant = 0.0;
};
std::optional<CoeffAsymptotic> partition_asymptotic(const SchemeSpec& s, const PhaseReport& r);

}  // namespace gibbs
