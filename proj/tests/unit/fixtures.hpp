#pragma once
// Schemes shared by the unit tests.

#include <cmath>
#include <string>
#include <vector>

#include "gibbs/weightspec.hpp"

namespace fx {

using gibbs::SchemeSpec;
using gibbs::WeightSequence;

inline WeightSequence power(double e, double rho = 1.0, double c = 1.0) {
  return WeightSequence::closed_form({c, 0.0}, e, rho);
}

inline WeightSequence inv_factorial(std::size_t terms) {
  std::vector<double> c(terms + 1, 0.0);
  for (std::size_t i = 1; i <= terms; ++i) c[i] = std::exp(-std::lgamma(double(i) + 1.0));
  return WeightSequence::explicit_coeffs(c);
}

// v at the critical radius W(1)
inline SchemeSpec critical(const std::string& name, double a, double b) {
  WeightSequence w = power(a);
  return SchemeSpec(name, power(b, gibbs::series_value(w, 1.0)), w);
}

inline SchemeSpec bell() { return SchemeSpec("bell", inv_factorial(170), inv_factorial(170)); }
inline SchemeSpec scheme_A() { return critical("A", 4.0, 2.0); }
inline SchemeSpec scheme_B() { return critical("B", 2.5, 1.5); }
inline SchemeSpec scheme_C() { return critical("C", 1.5, 3.0); }
inline SchemeSpec scheme_D() { return critical("D", 3.0, 3.0); }
inline SchemeSpec scheme_E() { return critical("E", 1.5, 1.5); }
inline SchemeSpec identity_outer() {
  return SchemeSpec("identity_outer", WeightSequence::explicit_coeffs({0.0, 1.0}), power(4.0));
}

inline std::vector<SchemeSpec> bundled() {
  return {bell(), scheme_A(), scheme_B(), scheme_C(), scheme_D(), scheme_E(), identity_outer()};
}

}  // namespace fx
