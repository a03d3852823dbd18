#pragma once
// Weight sequences: explicit coefficient arrays or closed forms L(n) n^-e rho^-n.

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace gibbs {

class Error : public std::runtime_error {
 public:
  enum class Kind { invalid_argument, divergence, phase, budget, numeric, config };
  Error(Kind k, const std::string& msg) : std::runtime_error(msg), kind_(k) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

const char* kind_name(Error::Kind k);

// c * (log(2+n))^log_exp; log_exp == 0 is the constant form.
struct SlowVaryingFactor {
  double c = 1.0;
  double log_exp = 0.0;

  bool is_constant() const { return log_exp == 0.0; }
  double operator()(double n) const;
  double log_value(double n) const;
};

struct ExplicitCoeffs {
  std::vector<double> coeffs;
};

struct ClosedForm {
  SlowVaryingFactor L;
  double exponent = 0.0;
  double rho = 1.0;
  std::size_t start_index = 1;
  std::map<std::size_t, double> overrides;
  double zero_term = 0.0;

  // last index touched by an override or the start offset
  std::size_t irregular_limit() const;
};

class WeightSequence {
 public:
  WeightSequence() : kind_(ExplicitCoeffs{}) {}
  static WeightSequence explicit_coeffs(std::vector<double> coeffs);
  static WeightSequence closed_form(SlowVaryingFactor L, double exponent, double rho,
                                    std::size_t start_index = 1,
                                    std::map<std::size_t, double> overrides = {},
                                    double zero_term = 0.0);

  bool is_explicit() const { return std::holds_alternative<ExplicitCoeffs>(kind_); }
  const ExplicitCoeffs& as_explicit() const { return std::get<ExplicitCoeffs>(kind_); }
  const ClosedForm& as_closed() const { return std::get<ClosedForm>(kind_); }

 private:
  std::variant<ExplicitCoeffs, ClosedForm> kind_;
};

double term(const WeightSequence& seq, std::size_t n);
// log of term(n); -inf for zero terms. Safe where rho^-n overflows.
double log_term(const WeightSequence& seq, std::size_t n);
double radius(const WeightSequence& seq);
WeightSequence tilt(const WeightSequence& seq, double t);

// Sum of term(n) t^n with absolute tail error <= tol; +inf when divergent.
double series_value(const WeightSequence& seq, double t, double tol = 1e-15);
// Sum of n^k term(n) t^n.
double weighted_moment(const WeightSequence& seq, double t, unsigned k, double tol = 1e-15);

// Smallest n with term(n) > 0 (0 for the zero term); throws if none up to limit.
std::size_t first_positive_index(const WeightSequence& seq, std::size_t limit = 100000);

struct SchemeSpec {
  std::string name;
  WeightSequence v;
  WeightSequence w;
  std::optional<WeightSequence> h;
  std::vector<WeightSequence> product_factors;

  SchemeSpec() = default;
  SchemeSpec(std::string name_, WeightSequence v_, WeightSequence w_);
  void validate() const;
};

SchemeSpec tilt_scheme(const SchemeSpec& s, double t);

}  // namespace gibbs
