#pragma once
// Limiting densities, distribution functions and moments.

#include <complex>

namespace gibbs {

struct StableParams {
  double alpha = 2.0;
  double gamma = 1.0;
  double beta = 0.0;
  double delta = 0.0;

  void validate() const;
};

std::complex<double> stable_cf(const StableParams& p, double t);

struct SeriesEval {
  double value = 0.0;
  bool used_series = true;
  double cancellation = 1.0;  // max |term| / |sum|
  int terms = 0;
};

// Needs beta = +1 or -1 and alpha != 1; falls back to inversion when cancellation exceeds 1e6.
SeriesEval stable_density_series_eval(const StableParams& p, double x);
double stable_density_series(const StableParams& p, double x);
double stable_density_inversion(const StableParams& p, double x, double abs_tol = 1e-9);
// Gil-Pelaez inversion of the distribution function.
double stable_cdf_inversion(const StableParams& p, double x);

// gamma = (-cos(pi alpha / 2))^(1/alpha); the dense limit is X_alpha(gamma, -1, 0).
double dense_gamma(double alpha);
double dense_h(double alpha, double x);

double stable_moment(double alpha, double lambda, double s);

struct DiluteParams {
  double alpha = 0.5;
  double b = 1.5;
  double lambda = 1.0;

  void validate() const;
  // the positive stable law with E exp(-tX) = exp(-lambda t^alpha)
  StableParams stable() const;
};

double dilute_f(const DiluteParams& p, double x);
double dilute_Z_density(const DiluteParams& p, double x);
double dilute_Z_moment(const DiluteParams& p, double r);
// P(Poi(upsilon Z) = k)
double dilute_mixed_poisson_pmf(const DiluteParams& p, double upsilon, unsigned k);

class FrechetLaw {
 public:
  FrechetLaw(double mu, double alpha, unsigned j = 1);
  double cdf(double x) const;
  double density(double x) const;

 private:
  double alpha_, kappa_;
  unsigned j_;
};

double gumbel_cdf(double x);

double pp_intensity(double alpha, double b, double x);
// integral of the intensity over [x, 1]
double pp_mean_count(double alpha, double b, double x);
// E[(Y(I))_m] for I = [lo, hi], m in {1, 2}; +inf when lo = 0
double pp_factorial_moment(double alpha, double b, double lo, double hi, unsigned m);

}  // namespace gibbs
