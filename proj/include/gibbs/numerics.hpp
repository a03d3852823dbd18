#pragma once
// Small numeric helpers shared by the modules.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace gibbs {

class NeumaierSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Gamma(x) as sign * exp(logabs); sign is 0 at poles.
struct SignedLogGamma {
  double logabs;
  int sign;
  double value() const { return sign * std::exp(logabs); }
};
SignedLogGamma signed_lgamma(double x);
double gamma_fn(double x);

// log(k!) for k = 0..n
std::vector<double> log_factorials(std::size_t n);

// Total variation between two pmfs on a common index set; missing entries count as zero.
double tv_distance(const std::vector<double>& p, const std::vector<double>& q);

std::string fmt17(double x);


// Kolmogorov limiting survival function Q(lambda) = P(sup|B| > lambda).
double kolmogorov_q(double lambda);
double ks_pvalue_two_sample(double d, std::size_t n1, std::size_t n2);
double chi2_survival(double stat, double dof);

}  // namespace gibbs
