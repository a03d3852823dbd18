#pragma once
// Truncated power-series algebra; the independent oracle for u_n = [z^n] V(W(z)).

#include <cstddef>
#include <vector>

#include "gibbs/weightspec.hpp"

namespace gibbs {

struct TruncatedSeries {
  std::vector<double> coeffs;

  std::size_t n_max() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }
  double operator[](std::size_t n) const { return n < coeffs.size() ? coeffs[n] : 0.0; }
};

TruncatedSeries truncate(const WeightSequence& seq, std::size_t n_max);
TruncatedSeries mul(const TruncatedSeries& a, const TruncatedSeries& b, std::size_t n_max);
TruncatedSeries compose(const WeightSequence& v, const WeightSequence& w, std::size_t n_max);
double pow_coeff(const WeightSequence& w, std::size_t l, std::size_t n);

}  // namespace gibbs
