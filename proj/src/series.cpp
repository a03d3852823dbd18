#include "gibbs/series.hpp"

namespace gibbs {

TruncatedSeries truncate(const WeightSequence& seq, std::size_t n_max) {
  TruncatedSeries s;
  s.coeffs.resize(n_max + 1);
  for (std::size_t n = 0; n <= n_max; ++n) s.coeffs[n] = term(seq, n);
  return s;
}

TruncatedSeries mul(const TruncatedSeries& a, const TruncatedSeries& b, std::size_t n_max) {
  TruncatedSeries r;
  r.coeffs.assign(n_max + 1, 0.0);
  std::size_t na = a.coeffs.size(), nb = b.coeffs.size();
  for (std::size_t n = 0; n <= n_max; ++n) {
    double s = 0.0;
    // fixed left-to-right order
    std::size_t lo = n + 1 > nb ? n + 1 - nb : 0;
    std::size_t hi = n < na ? n : na - 1;
    if (na == 0 || nb == 0) break;
    for (std::size_t i = lo; i <= hi; ++i) s += a.coeffs[i] * b.coeffs[n - i];
    r.coeffs[n] = s;
  }
  return r;
}

TruncatedSeries compose(const WeightSequence& v, const WeightSequence& w, std::size_t n_max) {
  if (term(w, 0) != 0.0) throw Error(Error::Kind::invalid_argument, "compose needs w_0 = 0; use the stopped-sum law instead");
  TruncatedSeries W = truncate(w, n_max);
  // Horner: R <- (R + v_l) * W for l = n_max..1
  TruncatedSeries R;
  R.coeffs.assign(n_max + 1, 0.0);
  for (std::size_t l = n_max; l >= 1; --l) {
    R.coeffs[0] += term(v, l);
    R = mul(R, W, n_max);
  }
  return R;
}

double pow_coeff(const WeightSequence& w, std::size_t l, std::size_t n) {
  if (l == 0) return n == 0 ? 1.0 : 0.0;
  if (term(w, 0) == 0.0 && l > n) return 0.0;
  TruncatedSeries W = truncate(w, n);
  TruncatedSeries P = W;
  for (std::size_t i = 1; i < l; ++i) P = mul(P, W, n);
  return P[n];
}

}  // namespace gibbs
