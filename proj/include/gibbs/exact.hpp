#pragma once
// Exact finite-n laws via the Kolchin representation
//   P(N_n = l) = P(N = l) P(S_l = n) / P(S_N = n).

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "gibbs/weightspec.hpp"

namespace gibbs {

struct DiscreteLaw {
  std::vector<double> pmf;
  double mass_accounted = 0.0;

  std::size_t n_max() const { return pmf.empty() ? 0 : pmf.size() - 1; }
  double operator[](std::size_t k) const { return k < pmf.size() ? pmf[k] : 0.0; }
  double deficit() const { return 1.0 - mass_accounted; }
  double mean() const;
  std::vector<double> cdf() const;

  static DiscreteLaw from_pmf(std::vector<double> pmf);
};

// TV between two laws, counting the unaccounted mass of either side as disagreement.
double tv_with_deficit(const DiscreteLaw& p, const DiscreteLaw& q);

DiscreteLaw law_X(const WeightSequence& w, double rho, std::size_t n_max);
DiscreteLaw law_N(const SchemeSpec& s, double rho, std::size_t l_max);
// Size-biased N at W(rho_w); rho overrides the evaluation point.
DiscreteLaw law_Nhat(const SchemeSpec& s, std::size_t l_max, std::optional<double> rho = std::nullopt);

// rows P(S_l = m), l <= l_max, m <= n. Row l is stored from its first nonzero column.
class ConvolutionTable {
 public:
  ConvolutionTable(const std::vector<double>& pX, std::size_t l_max, std::size_t n);

  std::size_t l_max() const { return begin_.size() - 1; }
  std::size_t n() const { return n_; }
  double at(std::size_t l, std::size_t m) const {
    if (l >= begin_.size() || m > n_ || m < begin_[l]) return 0.0;
    return data_[offset_[l] + (m - begin_[l])];
  }
  std::size_t row_begin(std::size_t l) const { return begin_[l]; }
  std::size_t bytes() const { return data_.size() * sizeof(double); }

 private:
  std::size_t n_;
  std::vector<std::size_t> begin_, offset_;
  std::vector<double> data_;
};

// Tables are shared between models built from the same X law.
std::shared_ptr<const ConvolutionTable> convolution_table(const std::vector<double>& pX, std::size_t l_max,
                                                          std::size_t n);
void clear_table_cache();

struct PrefixLaw {
  unsigned m = 1;
  // m = 1: joint[0][k] = P(K_1 = k); m = 2: joint[k1][k2]
  std::vector<std::vector<double>> joint;
  double short_mass = 0.0;  // P(N_n < m)
  double tv_to_iid = 0.0;   // TV against the i.i.d. X law(s) at rho_u
  std::vector<double> marginal(unsigned coord) const;
};

class ExactModel {
 public:
  // rho defaults to working_rho(s)
  ExactModel(const SchemeSpec& s, std::size_t n, std::optional<double> rho = std::nullopt);

  const SchemeSpec& scheme() const { return s_; }
  std::size_t n() const { return n_; }
  double rho() const { return rho_; }
  std::size_t l_max() const { return l_max_; }
  const DiscreteLaw& X() const { return X_; }
  const DiscreteLaw& N() const { return N_; }
  const ConvolutionTable& table() const;

  // P(S_N = m) for m <= n
  std::vector<double> stopped_sum() const;
  double p_SN_n() const;
  // u_m = V(W(rho)) rho^-m P(S_N = m)
  std::vector<double> partition_function() const;

  DiscreteLaw law_Nn() const;
  PrefixLaw prefix(unsigned m) const;
  // E[#_k P_n] for k <= n
  std::vector<double> mean_counts() const;
  // law of M_n on 0..n; without full_dp only sizes above n/2 are resolved and the
  // remaining mass shows up as deficit
  DiscreteLaw largest_law(bool full_dp = true) const;
  DiscreteLaw giant_deficit(bool full_dp = true) const;
  // law of X_1 + ... + X_{Nhat - 1} on 0..n (X at the model's rho)
  DiscreteLaw giant_deficit_limit() const;

 private:
  SchemeSpec s_;
  std::size_t n_;
  double rho_;
  double W_, logVW_;
  std::size_t l_max_;
  DiscreteLaw X_, N_;
  mutable std::shared_ptr<const ConvolutionTable> table_;
  // sum_l l P(N = l) P(S_{l-1} = d)
  std::vector<double> size_biased_column() const;
};

// Enumerates all set partitions of [n]; n <= 9.
struct BruteForceLaw {
  DiscreteLaw N;
  // sorted-descending size multiset -> probability
  std::map<std::vector<std::size_t>, double> multiset;
  double u_n = 0.0;  // partition function, sum u(P)/n!
};
BruteForceLaw brute_force_partition_law(const SchemeSpec& s, std::size_t n);
// same multiset law from the Kolchin representation
std::map<std::vector<std::size_t>, double> size_multiset_law(const ExactModel& m);

struct ProductLaw {
  double rho = 0.0;
  std::vector<DiscreteLaw> factors;    // A_k at rho
  std::vector<DiscreteLaw> marginals;  // P(P_k = j)
  std::vector<double> p;               // limit constants; empty when not closed forms
};
ProductLaw product_law(const std::vector<WeightSequence>& factors, std::size_t n);
std::vector<double> product_limit_constants(const std::vector<WeightSequence>& factors);

struct ExtendedLaw {
  double rho = 0.0;
  std::vector<std::vector<double>> joint;  // [l][m]: l components carrying total size m
  DiscreteLaw N_tilde, u_size;
};
ExtendedLaw extended_law(const SchemeSpec& s, std::size_t n);
// finite limit of (N~_n, size of the W-part) when h dominates, truncated to m <= n
ExtendedLaw extended_boltzmann_limit(const SchemeSpec& s, std::size_t n);

}  // namespace gibbs
