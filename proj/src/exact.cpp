#include "gibbs/exact.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>

#if defined(__SSE__)
#include <xmmintrin.h>
#endif

#include "gibbs/numerics.hpp"
#include "gibbs/phase.hpp"

namespace gibbs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFlush = 1e-290;
constexpr std::size_t kTableBudget = 200000000;  // doubles

// Denormals cost two orders of magnitude in the inner loops; flush them for the scope.
class FlushDenormals {
 public:
  FlushDenormals() {
#if defined(__SSE__)
    saved_ = _mm_getcsr();
    _mm_setcsr(saved_ | 0x8040);
#endif
  }
  ~FlushDenormals() {
#if defined(__SSE__)
    _mm_setcsr(saved_);
#endif
  }

 private:
  unsigned saved_ = 0;
};

double sum_of(const std::vector<double>& v) {
  NeumaierSum s;
  for (double x : v) s.add(x);
  return s.value();
}

std::size_t first_positive(const std::vector<double>& p) {
  for (std::size_t k = 0; k < p.size(); ++k)
    if (p[k] > 0.0) return k;
  return p.size();
}

struct CacheEntry {
  std::vector<double> pX;
  std::size_t l_max, n;
  std::shared_ptr<const ConvolutionTable> table;
};

std::mutex cache_mutex;
std::deque<CacheEntry> cache;
constexpr std::size_t kCacheBytes = std::size_t(1) << 30;

double log_or_neg_inf(double x) { return x > 0.0 ? std::log(x) : -kInf; }

}  // namespace

double DiscreteLaw::mean() const {
  NeumaierSum s;
  for (std::size_t k = 0; k < pmf.size(); ++k) s.add(static_cast<double>(k) * pmf[k]);
  return s.value();
}

std::vector<double> DiscreteLaw::cdf() const {
  std::vector<double> c(pmf.size());
  NeumaierSum s;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    s.add(pmf[k]);
    c[k] = s.value();
  }
  return c;
}

DiscreteLaw DiscreteLaw::from_pmf(std::vector<double> pmf) {
  DiscreteLaw d;
  d.mass_accounted = sum_of(pmf);
  d.pmf = std::move(pmf);
  return d;
}

double tv_with_deficit(const DiscreteLaw& p, const DiscreteLaw& q) {
  double s = 2.0 * tv_distance(p.pmf, q.pmf);
  s += std::max(0.0, p.deficit()) + std::max(0.0, q.deficit());
  return std::min(1.0, 0.5 * s);
}

DiscreteLaw law_X(const WeightSequence& w, double rho, std::size_t n_max) {
  if (!(rho > 0.0)) throw Error(Error::Kind::invalid_argument, "law_X needs rho > 0");
  double W = series_value(w, rho);
  if (!std::isfinite(W)) throw Error(Error::Kind::divergence, "W(rho) diverges");
  if (!(W > 0.0)) throw Error(Error::Kind::invalid_argument, "W(rho) = 0");
  double lW = std::log(W), lr = std::log(rho);
  std::vector<double> p(n_max + 1);
  for (std::size_t k = 0; k <= n_max; ++k) {
    double lt = log_term(w, k);
    p[k] = std::isinf(lt) ? 0.0 : std::exp(lt + k * lr - lW);
  }
  return DiscreteLaw::from_pmf(std::move(p));
}

DiscreteLaw law_N(const SchemeSpec& s, double rho, std::size_t l_max) {
  double W = series_value(s.w, rho);
  if (!std::isfinite(W) || !(W > 0.0)) throw Error(Error::Kind::divergence, "W(rho) is not finite and positive");
  double VW = series_value(s.v, W);
  if (!std::isfinite(VW)) throw Error(Error::Kind::divergence, "V(W(rho)) diverges");
  if (!(VW > 0.0)) throw Error(Error::Kind::invalid_argument, "V(W(rho)) = 0");
  double lW = std::log(W), lV = std::log(VW);
  std::vector<double> p(l_max + 1);
  for (std::size_t l = 0; l <= l_max; ++l) {
    double lt = log_term(s.v, l);
    p[l] = std::isinf(lt) ? 0.0 : std::exp(lt + l * lW - lV);
  }
  return DiscreteLaw::from_pmf(std::move(p));
}

DiscreteLaw law_Nhat(const SchemeSpec& s, std::size_t l_max, std::optional<double> rho) {
  double r = rho ? *rho : radius(s.w);
  if (!std::isfinite(r)) throw Error(Error::Kind::divergence, "N-hat needs a finite radius for w");
  double W = series_value(s.w, r);
  if (!std::isfinite(W) || !(W > 0.0)) throw Error(Error::Kind::divergence, "W(rho_w) is not finite and positive");
  double m1 = weighted_moment(s.v, W, 1);
  if (!std::isfinite(m1)) throw Error(Error::Kind::divergence, "V'(W(rho_w)) diverges");
  double lm = std::log(m1), lW = std::log(W);
  std::vector<double> p(l_max + 1, 0.0);
  for (std::size_t l = 1; l <= l_max; ++l) {
    double lt = log_term(s.v, l);
    p[l] = std::isinf(lt) ? 0.0 : std::exp(std::log(double(l)) + lt + l * lW - lm);
  }
  return DiscreteLaw::from_pmf(std::move(p));
}

ConvolutionTable::ConvolutionTable(const std::vector<double>& pX, std::size_t l_max, std::size_t n) : n_(n) {
  FlushDenormals ftz;
  std::size_t kmin = first_positive(pX);
  std::size_t kmax = std::min(n, pX.empty() ? 0 : pX.size() - 1);
  while (kmax > kmin && pX[kmax] == 0.0) --kmax;

  std::size_t est = 0;
  for (std::size_t l = 0; l <= l_max; ++l) {
    std::size_t b = l * kmin;
    if (b > n) break;
    est += n + 1 - b;
  }
  if (est > kTableBudget) throw Error(Error::Kind::budget, "convolution table exceeds the memory budget");
  data_.reserve(est);

  begin_.assign(1, 0);
  offset_.assign(1, 0);
  data_.assign(n + 1, 0.0);
  data_[0] = 1.0;

  std::vector<double> out;
  for (std::size_t l = 1; l <= l_max; ++l) {
    std::size_t pb = begin_[l - 1];
    std::size_t nb = pb + kmin;
    if (kmin >= pX.size() || nb > n) {
      begin_.push_back(n + 1);
      offset_.push_back(data_.size());
      continue;
    }
    out.assign(n + 1 - nb, 0.0);
    const std::size_t po = offset_[l - 1];
    for (std::size_t k = kmin; k <= kmax && pb + k <= n; ++k) {
      double a = pX[k];
      if (a == 0.0) continue;
      const double* __restrict src = data_.data() + po;
      double* __restrict dst = out.data() + (pb + k - nb);
      std::size_t len = n + 1 - (pb + k);
      for (std::size_t i = 0; i < len; ++i) dst[i] += a * src[i];
    }
    std::size_t skip = 0;
    for (double& x : out)
      if (x < kFlush) x = 0.0;
    while (skip < out.size() && out[skip] == 0.0) ++skip;
    begin_.push_back(nb + skip);
    offset_.push_back(data_.size());
    data_.insert(data_.end(), out.begin() + skip, out.end());
  }
}

std::shared_ptr<const ConvolutionTable> convolution_table(const std::vector<double>& pX, std::size_t l_max,
                                                          std::size_t n) {
  {
    std::lock_guard<std::mutex> lk(cache_mutex);
    for (const auto& e : cache)
      if (e.l_max == l_max && e.n == n && e.pX == pX) return e.table;
  }
  auto t = std::make_shared<const ConvolutionTable>(pX, l_max, n);
  std::lock_guard<std::mutex> lk(cache_mutex);
  cache.push_back({pX, l_max, n, t});
  std::size_t total = 0;
  for (const auto& e : cache) total += e.table->bytes();
  while (cache.size() > 1 && total > kCacheBytes) {
    total -= cache.front().table->bytes();
    cache.pop_front();
  }
  return t;
}

void clear_table_cache() {
  std::lock_guard<std::mutex> lk(cache_mutex);
  cache.clear();
}

std::vector<double> PrefixLaw::marginal(unsigned coord) const {
  if (m == 1) return joint.at(0);
  std::size_t n = joint.size() - 1;
  std::vector<double> out(n + 1, 0.0);
  for (std::size_t a = 0; a <= n; ++a)
    for (std::size_t b = 0; b < joint[a].size(); ++b) out[coord == 0 ? a : b] += joint[a][b];
  return out;
}

namespace {

// Finite explicit series have no natural radius. Tilt so that E[S_N] = n, which keeps
// P(S_N = n) away from underflow; any finite tilt gives the same conditional law.
double saddle_rho(const SchemeSpec& s, std::size_t n) {
  auto mean = [&](double r) -> double {
    double W;
    try {
      W = series_value(s.w, r);
    } catch (const Error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    if (!(W > 0.0) || !std::isfinite(W)) return std::numeric_limits<double>::quiet_NaN();
    double V = series_value(s.v, W);
    if (!(W > 0.0) || !std::isfinite(W) || !std::isfinite(V) || !(V > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return weighted_moment(s.w, r, 1) / W * weighted_moment(s.v, W, 1) / V;
  };
  double lo = std::log(1e-6), hi = std::log(1e6);
  double m1 = mean(1.0);
  if (std::isfinite(m1) && std::abs(m1 - double(n)) <= 0.5 * double(n)) return 1.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double m = mean(std::exp(mid));
    if (!std::isfinite(m) || m > double(n))
      hi = mid;
    else
      lo = mid;
  }
  double r = std::exp(lo);
  return std::isfinite(mean(r)) ? r : 1.0;
}

}  // namespace

ExactModel::ExactModel(const SchemeSpec& s, std::size_t n, std::optional<double> rho) : s_(s), n_(n) {
  s_.validate();
  if (n == 0) throw Error(Error::Kind::invalid_argument, "n must be positive");
  if (rho)
    rho_ = *rho;
  else
    rho_ = s_.v.is_explicit() && s_.w.is_explicit() ? saddle_rho(s_, n) : working_rho(s_);
  W_ = series_value(s_.w, rho_);
  double VW = series_value(s_.v, W_);
  if (!std::isfinite(W_) || !std::isfinite(VW)) throw Error(Error::Kind::divergence, "W or V(W) diverges at rho");
  logVW_ = std::log(VW);
  X_ = law_X(s_.w, rho_, n);
  std::size_t kmin = first_positive(X_.pmf);
  if (kmin > n) throw Error(Error::Kind::invalid_argument, "w has no positive coefficient up to n");
  std::size_t cap = 4 * n;
  if (s_.v.is_explicit()) cap = std::min(cap, s_.v.as_explicit().coeffs.size());
  if (kmin >= 1) {
    l_max_ = std::min(cap, n / kmin);
  } else {
    // w_0 > 0: components of size zero; truncate N where its tail is negligible
    DiscreteLaw probe = law_N(s_, rho_, cap);
    NeumaierSum acc;
    l_max_ = cap;
    for (std::size_t l = 0; l <= cap; ++l) {
      acc.add(probe.pmf[l]);
      if (1.0 - acc.value() < 1e-14) {
        l_max_ = l;
        break;
      }
    }
  }
  N_ = law_N(s_, rho_, l_max_);
}

const ConvolutionTable& ExactModel::table() const {
  if (!table_) table_ = convolution_table(X_.pmf, l_max_, n_);
  return *table_;
}

std::vector<double> ExactModel::stopped_sum() const {
  const auto& T = table();
  std::vector<NeumaierSum> acc(n_ + 1);
  for (std::size_t l = 0; l <= l_max_; ++l) {
    double p = N_.pmf[l];
    if (p == 0.0) continue;
    for (std::size_t m = T.row_begin(l); m <= n_; ++m) acc[m].add(p * T.at(l, m));
  }
  std::vector<double> out(n_ + 1);
  for (std::size_t m = 0; m <= n_; ++m) out[m] = acc[m].value();
  return out;
}

double ExactModel::p_SN_n() const {
  const auto& T = table();
  NeumaierSum acc;
  for (std::size_t l = 0; l <= l_max_; ++l) acc.add(N_.pmf[l] * T.at(l, n_));
  double p = acc.value();
  if (!(p > 0.0)) throw Error(Error::Kind::invalid_argument, "u_n = 0: no admissible partition of this size");
  return p;
}

std::vector<double> ExactModel::partition_function() const {
  auto ps = stopped_sum();
  double lr = std::log(rho_);
  for (std::size_t m = 0; m <= n_; ++m) ps[m] = ps[m] > 0.0 ? std::exp(logVW_ - m * lr + std::log(ps[m])) : 0.0;
  return ps;
}

DiscreteLaw ExactModel::law_Nn() const {
  const auto& T = table();
  std::vector<double> p(l_max_ + 1, 0.0);
  for (std::size_t l = 0; l <= l_max_; ++l) p[l] = N_.pmf[l] * T.at(l, n_);
  double z = sum_of(p);
  if (!(z > 0.0)) throw Error(Error::Kind::invalid_argument, "u_n = 0: no admissible partition of this size");
  for (double& x : p) x /= z;
  DiscreteLaw d;
  d.pmf = std::move(p);
  d.mass_accounted = 1.0;
  return d;
}

std::vector<double> ExactModel::size_biased_column() const {
  const auto& T = table();
  std::vector<NeumaierSum> acc(n_ + 1);
  for (std::size_t l = 1; l <= l_max_; ++l) {
    double p = N_.pmf[l] * static_cast<double>(l);
    if (p == 0.0) continue;
    for (std::size_t d = T.row_begin(l - 1); d <= n_; ++d) acc[d].add(p * T.at(l - 1, d));
  }
  std::vector<double> out(n_ + 1);
  for (std::size_t d = 0; d <= n_; ++d) out[d] = acc[d].value();
  return out;
}

std::vector<double> ExactModel::mean_counts() const {
  double P = p_SN_n();
  auto A = size_biased_column();
  std::vector<double> out(n_ + 1);
  for (std::size_t k = 0; k <= n_; ++k) out[k] = X_.pmf[k] * A[n_ - k] / P;
  return out;
}

PrefixLaw ExactModel::prefix(unsigned m) const {
  if (m != 1 && m != 2) throw Error(Error::Kind::invalid_argument, "prefix laws exist for m = 1, 2");
  const auto& T = table();
  double P = p_SN_n();
  const auto& q = X_.pmf;
  PrefixLaw r;
  r.m = m;
  // C[d] = sum_{l >= m} P(N = l) P(S_{l-m} = d)
  std::vector<NeumaierSum> acc(n_ + 1);
  for (std::size_t l = m; l <= l_max_; ++l) {
    double p = N_.pmf[l];
    if (p == 0.0) continue;
    for (std::size_t d = T.row_begin(l - m); d <= n_; ++d) acc[d].add(p * T.at(l - m, d));
  }
  std::vector<double> C(n_ + 1);
  for (std::size_t d = 0; d <= n_; ++d) C[d] = acc[d].value() / P;

  if (m == 1) {
    std::vector<double> p(n_ + 1);
    for (std::size_t k = 0; k <= n_; ++k) p[k] = q[k] * C[n_ - k];
    NeumaierSum diff;
    for (std::size_t k = 0; k <= n_; ++k) diff.add(std::abs(p[k] - q[k]));
    double q_tail = std::max(0.0, 1.0 - X_.mass_accounted);
    r.short_mass = 0.0;
    r.tv_to_iid = 0.5 * (diff.value() + q_tail);
    r.joint.push_back(std::move(p));
    return r;
  }
  r.joint.assign(n_ + 1, {});
  NeumaierSum diff, inside;
  for (std::size_t a = 0; a <= n_; ++a) {
    auto& row = r.joint[a];
    row.resize(n_ - a + 1);
    for (std::size_t b = 0; a + b <= n_; ++b) {
      double qq = q[a] * q[b];
      row[b] = qq * C[n_ - a - b];
      diff.add(std::abs(row[b] - qq));
      inside.add(qq);
    }
  }
  r.short_mass = N_.pmf[1] * T.at(1, n_) / P;
  r.tv_to_iid = 0.5 * (diff.value() + std::max(0.0, 1.0 - inside.value()) + r.short_mass);
  return r;
}

DiscreteLaw ExactModel::largest_law(bool full_dp) const {
  double P = p_SN_n();
  std::vector<double> pm(n_ + 1, 0.0);
  // a size above n/2 occurs at most once
  auto A = size_biased_column();
  for (std::size_t k = n_ / 2 + 1; k <= n_; ++k) pm[k] = X_.pmf[k] * A[n_ - k] / P;

  if (full_dp) {
    if (n_ > 4000) throw Error(Error::Kind::budget, "largest-part DP is limited to n <= 4000");
    FlushDenormals ftz;
    const std::size_t K = n_ / 2, L = l_max_, W = n_ + 1;
    const auto& q = X_.pmf;
    const std::size_t kmin = first_positive(q);
    // R[r][m] = P(S_r = m, all parts <= k), updated in place for k = 0, 1, ..., K
    std::vector<double> R((L + 1) * W, 0.0);
    double q0 = q[0];
    for (std::size_t r = 0; r <= L; ++r) {
      double v = r == 0 ? 1.0 : std::pow(q0, static_cast<double>(r));
      R[r * W] = v < kFlush ? 0.0 : v;
    }
    if (n_ == 0) pm[0] = 1.0;
    auto lf = log_factorials(L + 1);
    std::vector<double> inc(L + 1);
    for (std::size_t k = 1; k <= K; ++k) {
      double p = q[k];
      if (p == 0.0) continue;
      double lp = std::log(p);
      std::fill(inc.begin(), inc.end(), 0.0);
      for (std::size_t r = L; r >= 1; --r) {
        double* __restrict dst = R.data() + r * W;
        NeumaierSum col;
        for (std::size_t j = 1; j <= r && j * k <= n_; ++j) {
          const double* __restrict src = R.data() + (r - j) * W;
          double logc = lf[r] - lf[j] - lf[r - j] + j * lp;
          if (logc < -745.0) continue;
          std::size_t sh = j * k;
          if (logc > 700.0) {
            for (std::size_t m = sh; m <= n_; ++m) {
              double s = src[m - sh];
              if (s > 0.0) dst[m] += std::exp(logc + std::log(s));
            }
            double s = src[n_ - sh];
            if (s > 0.0) col.add(std::exp(logc + std::log(s)));
          } else {
            double c = std::exp(logc);
            col.add(c * src[n_ - sh]);
            std::size_t m0 = sh + (r - j) * kmin;
            for (std::size_t m = m0; m <= n_; ++m) dst[m] += c * src[m - sh];
          }
        }
        inc[r] = col.value();
      }
      NeumaierSum tot;
      for (std::size_t r = 1; r <= L; ++r) tot.add(N_.pmf[r] * inc[r]);
      pm[k] = tot.value() / P;
    }
  }
  return DiscreteLaw::from_pmf(std::move(pm));
}

DiscreteLaw ExactModel::giant_deficit(bool full_dp) const {
  DiscreteLaw M = largest_law(full_dp);
  std::vector<double> d(n_ + 1);
  for (std::size_t k = 0; k <= n_; ++k) d[n_ - k] = M.pmf[k];
  return DiscreteLaw::from_pmf(std::move(d));
}

DiscreteLaw ExactModel::giant_deficit_limit() const {
  const auto& T = table();
  double m1 = weighted_moment(s_.v, W_, 1);
  if (!std::isfinite(m1)) throw Error(Error::Kind::divergence, "E[N] is infinite; the size-biased law does not exist");
  double lEN = std::log(m1) - logVW_;
  double lW = std::log(W_);
  std::vector<NeumaierSum> acc(n_ + 1);
  for (std::size_t l = 1; l <= l_max_ + 1; ++l) {
    double lt = log_term(s_.v, l);
    if (std::isinf(lt)) continue;
    double ph = std::exp(std::log(double(l)) + lt + l * lW - logVW_ - lEN);
    std::size_t row = l - 1;
    if (row > T.l_max()) break;
    for (std::size_t d = T.row_begin(row); d <= n_; ++d) acc[d].add(ph * T.at(row, d));
  }
  std::vector<double> out(n_ + 1);
  for (std::size_t d = 0; d <= n_; ++d) out[d] = acc[d].value();
  return DiscreteLaw::from_pmf(std::move(out));
}

BruteForceLaw brute_force_partition_law(const SchemeSpec& s, std::size_t n) {
  if (n == 0 || n > 9) throw Error(Error::Kind::budget, "set-partition enumeration needs 1 <= n <= 9");
  if (term(s.w, 0) != 0.0) throw Error(Error::Kind::invalid_argument, "set partitions have no empty blocks; need w_0 = 0");
  auto lf = log_factorials(n);
  std::vector<double> vw(n + 1), ww(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    vw[i] = std::exp(lf[i]) * term(s.v, i);
    ww[i] = std::exp(lf[i]) * term(s.w, i);
  }
  std::vector<NeumaierSum> byN(n + 1);
  std::map<std::vector<std::size_t>, NeumaierSum> bySizes;
  NeumaierSum total;
  // restricted growth strings a[0..n-1], a[0] = 0, a[i] <= 1 + max(a[0..i-1])
  std::vector<std::size_t> a(n, 0), mx(n, 0);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == n) {
      std::size_t blocks = mx[n - 1] + 1;
      std::vector<std::size_t> sz(blocks, 0);
      for (std::size_t j = 0; j < n; ++j) ++sz[a[j]];
      double u = vw[blocks];
      for (std::size_t b : sz) u *= ww[b];
      if (u == 0.0) return;
      std::sort(sz.rbegin(), sz.rend());
      byN[blocks].add(u);
      bySizes[sz].add(u);
      total.add(u);
      return;
    }
    std::size_t top = mx[i - 1] + 1;
    for (std::size_t c = 0; c <= top; ++c) {
      a[i] = c;
      mx[i] = std::max(mx[i - 1], c);
      rec(i + 1);
    }
  };
  a[0] = 0;
  mx[0] = 0;
  rec(1);
  double Z = total.value();
  if (!(Z > 0.0)) throw Error(Error::Kind::invalid_argument, "u_n = 0: no admissible partition of this size");
  BruteForceLaw r;
  std::vector<double> pn(n + 1);
  for (std::size_t l = 0; l <= n; ++l) pn[l] = byN[l].value() / Z;
  r.N = DiscreteLaw::from_pmf(std::move(pn));
  for (auto& [k, v] : bySizes) r.multiset[k] = v.value() / Z;
  r.u_n = Z / std::exp(lf[n]);
  return r;
}

std::map<std::vector<std::size_t>, double> size_multiset_law(const ExactModel& m) {
  std::size_t n = m.n();
  if (n > 40) throw Error(Error::Kind::budget, "multiset enumeration is limited to n <= 40");
  if (m.X().pmf[0] != 0.0) throw Error(Error::Kind::invalid_argument, "multiset law needs w_0 = 0");
  double lP = std::log(m.p_SN_n());
  auto lf = log_factorials(n);
  std::map<std::vector<std::size_t>, double> out;
  std::vector<std::size_t> parts;
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t rem, std::size_t maxp) {
    if (rem == 0) {
      std::size_t l = parts.size();
      if (l > m.l_max()) return;
      double lg = log_or_neg_inf(m.N().pmf[l]) + lf[l];
      std::size_t i = 0;
      while (i < l) {
        std::size_t j = i;
        while (j < l && parts[j] == parts[i]) ++j;
        lg += (j - i) * log_or_neg_inf(m.X().pmf[parts[i]]) - lf[j - i];
        i = j;
      }
      double p = std::isinf(lg) ? 0.0 : std::exp(lg - lP);
      if (p > 0.0) out[parts] = p;
      return;
    }
    for (std::size_t k = std::min(rem, maxp); k >= 1; --k) {
      parts.push_back(k);
      rec(rem - k, k);
      parts.pop_back();
    }
  };
  rec(n, n);
  return out;
}

std::vector<double> product_limit_constants(const std::vector<WeightSequence>& f) {
  if (f.empty()) throw Error(Error::Kind::invalid_argument, "product needs at least one factor");
  for (const auto& w : f)
    if (w.is_explicit()) throw Error(Error::Kind::invalid_argument, "limit constants need closed-form factors");
  double rho = kInf;
  for (const auto& w : f) rho = std::min(rho, w.as_closed().rho);
  // dominant tails: minimal radius, then minimal exponent, then maximal log power
  double e = kInf;
  for (const auto& w : f)
    if (w.as_closed().rho == rho) e = std::min(e, w.as_closed().exponent);
  double lam = -kInf;
  for (const auto& w : f)
    if (w.as_closed().rho == rho && w.as_closed().exponent == e) lam = std::max(lam, w.as_closed().L.log_exp);
  if (!(e > 1.0)) throw Error(Error::Kind::invalid_argument, "factors must be subexponential (exponent > 1)");
  std::vector<double> p(f.size(), 0.0);
  double z = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const auto& c = f[k].as_closed();
    if (c.rho == rho && c.exponent == e && c.L.log_exp == lam) {
      double Wk = series_value(f[k], rho);
      if (!std::isfinite(Wk)) throw Error(Error::Kind::divergence, "factor series diverges at the common radius");
      p[k] = c.L.c / Wk;
      z += p[k];
    }
  }
  for (double& x : p) x /= z;
  return p;
}

ProductLaw product_law(const std::vector<WeightSequence>& f, std::size_t n) {
  if (f.empty()) throw Error(Error::Kind::invalid_argument, "product needs at least one factor");
  ProductLaw r;
  double rho = kInf;
  for (const auto& w : f) rho = std::min(rho, radius(w));
  if (!std::isfinite(rho)) rho = 1.0;
  auto all_finite = [&](double t) {
    for (const auto& w : f)
      if (!std::isfinite(series_value(w, t))) return false;
    return true;
  };
  for (int i = 0; i < 200 && !all_finite(rho); ++i) rho *= 0.99;
  if (!all_finite(rho)) throw Error(Error::Kind::divergence, "no common tilt with finite factor series");
  r.rho = rho;
  std::size_t L = f.size();
  for (const auto& w : f) r.factors.push_back(law_X(w, rho, n));
  auto conv = [&](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> c(n + 1, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (a[i] == 0.0) continue;
      for (std::size_t j = 0; i + j <= n; ++j) c[i + j] += a[i] * b[j];
    }
    return c;
  };
  std::vector<double> unit(n + 1, 0.0);
  unit[0] = 1.0;
  std::vector<std::vector<double>> pre(L + 1, unit), suf(L + 2, unit);
  for (std::size_t k = 1; k <= L; ++k) pre[k] = conv(pre[k - 1], r.factors[k - 1].pmf);
  for (std::size_t k = L; k >= 1; --k) suf[k] = conv(suf[k + 1], r.factors[k - 1].pmf);
  for (std::size_t k = 1; k <= L; ++k) {
    auto rest = conv(pre[k - 1], suf[k + 1]);
    std::vector<double> m(n + 1);
    for (std::size_t j = 0; j <= n; ++j) m[j] = r.factors[k - 1].pmf[j] * rest[n - j];
    double z = sum_of(m);
    if (!(z > 0.0)) throw Error(Error::Kind::invalid_argument, "o_n = 0");
    for (double& x : m) x /= z;
    DiscreteLaw d;
    d.pmf = std::move(m);
    d.mass_accounted = 1.0;
    r.marginals.push_back(std::move(d));
  }
  bool closed = std::none_of(f.begin(), f.end(), [](const WeightSequence& w) { return w.is_explicit(); });
  if (closed) r.p = product_limit_constants(f);
  return r;
}

namespace {

ExtendedLaw marginalize(std::vector<std::vector<double>> joint, double rho, std::size_t n) {
  ExtendedLaw r;
  r.rho = rho;
  std::vector<double> pl(joint.size(), 0.0), pm(n + 1, 0.0);
  for (std::size_t l = 0; l < joint.size(); ++l)
    for (std::size_t m = 0; m <= n; ++m) {
      pl[l] += joint[l][m];
      pm[m] += joint[l][m];
    }
  r.N_tilde = DiscreteLaw::from_pmf(std::move(pl));
  r.u_size = DiscreteLaw::from_pmf(std::move(pm));
  r.joint = std::move(joint);
  return r;
}

}  // namespace

ExtendedLaw extended_law(const SchemeSpec& s, std::size_t n) {
  if (!s.h) throw Error(Error::Kind::invalid_argument, "extended law needs an h sequence");
  SchemeSpec base = s;
  base.h.reset();
  ExactModel M(base, n);
  const auto& T = M.table();
  double lr = std::log(M.rho());
  std::size_t L = M.l_max();
  std::vector<std::vector<double>> lg(L + 1, std::vector<double>(n + 1, -kInf));
  double top = -kInf;
  for (std::size_t m = 0; m <= n; ++m) {
    double lh = log_term(*s.h, n - m);
    if (std::isinf(lh)) continue;
    lh += (n - m) * lr;
    for (std::size_t l = 0; l <= L; ++l) {
      double t = T.at(l, m), p = M.N().pmf[l];
      if (t == 0.0 || p == 0.0) continue;
      lg[l][m] = lh + std::log(p) + std::log(t);
      top = std::max(top, lg[l][m]);
    }
  }
  if (std::isinf(top)) throw Error(Error::Kind::invalid_argument, "o_n = 0 for the extended scheme");
  NeumaierSum z;
  for (auto& row : lg)
    for (double& x : row) {
      x = std::isinf(x) ? 0.0 : std::exp(x - top);
      z.add(x);
    }
  for (auto& row : lg)
    for (double& x : row) x /= z.value();
  return marginalize(std::move(lg), M.rho(), n);
}

ExtendedLaw extended_boltzmann_limit(const SchemeSpec& s, std::size_t n) {
  if (!s.h) throw Error(Error::Kind::invalid_argument, "extended limit needs an h sequence");
  double rho_h = radius(*s.h);
  if (!std::isfinite(rho_h)) throw Error(Error::Kind::divergence, "h has infinite radius; no Boltzmann limit");
  SchemeSpec base = s;
  base.h.reset();
  ExactModel M(base, n, rho_h);
  const auto& T = M.table();
  std::size_t L = M.l_max();
  std::vector<std::vector<double>> joint(L + 1, std::vector<double>(n + 1, 0.0));
  for (std::size_t l = 0; l <= L; ++l)
    for (std::size_t m = T.row_begin(l); m <= n; ++m) joint[l][m] = M.N().pmf[l] * T.at(l, m);
  return marginalize(std::move(joint), rho_h, n);
}

}  // namespace gibbs
