#include "gibbs/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "gibbs/numerics.hpp"
#include "gibbs/phase.hpp"

namespace gibbs {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<double> cumulative(const std::vector<double>& p) {
  std::vector<double> c(p.size());
  NeumaierSum s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    s.add(p[i]);
    c[i] = s.value();
  }
  return c;
}

// smallest index with u < cdf[i]; cdf.size() when u lands in the truncated tail
std::size_t invert(const std::vector<double>& cdf, double u) {
  return static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
}

}  // namespace

Rng Rng::stream(std::uint64_t seed, std::uint64_t replicate, std::uint64_t attempt) {
  std::uint64_t s = mix64(seed + 0x9E3779B97F4A7C15ULL);
  s = mix64(s ^ (replicate * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
  s = mix64(s ^ (attempt * 0xABC98388FB8FAC03ULL + 0x2545F4914F6CDD1DULL));
  return Rng(s);
}

ExactSampler::ExactSampler(const ExactModel& model) : model_(model), law_(model.law_Nn()) {
  cdf_ = cumulative(law_.pmf);
  model_.table();
}

PartitionSample ExactSampler::draw(Rng& rng) const {
  const auto& T = model_.table();
  const auto& q = model_.X().pmf;
  const std::size_t n = model_.n();
  PartitionSample out;
  out.n = n;
  std::size_t l = std::min(invert(cdf_, rng.uniform() * cdf_.back()), cdf_.size() - 1);
  while (law_.pmf[l] == 0.0 && l > 0) --l;
  out.sizes.reserve(l);
  std::size_t rem = n;
  for (std::size_t j = l; j >= 1; --j) {
    // P(X = k | S_j = rem) = q_k P(S_{j-1} = rem - k) / P(S_j = rem)
    double target = rng.uniform() * T.at(j, rem);
    NeumaierSum acc;
    std::size_t pick = rem, last = rem;
    bool found = false;
    for (std::size_t k = 0; k <= rem; ++k) {
      double t = q[k] * T.at(j - 1, rem - k);
      if (t == 0.0) continue;
      last = k;
      acc.add(t);
      if (target < acc.value()) {
        pick = k;
        found = true;
        break;
      }
    }
    if (!found) pick = last;
    out.sizes.push_back(pick);
    rem -= pick;
  }
  if (rem != 0) throw Error(Error::Kind::numeric, "exact sampler lost mass: sizes do not sum to n");
  return out;
}

PartitionSample sample_exact(const ExactModel& model, Rng& rng) { return ExactSampler(model).draw(rng); }

RejectionSampler::RejectionSampler(const SchemeSpec& s, std::size_t n, std::uint64_t attempt_cap)
    : n_(n), cap_(attempt_cap) {
  s.validate();
  double rho = working_rho(s);
  DiscreteLaw X = law_X(s.w, rho, n);
  std::size_t lmax = X.pmf[0] > 0.0 ? 4 * n : n;
  DiscreteLaw N = law_N(s, rho, lmax);
  // draws beyond the truncation cannot sum to n (w_0 = 0) and are rejected
  cdfN_ = cumulative(N.pmf);
  cdfX_ = cumulative(X.pmf);
}

bool RejectionSampler::attempt(std::uint64_t seed, std::uint64_t replicate, std::uint64_t a, PartitionSample* out) {
  Rng rng = Rng::stream(seed, replicate, a);
  ++log_.attempts;
  std::size_t l = invert(cdfN_, rng.uniform());
  if (l >= cdfN_.size()) return false;
  std::vector<std::size_t> sizes;
  sizes.reserve(l);
  std::size_t sum = 0;
  for (std::size_t i = 0; i < l; ++i) {
    std::size_t k = invert(cdfX_, rng.uniform());
    if (k >= cdfX_.size()) return false;
    sum += k;
    if (sum > n_) return false;
    sizes.push_back(k);
  }
  if (sum != n_) return false;
  ++log_.accepted;
  if (out) {
    out->n = n_;
    out->sizes = std::move(sizes);
  }
  return true;
}

PartitionSample RejectionSampler::draw(std::uint64_t seed, std::uint64_t replicate) {
  PartitionSample s;
  for (std::uint64_t a = 0; a < cap_; ++a)
    if (attempt(seed, replicate, a, &s)) return s;
  throw Error(Error::Kind::budget, "rejection sampler hit its attempt cap; measured acceptance " +
                                       fmt17(log_.acceptance()));
}

PartitionSample sample_rejection(const SchemeSpec& s, std::size_t n, std::uint64_t seed, std::uint64_t replicate) {
  RejectionSampler r(s, n);
  return r.draw(seed, replicate);
}

ProductSampler::ProductSampler(const std::vector<WeightSequence>& factors, std::size_t n) : n_(n) {
  ProductLaw pl = product_law(factors, n);
  std::size_t L = factors.size();
  for (const auto& f : pl.factors) pA_.push_back(f.pmf);
  suf_.assign(L + 1, std::vector<double>(n + 1, 0.0));
  suf_[L][0] = 1.0;
  for (std::size_t k = L; k-- > 0;) {
    auto& dst = suf_[k];
    const auto& src = suf_[k + 1];
    for (std::size_t i = 0; i <= n; ++i) {
      if (pA_[k][i] == 0.0) continue;
      for (std::size_t j = 0; i + j <= n; ++j) dst[i + j] += pA_[k][i] * src[j];
    }
  }
}

std::vector<std::size_t> ProductSampler::draw(Rng& rng) const {
  std::size_t L = pA_.size(), rem = n_;
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < L; ++k) {
    double target = rng.uniform() * suf_[k][rem];
    NeumaierSum acc;
    std::size_t pick = rem, last = rem;
    bool found = false;
    for (std::size_t j = 0; j <= rem; ++j) {
      double t = pA_[k][j] * suf_[k + 1][rem - j];
      if (t == 0.0) continue;
      last = j;
      acc.add(t);
      if (target < acc.value()) {
        pick = j;
        found = true;
        break;
      }
    }
    if (!found) pick = last;
    out.push_back(pick);
    rem -= pick;
  }
  if (rem != 0) throw Error(Error::Kind::numeric, "product sampler lost mass");
  return out;
}

std::vector<std::size_t> sample_product(const std::vector<WeightSequence>& factors, std::size_t n, Rng& rng) {
  return ProductSampler(factors, n).draw(rng);
}

SampleStats stats(const PartitionSample& s, const StatsRequest& req) {
  SampleStats r;
  std::size_t total = 0;
  for (std::size_t k : s.sizes) total += k;
  if (total != s.n) throw Error(Error::Kind::numeric, "sample sizes do not sum to n");
  r.order_stats = s.sizes;
  std::sort(r.order_stats.begin(), r.order_stats.end(), std::greater<>());
  for (std::size_t k : req.count_sizes) r.counts[k] = 0;
  for (std::size_t k : s.sizes) {
    auto it = r.counts.find(k);
    if (it != r.counts.end()) ++it->second;
  }
  for (std::size_t k : r.order_stats)
    if (k > 0) r.points.push_back(static_cast<double>(k) / static_cast<double>(s.n));
  if (req.mu) r.E_n = static_cast<double>(s.N()) >= static_cast<double>(s.n) / (2.0 * *req.mu);
  if (req.path_grid > 0) {
    if (!req.mu || !req.scale) throw Error(Error::Kind::invalid_argument, "path statistics need mu and the scale");
    std::vector<std::size_t> prefix(s.N() + 1, 0);
    for (std::size_t i = 0; i < s.N(); ++i) prefix[i + 1] = prefix[i] + s.sizes[i];
    double NN = static_cast<double>(s.N());
    for (std::size_t g = 0; g <= req.path_grid; ++g) {
      double t = static_cast<double>(g) / static_cast<double>(req.path_grid);
      std::size_t i = g == req.path_grid ? s.N() : static_cast<std::size_t>(std::floor(t * NN));
      r.path.push_back((static_cast<double>(prefix[i]) - NN * t * *req.mu) / *req.scale);
    }
  }
  return r;
}

}  // namespace gibbs
