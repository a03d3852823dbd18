#pragma once
// Exact and rejection samplers for the component sizes, plus the statistics the verifiers read.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "gibbs/exact.hpp"

namespace gibbs {

// SplitMix64 stream. Streams for (seed, replicate, attempt) are independent of evaluation order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  static Rng stream(std::uint64_t seed, std::uint64_t replicate, std::uint64_t attempt = 0);

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  // uniform on [0, 1) with 53 random bits
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

struct PartitionSample {
  std::size_t n = 0;
  std::vector<std::size_t> sizes;  // K_1..K_{N_n}
  std::size_t N() const { return sizes.size(); }
};

class ExactSampler {
 public:
  explicit ExactSampler(const ExactModel& model);
  PartitionSample draw(Rng& rng) const;
  const DiscreteLaw& law_Nn() const { return law_; }

 private:
  const ExactModel& model_;
  DiscreteLaw law_;
  std::vector<double> cdf_;
};

PartitionSample sample_exact(const ExactModel& model, Rng& rng);

struct RejectionLog {
  std::uint64_t attempts = 0;
  std::uint64_t accepted = 0;
  double acceptance() const { return attempts ? double(accepted) / double(attempts) : 0.0; }
};

class RejectionSampler {
 public:
  RejectionSampler(const SchemeSpec& s, std::size_t n, std::uint64_t attempt_cap = 1000000000ULL);
  // attempt a uses Rng::stream(seed, replicate, a)
  PartitionSample draw(std::uint64_t seed, std::uint64_t replicate);
  // a single attempt; true when the draw sums to n
  bool attempt(std::uint64_t seed, std::uint64_t replicate, std::uint64_t a, PartitionSample* out);
  const RejectionLog& log() const { return log_; }

 private:
  std::size_t n_;
  std::uint64_t cap_;
  std::vector<double> cdfN_, cdfX_;
  RejectionLog log_;
};

PartitionSample sample_rejection(const SchemeSpec& s, std::size_t n, std::uint64_t seed,
                                 std::uint64_t replicate = 0);

class ProductSampler {
 public:
  ProductSampler(const std::vector<WeightSequence>& factors, std::size_t n);
  std::vector<std::size_t> draw(Rng& rng) const;

 private:
  std::size_t n_;
  std::vector<std::vector<double>> pA_;   // A_k at the common rho
  std::vector<std::vector<double>> suf_;  // law of A_k + ... + A_L
};

std::vector<std::size_t> sample_product(const std::vector<WeightSequence>& factors, std::size_t n, Rng& rng);

struct StatsRequest {
  std::vector<std::size_t> count_sizes;
  std::size_t path_grid = 0;  // 0: no path
  std::optional<double> mu;
  std::optional<double> scale;  // L(n) n^(1/alpha)
};

struct SampleStats {
  std::vector<std::size_t> order_stats;
  std::map<std::size_t, std::size_t> counts;
  std::vector<double> path;
  std::vector<double> points;  // K_i / n for K_i > 0, decreasing
  std::optional<bool> E_n;
};

SampleStats stats(const PartitionSample& s, const StatsRequest& req = {});

}  // namespace gibbs
