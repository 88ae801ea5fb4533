#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace clusterpool {

// Counter-based stream: the i-th draw is splitmix64's finalizer applied to
// key + (i+1)*golden. A key is derived from a master seed and a list of tags
// (replication, problem index, ...), so streams never depend on draw order
// elsewhere.
class Stream {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  explicit Stream(std::uint64_t key) : key_(key) {}
  Stream(std::uint64_t master, std::initializer_list<std::uint64_t> tags) : key_(derive(master, tags)) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t derive(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t k = mix(master + kGolden);
    for (auto t : tags) k = mix(k ^ mix(t + 0x632BE59BD9B4E019ULL));
    return k;
  }

  Stream child(std::initializer_list<std::uint64_t> tags) const { return Stream(derive(key_, tags)); }

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGolden); }
  // Uniform on the open interval (0,1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Inverse-CDF Gaussian (AS241).
  double normal(double mu, double sigma);
  // Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n);
  // k distinct indices of [0, n) in random order (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace clusterpool
