#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace tagbench {

// xoshiro256** seeded through splitmix64. Every draw below is defined in
// terms of next() alone, so sequences are identical across platforms and
// standard libraries (unlike std::uniform_int_distribution).
class Rng {
 public:
  static constexpr std::string_view kName = "xoshiro256ss-splitmix64/v1";

  explicit Rng(std::uint64_t seed);

  std::uint64_t next();

  // Unbiased integer in [0, bound). bound must be > 0.
  std::uint64_t uniform(std::uint64_t bound);

  // Double in [0, 1) with 53 random bits.
  double uniform01();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // k distinct indices from [0, n) in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

// FNV-1a, 64-bit.
std::uint64_t fnv1a64(std::string_view bytes);

// Independent stream seed for (experiment seed, tag), e.g. a target node id.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace tagbench
