#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <vector>

namespace tgfuse {

// xoshiro256** seeded through splitmix64. Self-contained so that streams are
// byte-stable across standard libraries and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Derives an independent stream from a root seed, a stream name and
  // optional indices (epoch, target, ...). All randomness in a run flows
  // from one root seed through these named sub-streams.
  static Rng stream(std::uint64_t root, std::string_view name,
                    std::initializer_list<std::uint64_t> indices = {});

  std::uint64_t next();

  // Unbiased integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Uniform double in [0, 1) with 53-bit resolution.
  double uniform01();

  double uniform(double lo, double hi);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t s_[4];
};

}  // namespace tgfuse
