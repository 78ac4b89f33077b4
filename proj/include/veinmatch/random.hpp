#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace veinmatch {

// Deterministic generator shared by the synthetic benches. The engine is
// std::mt19937_64; the distributions are defined here because the <random>
// ones differ between standard libraries.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  double uniform();                    // [0, 1)
  double uniform(double lo, double hi);
  double normal();                     // standard normal, Box-Muller
  std::size_t index(std::size_t n);    // [0, n)

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Fisher-Yates driven by SeededRng (std::shuffle is implementation-defined).
template <typename T>
void seeded_shuffle(std::vector<T>& v, SeededRng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.index(i)]);
  }
}

}  // namespace veinmatch
