#pragma once

#include <cstdint>
#include <string_view>

#include "giant/types.hpp"

namespace giant {

// Counter-based deterministic generator. The integer stream is SplitMix64
// (Steele et al., "Fast splittable pseudorandom number generators"): the
// state advances by the 64-bit golden-ratio constant and each output is a
// fixed finalizer of the counter, so streams depend only on the seed and
// the number of draws, not on platform library behaviour. Gaussians come
// from Box-Muller on top of the integer stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  // Uniform in [0, 1).
  double next_double();

  // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
  std::uint64_t next_below(std::uint64_t n);

  // Standard normal draw (Box-Muller pair, one value cached).
  double next_gaussian();

  Matrix gaussian(Index rows, Index cols);
  Matrix uniform(Index rows, Index cols, double lo, double hi);
  Vector gaussian_vector(Index n);

  // Fisher-Yates shuffle of [0, n) index vector.
  std::vector<int> permutation(int n);

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// i.i.d. standard normal draws with the given shape.
inline Matrix gaussian_sample(Rng& rng, Index rows, Index cols) {
  return rng.gaussian(rows, cols);
}

// Stage-level sub-seed: FNV-1a hash of the stage name mixed with the root
// seed, so each pipeline stage gets an independent reproducible stream.
std::uint64_t derive_seed(std::string_view stage, std::uint64_t root_seed);

}  // namespace giant
