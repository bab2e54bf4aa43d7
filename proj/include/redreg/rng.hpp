#pragma once

#include <cstdint>

#include "redreg/matrix.hpp"

namespace redreg {

// Counter-based deterministic generator: each output is a SplitMix64-style
// hash of (seed, counter), so any saved (seed, counter) pair resumes the exact
// stream. No hidden state beyond the two fields.
struct RngState {
  std::uint64_t seed = 0;
  std::uint64_t counter = 0;

  std::uint64_t next_u64();
  double next_uniform();   // [0, 1)
  double next_gaussian();  // standard normal via Box-Muller; consumes two draws
};

// Independent stream derived from (seed, stream id); used to keep data
// generation, init, shuffling and monitoring draws from interleaving.
RngState fork_stream(std::uint64_t seed, std::uint64_t stream);

// rows x cols matrix of N(0, sigma^2) entries, filled row-major. sigma = 0
// yields zeros but still advances the generator by the same amount.
Matrix sample_gaussian(RngState& rng, std::size_t rows, std::size_t cols, double sigma);

}  // namespace redreg
