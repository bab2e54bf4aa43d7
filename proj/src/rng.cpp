#include "redreg/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace redreg {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// One Box-Muller pair from two uniforms.
void gaussian_pair(RngState& rng, double& z0, double& z1) {
  const double u1 = 1.0 - rng.next_uniform();  // (0, 1]; keeps log() finite
  const double u2 = rng.next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  z0 = r * std::cos(t);
  z1 = r * std::sin(t);
}

}  // namespace

std::uint64_t RngState::next_u64() {
  ++counter;
  return mix(seed + counter * kGolden);
}

double RngState::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngState::next_gaussian() {
  double z0, z1;
  gaussian_pair(*this, z0, z1);
  (void)z1;
  return z0;
}

RngState fork_stream(std::uint64_t seed, std::uint64_t stream) {
  return RngState{mix(seed + (stream + 1) * kGolden), 0};
}

Matrix sample_gaussian(RngState& rng, std::size_t rows, std::size_t cols, double sigma) {
  if (sigma < 0.0 || !std::isfinite(sigma)) {
    throw std::invalid_argument("sample_gaussian: sigma must be finite and >= 0, got " +
                                std::to_string(sigma));
  }
  Matrix out(rows, cols);
  auto& v = out.values();
  std::size_t i = 0;
  for (; i + 1 < v.size(); i += 2) {
    double z0, z1;
    gaussian_pair(rng, z0, z1);
    v[i] = sigma * z0;
    v[i + 1] = sigma * z1;
  }
  if (i < v.size()) v[i] = sigma * rng.next_gaussian();
  return out;
}

}  // namespace redreg
