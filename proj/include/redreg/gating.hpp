#pragma once

#include <cstdint>

#include "redreg/matrix.hpp"

namespace redreg {

struct GateConfig {
  double tau_min = 0.2;
  double tau_max = 0.5;
  double redundancy_threshold = 0.15;  // R
  std::size_t total_epochs = 30;       // T in the threshold ramp
};

struct GateDecision {
  bool open = false;
  bool is_dominant = false;
  bool above_threshold = false;  // r > R (strict)
  bool sim_meets_tau = false;    // sim >= tau (non-strict)
  double sim = 0.0;
  double tau = 0.0;
};

// Mean cosine between paired rows after l2-normalizing each row; rows with
// norm < eps count as zero vectors. Column counts must match (project first
// if they do not).
double coinfo_similarity(const Matrix& za, const Matrix& zv, double epsilon);

// Fixed seeded Gaussian projection (from_dim x to_dim, entries N(0, 1/to_dim))
// for comparing representations of unequal width; drawn once per run.
Matrix coinfo_projection(std::size_t from_dim, std::size_t to_dim, std::uint64_t seed);

// Linear ramp tau(t) = tau_min + (t / T) * (tau_max - tau_min), 0 <= t <= T.
double threshold_schedule(std::size_t epoch, const GateConfig& cfg);

// Open iff the branch is dominant, its monitor score strictly exceeds R, and
// similarity is at least tau.
bool gate_coefficient(int modality, int dominant, double monitor_score, double sim,
                      double tau, double redundancy_threshold);

}  // namespace redreg
