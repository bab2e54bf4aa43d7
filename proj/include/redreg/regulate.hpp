#pragma once

#include <span>
#include <vector>

namespace redreg {

struct RegulationConfig {
  double beta = 0.9;          // strength of the anchor-direction term
  double anchor_decay = 0.99; // per-epoch EMA factor for the anchors
  double epsilon = 1e-8;      // projection denominator guard
};

struct OptimizerConfig {
  double learning_rate = 0.002;
  double momentum = 0.9;
};

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

// anchor <- decay * anchor + (1 - decay) * params.
void update_anchor(std::vector<double>& anchor, std::span<const double> params, double decay);

// Drift of the live parameters away from their anchor: params - anchor.
std::vector<double> anchor_direction(std::span<const double> params,
                                     std::span<const double> anchor);

// Component of direction orthogonal to gradient, computed as
// d - g * (<g, d> / (||g||^2 + eps)) without forming the projector matrix.
std::vector<double> project_orthogonal(std::span<const double> direction,
                                       std::span<const double> gradient, double epsilon);

// g + beta * direction_perp when the gate is open; a bitwise copy of g when it
// is closed, so a closed gate can never perturb the trajectory.
std::vector<double> controlled_update(std::span<const double> gradient, bool gate,
                                      std::span<const double> direction_perp, double beta);

// velocity <- momentum * velocity + update; params <- params - learning_rate * velocity.
void sgd_momentum_step(std::vector<double>& params, std::vector<double>& velocity,
                       std::span<const double> update, double learning_rate,
                       double momentum);

}  // namespace redreg
