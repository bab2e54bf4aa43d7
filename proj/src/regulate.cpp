#include "redreg/regulate.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace redreg {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw std::invalid_argument(std::string(op) + ": size mismatch (" + std::to_string(a) +
                                " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

void update_anchor(std::vector<double>& anchor, std::span<const double> params, double decay) {
  require_same_size(anchor.size(), params.size(), "update_anchor");
  if (decay < 0.0 || decay >= 1.0) {
    throw std::invalid_argument("update_anchor: decay must lie in [0, 1), got " +
                                std::to_string(decay));
  }
  for (std::size_t i = 0; i < anchor.size(); ++i) {
    anchor[i] = decay * anchor[i] + (1.0 - decay) * params[i];
  }
}

std::vector<double> anchor_direction(std::span<const double> params,
                                     std::span<const double> anchor) {
  require_same_size(params.size(), anchor.size(), "anchor_direction");
  std::vector<double> d(params.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = params[i] - anchor[i];
  return d;
}

std::vector<double> project_orthogonal(std::span<const double> direction,
                                       std::span<const double> gradient, double epsilon) {
  require_same_size(direction.size(), gradient.size(), "project_orthogonal");
  if (epsilon < 0.0) throw std::invalid_argument("project_orthogonal: epsilon must be >= 0");
  const double coef = dot(gradient, direction) / (dot(gradient, gradient) + epsilon);
  std::vector<double> out(direction.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = direction[i] - coef * gradient[i];
  return out;
}

std::vector<double> controlled_update(std::span<const double> gradient, bool gate,
                                      std::span<const double> direction_perp, double beta) {
  std::vector<double> out(gradient.begin(), gradient.end());
  if (!gate) return out;
  require_same_size(gradient.size(), direction_perp.size(), "controlled_update");
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += beta * direction_perp[i];
  return out;
}

void sgd_momentum_step(std::vector<double>& params, std::vector<double>& velocity,
                       std::span<const double> update, double learning_rate,
                       double momentum) {
  require_same_size(params.size(), velocity.size(), "sgd_momentum_step");
  require_same_size(params.size(), update.size(), "sgd_momentum_step");
  if (momentum < 0.0 || momentum >= 1.0) {
    throw std::invalid_argument("sgd_momentum_step: momentum must lie in [0, 1)");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity[i] = momentum * velocity[i] + update[i];
    params[i] -= learning_rate * velocity[i];
  }
}

}  // namespace redreg
