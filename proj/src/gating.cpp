#include "redreg/gating.hpp"

#include <cmath>
#include <stdexcept>

#include "redreg/rng.hpp"

namespace redreg {

double coinfo_similarity(const Matrix& za, const Matrix& zv, double epsilon) {
  if (za.rows() != zv.rows()) {
    throw std::invalid_argument("coinfo_similarity: row mismatch (" +
                                std::to_string(za.rows()) + " vs " +
                                std::to_string(zv.rows()) + ")");
  }
  if (za.cols() != zv.cols()) {
    throw std::invalid_argument("coinfo_similarity: column mismatch (" +
                                std::to_string(za.cols()) + " vs " +
                                std::to_string(zv.cols()) + "); project to a common width first");
  }
  if (za.rows() == 0) throw std::invalid_argument("coinfo_similarity: empty batch");

  double total = 0.0;
  for (std::size_t i = 0; i < za.rows(); ++i) {
    auto ra = za.row(i);
    auto rv = zv.row(i);
    double na = 0.0, nv = 0.0, dot = 0.0;
    for (std::size_t j = 0; j < ra.size(); ++j) {
      na += ra[j] * ra[j];
      nv += rv[j] * rv[j];
      dot += ra[j] * rv[j];
    }
    na = std::sqrt(na);
    nv = std::sqrt(nv);
    if (na < epsilon || nv < epsilon) continue;  // degenerate rows contribute 0
    total += dot / (na * nv);
  }
  return total / static_cast<double>(za.rows());
}

Matrix coinfo_projection(std::size_t from_dim, std::size_t to_dim, std::uint64_t seed) {
  if (to_dim == 0 || from_dim < to_dim) {
    throw std::invalid_argument("coinfo_projection: need from_dim >= to_dim >= 1");
  }
  RngState rng = fork_stream(seed, 0);
  return sample_gaussian(rng, from_dim, to_dim, 1.0 / std::sqrt(static_cast<double>(to_dim)));
}

double threshold_schedule(std::size_t epoch, const GateConfig& cfg) {
  if (cfg.total_epochs == 0) {
    throw std::invalid_argument("threshold_schedule: total_epochs must be > 0");
  }
  if (epoch > cfg.total_epochs) {
    throw std::invalid_argument("threshold_schedule: epoch " + std::to_string(epoch) +
                                " outside [0, " + std::to_string(cfg.total_epochs) + "]");
  }
  const double frac = static_cast<double>(epoch) / static_cast<double>(cfg.total_epochs);
  return cfg.tau_min + frac * (cfg.tau_max - cfg.tau_min);
}

bool gate_coefficient(int modality, int dominant, double monitor_score, double sim,
                      double tau, double redundancy_threshold) {
  if (!std::isfinite(monitor_score) || !std::isfinite(sim) || !std::isfinite(tau)) {
    throw std::invalid_argument("gate_coefficient: inputs must be finite");
  }
  return modality == dominant && monitor_score > redundancy_threshold && sim >= tau;
}

}  // namespace redreg
