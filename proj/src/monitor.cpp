#include "redreg/monitor.hpp"

#include <cmath>
#include <stdexcept>

namespace redreg {

double batch_correct_prob(const Matrix& probs, const std::vector<int>& labels) {
  if (probs.rows() == 0) throw std::invalid_argument("batch_correct_prob: empty batch");
  if (probs.rows() != labels.size()) {
    throw std::invalid_argument("batch_correct_prob: " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(probs.rows()) + " rows");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= probs.cols()) {
      throw std::invalid_argument("batch_correct_prob: label " + std::to_string(y) +
                                  " out of range [0, " + std::to_string(probs.cols()) + ")");
    }
    total += probs(i, static_cast<std::size_t>(y));
  }
  return total / static_cast<double>(probs.rows());
}

double window_mean(std::span<const double> window) {
  if (window.empty()) throw std::invalid_argument("window_mean: empty window");
  double total = 0.0;
  for (double v : window) total += v;
  return total / static_cast<double>(window.size());
}

double gain_growth_rate(double pbar_now, double pbar_prev, double epsilon) {
  return (pbar_now - pbar_prev) / (std::abs(pbar_prev) + epsilon);
}

double redundancy_score(const EncoderParams& enc, const Matrix& probe, double sigma,
                        double epsilon, RngState& rng) {
  if (!(sigma > 0.0)) throw std::invalid_argument("redundancy_score: sigma must be > 0");
  if (probe.rows() == 0) throw std::invalid_argument("redundancy_score: empty probe");
  const Matrix e1 = sample_gaussian(rng, probe.rows(), probe.cols(), sigma);
  const Matrix e2 = sample_gaussian(rng, probe.rows(), probe.cols(), sigma);
  const Matrix z1 = encode(enc, probe + e1);
  const Matrix z2 = encode(enc, probe + e2);
  return squared_distance(z1, z2) / (squared_distance(e1, e2) + epsilon);
}

double redundancy_monitor(double red, double growth, double gamma) {
  if (gamma < 0.0) throw std::invalid_argument("redundancy_monitor: gamma must be >= 0");
  return red - gamma * std::max(growth, 0.0);
}

double rlc_coupling(const Matrix& f_now, const Matrix& f_prev, const Matrix& z_now,
                    const Matrix& z_prev, double epsilon) {
  const double df = std::sqrt(squared_distance(f_now, f_prev));
  const double dz = std::sqrt(squared_distance(z_now, z_prev));
  return df / (dz + epsilon);
}

void ModalityMonitor::push(double epoch_p, std::size_t capacity) {
  if (capacity == 0) throw std::invalid_argument("ModalityMonitor: window capacity must be > 0");
  window.push_back(epoch_p);
  if (window.size() > capacity) window.erase(window.begin());
  pbar_prev = pbar;
  pbar = window_mean(window);
}

int dominant_modality(const MonitorState& state) {
  for (const auto& m : state.modality) {
    if (!m.pbar.has_value()) {
      throw std::invalid_argument("dominant_modality: both windows must be non-empty");
    }
  }
  // Strictly larger wins; tie goes to the first branch.
  return *state.modality[1].pbar > *state.modality[0].pbar ? 1 : 0;
}

}  // namespace redreg
