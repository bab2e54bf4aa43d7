#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "redreg/matrix.hpp"
#include "redreg/model.hpp"
#include "redreg/rng.hpp"

namespace redreg {

struct MonitorConfig {
  std::size_t window = 5;      // sliding-window length over epoch-level p values
  double gamma = 0.5;          // growth discount in the redundant-phase score
  double sigma = 0.05;         // probe noise scale
  double epsilon = 1e-8;       // denominator guard
  std::size_t probe_size = 64; // fixed probe batch size
};

// Mean probability the branch assigns to the true class.
double batch_correct_prob(const Matrix& probs, const std::vector<int>& labels);

double window_mean(std::span<const double> window);

// Relative change of consecutive window means: (now - prev) / (|prev| + eps).
double gain_growth_rate(double pbar_now, double pbar_prev, double epsilon);

// Noise-pair redundancy: perturb the probe twice with N(0, sigma^2) noise and
// take ||Z1 - Z2||_F^2 / (||x1 - x2||_F^2 + eps). Draws exactly two noise
// matrices from rng per call.
double redundancy_score(const EncoderParams& enc, const Matrix& probe, double sigma,
                        double epsilon, RngState& rng);

// r = red - gamma * max(growth, 0): high redundancy only counts against a
// branch once its accuracy gain has flattened.
double redundancy_monitor(double red, double growth, double gamma);

// Representation-to-logit coupling ||f_now - f_prev||_F / (||z_now - z_prev||_F + eps).
double rlc_coupling(const Matrix& f_now, const Matrix& f_prev, const Matrix& z_now,
                    const Matrix& z_prev, double epsilon);

struct ModalityMonitor {
  std::vector<double> window;  // last <= capacity epoch-level p values
  std::optional<double> pbar;
  std::optional<double> pbar_prev;
  std::optional<double> growth;   // S
  std::optional<double> red;
  std::optional<double> score;    // r
  std::optional<double> rlc;
  std::optional<Matrix> probe_z;  // snapshots for the next rlc delta
  std::optional<Matrix> probe_f;

  // Appends one epoch-level p value and rolls the two window means forward.
  void push(double epoch_p, std::size_t capacity);
};

struct MonitorState {
  std::array<ModalityMonitor, 2> modality;
  std::optional<int> dominant;
};

// Index of the branch with the larger current window mean; ties go to
// modality 0. Both windows must be non-empty.
int dominant_modality(const MonitorState& state);

}  // namespace redreg
