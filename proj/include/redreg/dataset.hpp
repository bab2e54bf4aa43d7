#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "redreg/matrix.hpp"

namespace redreg {

// Paired two-modality dataset. Row i of each feature matrix belongs to
// labels[i]; labels are in [0, classes).
struct Dataset {
  Matrix features_a;
  Matrix features_v;
  std::vector<int> labels;
  int classes = 0;

  std::size_t size() const { return labels.size(); }
};

struct SynthConfig {
  std::size_t samples = 2000;
  int classes = 4;
  std::size_t dim_a = 16;
  std::size_t dim_v = 16;
  double snr_a = 2.0;
  double snr_v = 0.5;
  std::uint64_t seed = 1;
};

// Class-conditional Gaussians: per modality each class gets a unit-norm mean
// direction; sample x = snr * mean[label] + unit Gaussian noise. Labels are
// assigned round-robin so classes stay balanced. Byte-identical output for
// equal configs.
Dataset generate_synthetic(const SynthConfig& cfg);

// Headerless CSV: one comma-separated feature row per sample, labels one
// integer per line. Throws LoadError naming file/row/column on bad cells or
// count mismatches.
Dataset load_csv(const std::string& features_a_path, const std::string& features_v_path,
                 const std::string& labels_path);
void save_csv(const Dataset& ds, const std::string& features_a_path,
              const std::string& features_v_path, const std::string& labels_path);

// Stratified split: per-class quotas via largest remainder so the train side
// has round(train_fraction * n) rows total; both sides keep ascending row
// order. Deterministic in (dataset, fraction, seed).
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                  std::uint64_t seed);

Dataset take(const Dataset& ds, std::span<const std::size_t> indices);

// One epoch's shuffled batch layout. The permutation depends on (seed, epoch)
// only; the final batch may be smaller.
struct BatchPlan {
  std::vector<std::size_t> order;
  std::size_t batch_size = 1;

  std::size_t num_batches() const;
  std::span<const std::size_t> batch(std::size_t i) const;
};

BatchPlan make_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                       std::size_t epoch);

}  // namespace redreg
