#include "redreg/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "redreg/errors.hpp"
#include "redreg/jsonio.hpp"
#include "redreg/rng.hpp"

namespace redreg {

namespace {

void fisher_yates(std::vector<std::size_t>& v, RngState& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = rng.next_u64() % i;
    std::swap(v[i - 1], v[j]);
  }
}

void validate_synth(const SynthConfig& cfg) {
  if (cfg.samples == 0) throw std::invalid_argument("generate_synthetic: samples must be > 0");
  if (cfg.classes < 2) throw std::invalid_argument("generate_synthetic: need >= 2 classes");
  if (cfg.dim_a == 0 || cfg.dim_v == 0)
    throw std::invalid_argument("generate_synthetic: feature dims must be > 0");
  if (!(cfg.snr_a > 0.0) || !(cfg.snr_v > 0.0))
    throw std::invalid_argument("generate_synthetic: snr values must be > 0");
}

// K unit-norm mean directions, one per class.
Matrix draw_means(RngState& rng, int classes, std::size_t dim) {
  Matrix means = sample_gaussian(rng, static_cast<std::size_t>(classes), dim, 1.0);
  for (int k = 0; k < classes; ++k) {
    auto row = means.row(static_cast<std::size_t>(k));
    double n2 = 0.0;
    for (double v : row) n2 += v * v;
    const double inv = 1.0 / std::sqrt(n2);
    for (double& v : row) v *= inv;
  }
  return means;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

Matrix parse_feature_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw LoadError(path + ": empty feature file");
  std::vector<double> values;
  std::size_t cols = 0;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    std::size_t c = 0, pos = 0;
    const std::string& line = lines[r];
    while (true) {
      const std::size_t comma = line.find(',', pos);
      const std::string cell = line.substr(pos, comma == std::string::npos
                                                    ? std::string::npos
                                                    : comma - pos);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size() || cell.empty() || !std::isfinite(v)) {
        throw LoadError(path + ": bad numeric cell at row " + std::to_string(r + 1) +
                        ", column " + std::to_string(c + 1));
      }
      values.push_back(v);
      ++c;
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (r == 0) {
      cols = c;
    } else if (c != cols) {
      throw LoadError(path + ": row " + std::to_string(r + 1) + " has " +
                      std::to_string(c) + " cells, expected " + std::to_string(cols));
    }
  }
  return Matrix(lines.size(), cols, std::move(values));
}

std::vector<int> parse_label_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw LoadError(path + ": empty label file");
  std::vector<int> labels;
  labels.reserve(lines.size());
  for (std::size_t r = 0; r < lines.size(); ++r) {
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(lines[r], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != lines[r].size() || lines[r].empty() || v < 0) {
      throw LoadError(path + ": bad label at row " + std::to_string(r + 1));
    }
    labels.push_back(static_cast<int>(v));
  }
  return labels;
}

}  // namespace

Dataset generate_synthetic(const SynthConfig& cfg) {
  validate_synth(cfg);
  RngState mean_rng = fork_stream(cfg.seed, 0);
  const Matrix means_a = draw_means(mean_rng, cfg.classes, cfg.dim_a);
  const Matrix means_v = draw_means(mean_rng, cfg.classes, cfg.dim_v);

  Dataset ds;
  ds.classes = cfg.classes;
  ds.labels.resize(cfg.samples);
  for (std::size_t i = 0; i < cfg.samples; ++i)
    ds.labels[i] = static_cast<int>(i % static_cast<std::size_t>(cfg.classes));

  RngState noise_rng = fork_stream(cfg.seed, 1);
  ds.features_a = Matrix(cfg.samples, cfg.dim_a);
  ds.features_v = Matrix(cfg.samples, cfg.dim_v);
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    const auto y = static_cast<std::size_t>(ds.labels[i]);
    const Matrix na = sample_gaussian(noise_rng, 1, cfg.dim_a, 1.0);
    for (std::size_t j = 0; j < cfg.dim_a; ++j)
      ds.features_a(i, j) = cfg.snr_a * means_a(y, j) + na(0, j);
    const Matrix nv = sample_gaussian(noise_rng, 1, cfg.dim_v, 1.0);
    for (std::size_t j = 0; j < cfg.dim_v; ++j)
      ds.features_v(i, j) = cfg.snr_v * means_v(y, j) + nv(0, j);
  }
  return ds;
}

Dataset load_csv(const std::string& features_a_path, const std::string& features_v_path,
                 const std::string& labels_path) {
  Dataset ds;
  ds.features_a = parse_feature_csv(features_a_path);
  ds.features_v = parse_feature_csv(features_v_path);
  ds.labels = parse_label_csv(labels_path);
  if (ds.features_a.rows() != ds.labels.size() ||
      ds.features_v.rows() != ds.labels.size()) {
    throw LoadError("row count mismatch: " + features_a_path + " has " +
                    std::to_string(ds.features_a.rows()) + ", " + features_v_path +
                    " has " + std::to_string(ds.features_v.rows()) + ", " + labels_path +
                    " has " + std::to_string(ds.labels.size()));
  }
  ds.classes = *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
  if (ds.classes < 2) throw LoadError(labels_path + ": need >= 2 classes");
  return ds;
}

void save_csv(const Dataset& ds, const std::string& features_a_path,
              const std::string& features_v_path, const std::string& labels_path) {
  auto write_features = [](const Matrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw LoadError("cannot write " + path);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t c = 0; c < m.cols(); ++c) {
        if (c) out << ',';
        out << format_double(m(r, c));
      }
      out << '\n';
    }
  };
  write_features(ds.features_a, features_a_path);
  write_features(ds.features_v, features_v_path);
  std::ofstream out(labels_path);
  if (!out) throw LoadError("cannot write " + labels_path);
  for (int y : ds.labels) out << y << '\n';
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                  std::uint64_t seed) {
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
    throw std::invalid_argument("split: train_fraction must lie in (0, 1), got " +
                                std::to_string(train_fraction));
  }
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.classes));
  for (std::size_t i = 0; i < ds.size(); ++i)
    by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);

  RngState rng = fork_stream(seed, 2);
  const auto target =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(ds.size())));

  // Largest-remainder quotas; ties go to the lower class id.
  std::vector<std::size_t> quota(by_class.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < by_class.size(); ++k) {
    const double exact = train_fraction * static_cast<double>(by_class[k].size());
    quota[k] = static_cast<std::size_t>(std::floor(exact));
    assigned += quota[k];
    remainders.emplace_back(exact - std::floor(exact), k);
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  for (std::size_t i = 0; assigned < target && i < remainders.size(); ++i) {
    const std::size_t k = remainders[i].second;
    if (quota[k] < by_class[k].size()) {
      ++quota[k];
      ++assigned;
    }
  }

  std::vector<std::size_t> train_idx, test_idx;
  for (std::size_t k = 0; k < by_class.size(); ++k) {
    auto& idx = by_class[k];
    fisher_yates(idx, rng);
    for (std::size_t i = 0; i < idx.size(); ++i)
      (i < quota[k] ? train_idx : test_idx).push_back(idx[i]);
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {take(ds, train_idx), take(ds, test_idx)};
}

Dataset take(const Dataset& ds, std::span<const std::size_t> indices) {
  Dataset out;
  out.classes = ds.classes;
  out.features_a = Matrix(indices.size(), ds.features_a.cols());
  out.features_v = Matrix(indices.size(), ds.features_v.cols());
  out.labels.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t src = indices[r];
    if (src >= ds.size()) throw std::invalid_argument("take: index out of range");
    std::copy_n(ds.features_a.row(src).data(), ds.features_a.cols(),
                out.features_a.row(r).data());
    std::copy_n(ds.features_v.row(src).data(), ds.features_v.cols(),
                out.features_v.row(r).data());
    out.labels.push_back(ds.labels[src]);
  }
  return out;
}

std::size_t BatchPlan::num_batches() const {
  return order.empty() ? 0 : (order.size() + batch_size - 1) / batch_size;
}

std::span<const std::size_t> BatchPlan::batch(std::size_t i) const {
  const std::size_t begin = i * batch_size;
  if (begin >= order.size()) throw std::invalid_argument("BatchPlan: batch index out of range");
  const std::size_t len = std::min(batch_size, order.size() - begin);
  return {order.data() + begin, len};
}

BatchPlan make_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                       std::size_t epoch) {
  if (batch_size == 0) throw std::invalid_argument("make_batches: batch_size must be > 0");
  BatchPlan plan;
  plan.batch_size = batch_size;
  plan.order.resize(n);
  std::iota(plan.order.begin(), plan.order.end(), std::size_t{0});
  RngState rng = fork_stream(seed, epoch);
  fisher_yates(plan.order, rng);
  return plan;
}

}  // namespace redreg
