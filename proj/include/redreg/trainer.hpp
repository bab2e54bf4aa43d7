#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "redreg/dataset.hpp"
#include "redreg/gating.hpp"
#include "redreg/matrix.hpp"
#include "redreg/model.hpp"
#include "redreg/monitor.hpp"
#include "redreg/regulate.hpp"
#include "redreg/telemetry.hpp"

namespace redreg {

enum class Method { joint, redreg };

struct RunConfig {
  Method method = Method::redreg;
  std::uint64_t seed = 1;
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  double lambda_uni = 0.0;       // weight of per-branch auxiliary losses
  double train_fraction = 0.8;

  struct DataConfig {
    std::string source = "synthetic";  // "synthetic" | "csv"
    SynthConfig synth;
    std::string features_a, features_v, labels;  // csv paths
  } data;

  struct ModelConfig {
    std::size_t hidden = 32;
    std::size_t repr = 16;
    Fusion fusion = Fusion::concat;
    Activation output_activation = Activation::relu;
  } model;

  MonitorConfig monitor;
  GateConfig gate;  // total_epochs mirrors `epochs` after config parsing
  RegulationConfig regulate;
  OptimizerConfig optimizer;
};

struct EvalReport {
  double accuracy = 0.0;
  std::array<double, 2> branch_accuracy{};
  double macro_f1 = 0.0;  // plain binary F1 of class 1 when there are 2 classes
  Matrix confusion;       // classes x classes counts, [true][predicted]
};

EvalReport evaluate(const ModelState& model, const Dataset& ds);

Dataset load_dataset(const RunConfig& cfg);

struct RunOutput {
  ModelState model;
  EvalReport final_eval;
  std::vector<TelemetryRecord> records;
};

// Splits the dataset, trains for cfg.epochs and evaluates on the held-out
// side every epoch. Telemetry goes to the returned record list and, when
// given, to the sink as the run progresses. Fully deterministic in
// (cfg, data); throws DivergenceError if the loss leaves [0, 1e6] or turns
// non-finite.
RunOutput train(const RunConfig& cfg, const Dataset& data, TelemetrySink* sink = nullptr);

struct ComparisonRow {
  std::string method;
  std::uint64_t seed = 0;
  double acc = 0.0, acc_a = 0.0, acc_v = 0.0, f1 = 0.0, gap = 0.0;
};

// One training run per (method, seed), method-major order. Each seed re-seeds
// the synthetic data too, so methods are compared on identical data within a
// seed. jobs > 1 runs them on a thread pool; output order stays fixed.
std::vector<ComparisonRow> compare_runs(const RunConfig& base, std::span<const Method> methods,
                                        std::span<const std::uint64_t> seeds,
                                        std::size_t jobs = 1);

std::string comparison_csv(std::span<const ComparisonRow> rows);
// Per-method mean and sample standard deviation of every summary column.
std::string comparison_summary_csv(std::span<const ComparisonRow> rows);

std::string method_name(Method m);

}  // namespace redreg
