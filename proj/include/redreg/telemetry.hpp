#pragma once

#include <array>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace redreg {

// One JSONL row. Every record kind has a fixed field set serialized in a fixed
// order with nulls for undefined values, so write -> parse -> write is
// byte-identical.
struct TelemetryRecord {
  enum class Kind { run, batch, epoch, abort };

  Kind kind = Kind::batch;

  // run: canonical bytes of the config dump
  std::string config_json;

  long long epoch = 0;
  long long batch = 0;
  std::optional<double> loss;

  // batch fields, per modality where applicable
  std::array<std::optional<double>, 2> p;
  std::optional<double> sim;
  std::array<std::optional<double>, 2> g_norm;
  std::array<int, 2> gate{0, 0};
  std::array<std::optional<double>, 2> d_perp_norm;
  std::array<std::optional<double>, 2> descent_ratio;

  // epoch fields
  std::array<std::optional<double>, 2> pbar, growth, red, score, rlc;
  std::optional<double> tau;
  std::optional<std::string> dominant;  // "a" or "v"
  std::optional<double> acc, acc_a, acc_v, f1;

  // abort
  std::string message;

  std::string to_line() const;
  static TelemetryRecord parse(const std::string& line);  // throws LoadError
};

class TelemetrySink {
 public:
  virtual ~TelemetrySink() = default;
  virtual void write(const TelemetryRecord& record) = 0;
};

class FileTelemetry : public TelemetrySink {
 public:
  explicit FileTelemetry(const std::string& path);
  void write(const TelemetryRecord& record) override;

 private:
  std::ofstream out_;
};

std::vector<TelemetryRecord> read_telemetry(const std::string& path);

}  // namespace redreg
