#pragma once

#include <stdexcept>
#include <string>

namespace redreg {

// Configuration or validation problem (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data: CSV cells, telemetry rows, checkpoints (CLI exit code 4).
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training loss became non-finite or exceeded the abort threshold (CLI exit code 3).
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::string message, long long epoch, long long batch, double loss)
      : std::runtime_error(std::move(message)), epoch(epoch), batch(batch), loss(loss) {}

  long long epoch = 0;
  long long batch = 0;
  double loss = 0.0;
};

}  // namespace redreg
