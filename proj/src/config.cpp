#include "redreg/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "redreg/errors.hpp"
#include "redreg/jsonio.hpp"

namespace redreg {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& message) { throw ConfigError(message); }

void check_keys(const ordered_json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail("config: unknown key \"" + where + it.key() + "\"");
  }
}

double require_number(const ordered_json& obj, const std::string& path, const char* key,
                      double fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) fail("config: \"" + path + key + "\" must be a number");
  return it->get<double>();
}

std::uint64_t require_uint(const ordered_json& obj, const std::string& path, const char* key,
                           std::uint64_t fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0)) {
    fail("config: \"" + path + key + "\" must be a non-negative integer");
  }
  return it->get<std::uint64_t>();
}

std::string require_string(const ordered_json& obj, const std::string& path, const char* key,
                           std::string fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_string()) fail("config: \"" + path + key + "\" must be a string");
  return it->get<std::string>();
}

void check_range(double v, const char* what, double lo, double hi, bool lo_open, bool hi_open) {
  const bool ok = (lo_open ? v > lo : v >= lo) && (hi_open ? v < hi : v <= hi);
  if (!std::isfinite(v) || !ok) {
    fail(std::string("config: constraint violated: ") + what);
  }
}

}  // namespace

RunConfig parse_run_config(const ordered_json& j) {
  if (!j.is_object()) fail("config: top level must be a JSON object");
  check_keys(j, "",
             {"method", "seed", "epochs", "batch_size", "lambda_uni", "train_fraction",
              "data", "model", "monitor", "gate", "regulate", "optimizer"});

  RunConfig cfg;

  const std::string method = require_string(j, "", "method", "redreg");
  if (method == "joint") {
    cfg.method = Method::joint;
  } else if (method == "redreg") {
    cfg.method = Method::redreg;
  } else {
    fail("config: \"method\" must be \"joint\" or \"redreg\", got \"" + method + "\"");
  }

  cfg.seed = require_uint(j, "", "seed", cfg.seed);
  cfg.epochs = require_uint(j, "", "epochs", cfg.epochs);
  if (cfg.epochs < 3) fail("config: constraint violated: epochs >= 3");
  cfg.batch_size = require_uint(j, "", "batch_size", cfg.batch_size);
  if (cfg.batch_size == 0) fail("config: constraint violated: batch_size >= 1");
  cfg.lambda_uni = require_number(j, "", "lambda_uni", cfg.lambda_uni);
  check_range(cfg.lambda_uni, "0 <= lambda_uni <= 1", 0.0, 1.0, false, false);
  cfg.train_fraction = require_number(j, "", "train_fraction", cfg.train_fraction);
  check_range(cfg.train_fraction, "0 < train_fraction < 1", 0.0, 1.0, true, true);

  if (j.contains("data")) {
    const auto& d = j["data"];
    if (!d.is_object()) fail("config: \"data\" must be an object");
    check_keys(d, "data.",
               {"source", "samples", "classes", "dim_a", "dim_v", "snr_a", "snr_v", "seed",
                "features_a", "features_v", "labels"});
    cfg.data.source = require_string(d, "data.", "source", cfg.data.source);
    if (cfg.data.source != "synthetic" && cfg.data.source != "csv") {
      fail("config: \"data.source\" must be \"synthetic\" or \"csv\"");
    }
    cfg.data.synth.samples = require_uint(d, "data.", "samples", cfg.data.synth.samples);
    cfg.data.synth.classes =
        static_cast<int>(require_uint(d, "data.", "classes", static_cast<std::uint64_t>(cfg.data.synth.classes)));
    cfg.data.synth.dim_a = require_uint(d, "data.", "dim_a", cfg.data.synth.dim_a);
    cfg.data.synth.dim_v = require_uint(d, "data.", "dim_v", cfg.data.synth.dim_v);
    cfg.data.synth.snr_a = require_number(d, "data.", "snr_a", cfg.data.synth.snr_a);
    cfg.data.synth.snr_v = require_number(d, "data.", "snr_v", cfg.data.synth.snr_v);
    cfg.data.synth.seed = require_uint(d, "data.", "seed", cfg.data.synth.seed);
    cfg.data.features_a = require_string(d, "data.", "features_a", cfg.data.features_a);
    cfg.data.features_v = require_string(d, "data.", "features_v", cfg.data.features_v);
    cfg.data.labels = require_string(d, "data.", "labels", cfg.data.labels);
  }
  if (cfg.data.source == "synthetic") {
    if (cfg.data.synth.samples < 8) fail("config: constraint violated: data.samples >= 8");
    if (cfg.data.synth.classes < 2) fail("config: constraint violated: data.classes >= 2");
    if (cfg.data.synth.dim_a == 0 || cfg.data.synth.dim_v == 0) {
      fail("config: constraint violated: data dims >= 1");
    }
    check_range(cfg.data.synth.snr_a, "data.snr_a > 0", 0.0,
                std::numeric_limits<double>::max(), true, false);
    check_range(cfg.data.synth.snr_v, "data.snr_v > 0", 0.0,
                std::numeric_limits<double>::max(), true, false);
  } else {
    if (cfg.data.features_a.empty() || cfg.data.features_v.empty() || cfg.data.labels.empty()) {
      fail("config: csv source needs data.features_a, data.features_v and data.labels paths");
    }
  }

  if (j.contains("model")) {
    const auto& m = j["model"];
    if (!m.is_object()) fail("config: \"model\" must be an object");
    check_keys(m, "model.", {"hidden", "repr", "fusion", "output_activation"});
    cfg.model.hidden = require_uint(m, "model.", "hidden", cfg.model.hidden);
    cfg.model.repr = require_uint(m, "model.", "repr", cfg.model.repr);
    if (cfg.model.hidden == 0 || cfg.model.repr == 0) {
      fail("config: constraint violated: model dims >= 1");
    }
    const std::string fusion = require_string(m, "model.", "fusion", "concat");
    if (fusion == "concat") {
      cfg.model.fusion = Fusion::concat;
    } else if (fusion == "sum") {
      cfg.model.fusion = Fusion::sum;
    } else {
      fail("config: \"model.fusion\" must be \"concat\" or \"sum\"");
    }
    const std::string act = require_string(
        m, "model.", "output_activation",
        cfg.model.output_activation == Activation::relu ? "relu" : "identity");
    if (act == "relu") {
      cfg.model.output_activation = Activation::relu;
    } else if (act == "identity") {
      cfg.model.output_activation = Activation::identity;
    } else {
      fail("config: \"model.output_activation\" must be \"identity\" or \"relu\"");
    }
  }

  if (j.contains("monitor")) {
    const auto& m = j["monitor"];
    if (!m.is_object()) fail("config: \"monitor\" must be an object");
    check_keys(m, "monitor.", {"window", "gamma", "sigma", "epsilon", "probe_size"});
    cfg.monitor.window = require_uint(m, "monitor.", "window", cfg.monitor.window);
    if (cfg.monitor.window < 2) fail("config: constraint violated: monitor.window >= 2");
    cfg.monitor.gamma = require_number(m, "monitor.", "gamma", cfg.monitor.gamma);
    check_range(cfg.monitor.gamma, "monitor.gamma >= 0", 0.0,
                std::numeric_limits<double>::max(), false, false);
    cfg.monitor.sigma = require_number(m, "monitor.", "sigma", cfg.monitor.sigma);
    check_range(cfg.monitor.sigma, "monitor.sigma > 0", 0.0,
                std::numeric_limits<double>::max(), true, false);
    cfg.monitor.epsilon = require_number(m, "monitor.", "epsilon", cfg.monitor.epsilon);
    check_range(cfg.monitor.epsilon, "monitor.epsilon > 0", 0.0, 1.0, true, false);
    cfg.monitor.probe_size = require_uint(m, "monitor.", "probe_size", cfg.monitor.probe_size);
    if (cfg.monitor.probe_size == 0) fail("config: constraint violated: monitor.probe_size >= 1");
  }

  if (j.contains("gate")) {
    const auto& g = j["gate"];
    if (!g.is_object()) fail("config: \"gate\" must be an object");
    check_keys(g, "gate.", {"tau_min", "tau_max", "R"});
    cfg.gate.tau_min = require_number(g, "gate.", "tau_min", cfg.gate.tau_min);
    cfg.gate.tau_max = require_number(g, "gate.", "tau_max", cfg.gate.tau_max);
    if (g.contains("R")) {
      if (g["R"].is_string()) {
        const std::string r = g["R"].get<std::string>();
        if (r != "inf" && r != "+inf") {
          fail("config: \"gate.R\" must be a number or \"inf\"");
        }
        cfg.gate.redundancy_threshold = std::numeric_limits<double>::infinity();
      } else if (g["R"].is_number()) {
        cfg.gate.redundancy_threshold = g["R"].get<double>();
      } else {
        fail("config: \"gate.R\" must be a number or \"inf\"");
      }
    }
  }
  if (!(cfg.gate.tau_min > 0.0) || !(cfg.gate.tau_min < cfg.gate.tau_max) ||
      !(cfg.gate.tau_max < 1.0)) {
    fail("config: constraint violated: 0 < gate.tau_min < gate.tau_max < 1");
  }
  if (std::isnan(cfg.gate.redundancy_threshold)) {
    fail("config: \"gate.R\" must not be NaN");
  }
  cfg.gate.total_epochs = cfg.epochs;

  if (j.contains("regulate")) {
    const auto& r = j["regulate"];
    if (!r.is_object()) fail("config: \"regulate\" must be an object");
    check_keys(r, "regulate.", {"beta", "anchor_decay", "epsilon"});
    cfg.regulate.beta = require_number(r, "regulate.", "beta", cfg.regulate.beta);
    check_range(cfg.regulate.beta, "regulate.beta >= 0", 0.0,
                std::numeric_limits<double>::max(), false, false);
    cfg.regulate.anchor_decay = require_number(r, "regulate.", "anchor_decay", cfg.regulate.anchor_decay);
    check_range(cfg.regulate.anchor_decay, "0 <= regulate.anchor_decay < 1", 0.0, 1.0, false, true);
    cfg.regulate.epsilon = require_number(r, "regulate.", "epsilon", cfg.regulate.epsilon);
    check_range(cfg.regulate.epsilon, "regulate.epsilon > 0", 0.0, 1.0, true, false);
  }

  if (j.contains("optimizer")) {
    const auto& o = j["optimizer"];
    if (!o.is_object()) fail("config: \"optimizer\" must be an object");
    check_keys(o, "optimizer.", {"learning_rate", "momentum"});
    cfg.optimizer.learning_rate =
        require_number(o, "optimizer.", "learning_rate", cfg.optimizer.learning_rate);
    check_range(cfg.optimizer.learning_rate, "optimizer.learning_rate > 0", 0.0,
                std::numeric_limits<double>::max(), true, false);
    cfg.optimizer.momentum = require_number(o, "optimizer.", "momentum", cfg.optimizer.momentum);
    check_range(cfg.optimizer.momentum, "0 <= optimizer.momentum < 1", 0.0, 1.0, false, true);
  }

  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("config: cannot open " + path);
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const std::exception& e) {
    fail(path + ": invalid JSON: " + std::string(e.what()));
  }
  return parse_run_config(j);
}

ordered_json run_config_json(const RunConfig& cfg) {
  ordered_json j;
  j["method"] = method_name(cfg.method);
  j["seed"] = cfg.seed;
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["lambda_uni"] = cfg.lambda_uni;
  j["train_fraction"] = cfg.train_fraction;

  ordered_json d;
  d["source"] = cfg.data.source;
  d["samples"] = cfg.data.synth.samples;
  d["classes"] = cfg.data.synth.classes;
  d["dim_a"] = cfg.data.synth.dim_a;
  d["dim_v"] = cfg.data.synth.dim_v;
  d["snr_a"] = cfg.data.synth.snr_a;
  d["snr_v"] = cfg.data.synth.snr_v;
  d["seed"] = cfg.data.synth.seed;
  d["features_a"] = cfg.data.features_a;
  d["features_v"] = cfg.data.features_v;
  d["labels"] = cfg.data.labels;
  j["data"] = std::move(d);

  ordered_json m;
  m["hidden"] = cfg.model.hidden;
  m["repr"] = cfg.model.repr;
  m["fusion"] = cfg.model.fusion == Fusion::concat ? "concat" : "sum";
  m["output_activation"] =
      cfg.model.output_activation == Activation::relu ? "relu" : "identity";
  j["model"] = std::move(m);

  ordered_json mon;
  mon["window"] = cfg.monitor.window;
  mon["gamma"] = cfg.monitor.gamma;
  mon["sigma"] = cfg.monitor.sigma;
  mon["epsilon"] = cfg.monitor.epsilon;
  mon["probe_size"] = cfg.monitor.probe_size;
  j["monitor"] = std::move(mon);

  ordered_json g;
  g["tau_min"] = cfg.gate.tau_min;
  g["tau_max"] = cfg.gate.tau_max;
  if (std::isinf(cfg.gate.redundancy_threshold)) {
    g["R"] = "inf";
  } else {
    g["R"] = cfg.gate.redundancy_threshold;
  }
  j["gate"] = std::move(g);

  ordered_json r;
  r["beta"] = cfg.regulate.beta;
  r["anchor_decay"] = cfg.regulate.anchor_decay;
  r["epsilon"] = cfg.regulate.epsilon;
  j["regulate"] = std::move(r);

  ordered_json o;
  o["learning_rate"] = cfg.optimizer.learning_rate;
  o["momentum"] = cfg.optimizer.momentum;
  j["optimizer"] = std::move(o);

  return j;
}

std::string run_config_canonical(const RunConfig& cfg) {
  return dump_canonical(run_config_json(cfg));
}

void apply_override(ordered_json& cfg, const std::string& dotted_key, const std::string& value) {
  if (dotted_key.empty()) fail("config: empty override key");
  ordered_json* node = &cfg;
  std::size_t pos = 0;
  while (true) {
    const std::size_t dotpos = dotted_key.find('.', pos);
    const std::string part = dotted_key.substr(pos, dotpos == std::string::npos
                                                        ? std::string::npos
                                                        : dotpos - pos);
    if (part.empty()) fail("config: malformed override key \"" + dotted_key + "\"");
    if (dotpos == std::string::npos) {
      if (!node->is_object())
        fail("config: override key \"" + dotted_key + "\" crosses a non-object");
      ordered_json parsed;
      try {
        parsed = ordered_json::parse(value);
      } catch (const std::exception&) {
        parsed = value;  // not a JSON scalar: keep the raw string
      }
      if (parsed.is_object() || parsed.is_array()) parsed = value;
      (*node)[part] = std::move(parsed);
      return;
    }
    if (!node->is_object()) fail("config: override key \"" + dotted_key + "\" crosses a non-object");
    node = &(*node)[part];
    if (node->is_null()) *node = ordered_json::object();
    pos = dotpos + 1;
  }
}

}  // namespace redreg
