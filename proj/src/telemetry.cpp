#include "redreg/telemetry.hpp"

#include <json.hpp>

#include "redreg/errors.hpp"
#include "redreg/jsonio.hpp"

namespace redreg {

namespace {

using nlohmann::ordered_json;

constexpr int kTelemetryVersion = 1;

ordered_json opt(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

std::optional<double> get_opt(const ordered_json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw LoadError(std::string("telemetry: field \"") + key + "\" is not a number");
  return it->get<double>();
}

double get_num(const ordered_json& j, const char* key) {
  const auto v = get_opt(j, key);
  if (!v) throw LoadError(std::string("telemetry: missing numeric field \"") + key + "\"");
  return *v;
}

}  // namespace

std::string TelemetryRecord::to_line() const {
  ordered_json j;
  switch (kind) {
    case Kind::run: {
      j["kind"] = "run";
      j["version"] = kTelemetryVersion;
      ordered_json cfg;
      try {
        cfg = ordered_json::parse(config_json);
      } catch (const std::exception& e) {
        throw LoadError(std::string("telemetry: run record config is not JSON: ") + e.what());
      }
      j["config"] = std::move(cfg);
      break;
    }
    case Kind::batch: {
      j["kind"] = "batch";
      j["epoch"] = epoch;
      j["batch"] = batch;
      j["loss"] = opt(loss);
      j["p_a"] = opt(p[0]);
      j["p_v"] = opt(p[1]);
      j["sim"] = opt(sim);
      j["g_norm_a"] = opt(g_norm[0]);
      j["g_norm_v"] = opt(g_norm[1]);
      j["gate_a"] = gate[0];
      j["gate_v"] = gate[1];
      j["d_perp_norm_a"] = opt(d_perp_norm[0]);
      j["d_perp_norm_v"] = opt(d_perp_norm[1]);
      j["descent_ratio_a"] = opt(descent_ratio[0]);
      j["descent_ratio_v"] = opt(descent_ratio[1]);
      break;
    }
    case Kind::epoch: {
      j["kind"] = "epoch";
      j["epoch"] = epoch;
      j["batch"] = batch;
      j["loss"] = opt(loss);
      j["pbar_a"] = opt(pbar[0]);
      j["pbar_v"] = opt(pbar[1]);
      j["S_a"] = opt(growth[0]);
      j["S_v"] = opt(growth[1]);
      j["red_a"] = opt(red[0]);
      j["red_v"] = opt(red[1]);
      j["r_a"] = opt(score[0]);
      j["r_v"] = opt(score[1]);
      j["rlc_a"] = opt(rlc[0]);
      j["rlc_v"] = opt(rlc[1]);
      j["sim"] = opt(sim);
      j["tau"] = opt(tau);
      j["gate_a"] = gate[0];
      j["gate_v"] = gate[1];
      j["dominant"] = dominant ? ordered_json(*dominant) : ordered_json(nullptr);
      j["acc"] = opt(acc);
      j["acc_a"] = opt(acc_a);
      j["acc_v"] = opt(acc_v);
      j["f1"] = opt(f1);
      break;
    }
    case Kind::abort: {
      j["kind"] = "abort";
      j["epoch"] = epoch;
      j["batch"] = batch;
      j["loss"] = opt(loss);
      j["message"] = message;
      break;
    }
  }
  return dump_canonical(j);
}

TelemetryRecord TelemetryRecord::parse(const std::string& line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const std::exception& e) {
    throw LoadError(std::string("telemetry: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw LoadError("telemetry: record without a \"kind\" field");
  }
  const std::string kind = j["kind"].get<std::string>();

  TelemetryRecord r;
  if (kind == "run") {
    r.kind = Kind::run;
    if (!j.contains("config") || !j["config"].is_object()) {
      throw LoadError("telemetry: run record without config object");
    }
    r.config_json = dump_canonical(j["config"]);
    return r;
  }

  if (kind != "batch" && kind != "epoch" && kind != "abort") {
    throw LoadError("telemetry: unknown record kind \"" + kind + "\"");
  }
  r.epoch = static_cast<long long>(get_num(j, "epoch"));
  r.batch = static_cast<long long>(get_num(j, "batch"));
  r.loss = get_opt(j, "loss");

  if (kind == "abort") {
    r.kind = Kind::abort;
    if (!j.contains("message") || !j["message"].is_string()) {
      throw LoadError("telemetry: abort record without message");
    }
    r.message = j["message"].get<std::string>();
    return r;
  }

  if (kind == "batch") {
    r.kind = Kind::batch;
    r.p = {get_opt(j, "p_a"), get_opt(j, "p_v")};
    r.sim = get_opt(j, "sim");
    r.g_norm = {get_opt(j, "g_norm_a"), get_opt(j, "g_norm_v")};
    r.gate = {static_cast<int>(get_num(j, "gate_a")), static_cast<int>(get_num(j, "gate_v"))};
    r.d_perp_norm = {get_opt(j, "d_perp_norm_a"), get_opt(j, "d_perp_norm_v")};
    r.descent_ratio = {get_opt(j, "descent_ratio_a"), get_opt(j, "descent_ratio_v")};
    return r;
  }

  r.kind = Kind::epoch;
  r.pbar = {get_opt(j, "pbar_a"), get_opt(j, "pbar_v")};
  r.growth = {get_opt(j, "S_a"), get_opt(j, "S_v")};
  r.red = {get_opt(j, "red_a"), get_opt(j, "red_v")};
  r.score = {get_opt(j, "r_a"), get_opt(j, "r_v")};
  r.rlc = {get_opt(j, "rlc_a"), get_opt(j, "rlc_v")};
  r.sim = get_opt(j, "sim");
  r.tau = get_opt(j, "tau");
  r.gate = {static_cast<int>(get_num(j, "gate_a")), static_cast<int>(get_num(j, "gate_v"))};
  if (j.contains("dominant") && j["dominant"].is_string()) {
    r.dominant = j["dominant"].get<std::string>();
  }
  r.acc = get_opt(j, "acc");
  r.acc_a = get_opt(j, "acc_a");
  r.acc_v = get_opt(j, "acc_v");
  r.f1 = get_opt(j, "f1");
  return r;
}

FileTelemetry::FileTelemetry(const std::string& path) : out_(path, std::ios::binary) {
  if (!out_) throw LoadError("cannot write " + path);
}

void FileTelemetry::write(const TelemetryRecord& record) {
  out_ << record.to_line() << '\n';
}

std::vector<TelemetryRecord> read_telemetry(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path);
  std::vector<TelemetryRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(TelemetryRecord::parse(line));
    } catch (const LoadError& e) {
      throw LoadError(path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (records.empty()) throw LoadError(path + ": no telemetry records");
  return records;
}

}  // namespace redreg
