#include "redreg/cli.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "redreg/config.hpp"
#include "redreg/errors.hpp"
#include "redreg/jsonio.hpp"
#include "redreg/svg.hpp"
#include "redreg/trainer.hpp"

namespace redreg {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
};

void add_common(CLI::App* sub, CommonOpts& opts) {
  sub->add_option("--config", opts.config_path, "JSON run configuration");
  sub->add_option("--set", opts.overrides,
                  "Override a config key, dot-path syntax (repeatable, last wins)");
  sub->add_option("--out", opts.out_dir, "Output directory (default: $REDREG_OUT or .)");
}

fs::path resolve_out_dir(const CommonOpts& opts) {
  std::string dir = opts.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv("REDREG_OUT");
    dir = env && *env ? env : ".";
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory \"" + dir + "\": " + ec.message());
  return dir;
}

ordered_json load_config_json(const std::string& path) {
  if (path.empty()) return ordered_json::object();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return ordered_json::parse(buf.str());
  } catch (const std::exception& e) {
    throw ConfigError("config: invalid JSON in \"" + path + "\": " + e.what());
  }
}

ordered_json resolve_config_json(const CommonOpts& opts) {
  ordered_json j = load_config_json(opts.config_path);
  for (const auto& entry : opts.overrides) {
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("--set expects key=value, got \"" + entry + "\"");
    }
    apply_override(j, entry.substr(0, eq), entry.substr(eq + 1));
  }
  return j;
}

RunConfig resolve_config(const CommonOpts& opts) {
  return parse_run_config(resolve_config_json(opts));
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write \"" + path.string() + "\"");
  out << content;
  if (!out) throw ConfigError("write failed for \"" + path.string() + "\"");
}

// The one place wall-clock time is allowed; everything else stays
// byte-reproducible.
void write_side_log(const fs::path& dir, const std::string& command,
                    const std::string& details) {
  char stamp[32] = "unknown";
  const std::time_t now = std::time(nullptr);
  if (std::tm tm_utc{}; gmtime_r(&now, &tm_utc) != nullptr) {
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  }
  std::ofstream out(dir / "run.log", std::ios::binary | std::ios::app);
  out << stamp << " " << command << " " << details << "\n";
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
      seeds.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("--seeds expects comma-separated integers, got \"" + part + "\"");
    }
  }
  if (seeds.empty()) throw ConfigError("--seeds list is empty");
  return seeds;
}

std::vector<Method> parse_method_list(const std::string& text) {
  std::vector<Method> methods;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part == "joint") {
      methods.push_back(Method::joint);
    } else if (part == "redreg") {
      methods.push_back(Method::redreg);
    } else {
      throw ConfigError("--methods accepts joint|redreg, got \"" + part + "\"");
    }
  }
  if (methods.empty()) throw ConfigError("--methods list is empty");
  return methods;
}

std::string opt_cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::string epoch_summary_csv(const std::vector<TelemetryRecord>& records) {
  std::string csv =
      "epoch,loss,pbar_a,pbar_v,S_a,S_v,red_a,red_v,r_a,r_v,rlc_a,rlc_v,sim,tau,"
      "gate_a,gate_v,dominant,acc,acc_a,acc_v,f1\n";
  for (const auto& r : records) {
    if (r.kind != TelemetryRecord::Kind::epoch) continue;
    csv += std::to_string(r.epoch) + "," + opt_cell(r.loss);
    for (int m = 0; m < 2; ++m) csv += "," + opt_cell(r.pbar[static_cast<std::size_t>(m)]);
    for (int m = 0; m < 2; ++m) csv += "," + opt_cell(r.growth[static_cast<std::size_t>(m)]);
    for (int m = 0; m < 2; ++m) csv += "," + opt_cell(r.red[static_cast<std::size_t>(m)]);
    for (int m = 0; m < 2; ++m) csv += "," + opt_cell(r.score[static_cast<std::size_t>(m)]);
    for (int m = 0; m < 2; ++m) csv += "," + opt_cell(r.rlc[static_cast<std::size_t>(m)]);
    csv += "," + opt_cell(r.sim) + "," + opt_cell(r.tau);
    csv += "," + std::to_string(r.gate[0]) + "," + std::to_string(r.gate[1]);
    csv += "," + r.dominant.value_or("");
    csv += "," + opt_cell(r.acc) + "," + opt_cell(r.acc_a) + "," + opt_cell(r.acc_v) + "," +
           opt_cell(r.f1) + "\n";
  }
  return csv;
}

int cmd_gen_data(const CommonOpts& opts) {
  const RunConfig cfg = resolve_config(opts);
  const fs::path dir = resolve_out_dir(opts);
  const Dataset ds = generate_synthetic(cfg.data.synth);
  save_csv(ds, (dir / "features_a.csv").string(), (dir / "features_v.csv").string(),
           (dir / "labels.csv").string());
  write_side_log(dir, "gen-data",
                 std::to_string(ds.size()) + " samples, " + std::to_string(ds.classes) +
                     " classes, seed " + std::to_string(cfg.data.synth.seed));
  std::cout << "wrote " << ds.size() << " samples to " << dir.string() << "\n";
  return 0;
}

int cmd_train(const CommonOpts& opts) {
  const RunConfig cfg = resolve_config(opts);
  const fs::path dir = resolve_out_dir(opts);
  const Dataset data = load_dataset(cfg);

  write_text(dir / "config.json", run_config_canonical(cfg) + "\n");
  FileTelemetry sink((dir / "telemetry.jsonl").string());
  const RunOutput out = train(cfg, data, &sink);

  save_checkpoint(out.model, (dir / "checkpoint.json").string());
  write_text(dir / "summary.csv", epoch_summary_csv(out.records));
  write_side_log(dir, "train",
                 method_name(cfg.method) + " seed " + std::to_string(cfg.seed) + " acc " +
                     format_double(out.final_eval.accuracy));
  std::cout << "final acc " << format_double(out.final_eval.accuracy) << " (branch a "
            << format_double(out.final_eval.branch_accuracy[0]) << ", branch v "
            << format_double(out.final_eval.branch_accuracy[1]) << ")\n";
  return 0;
}

int cmd_compare(const CommonOpts& opts, const std::string& methods_text,
                const std::string& seeds_text, std::size_t jobs) {
  const RunConfig cfg = resolve_config(opts);
  const fs::path dir = resolve_out_dir(opts);
  const std::vector<Method> methods = parse_method_list(methods_text);
  const std::vector<std::uint64_t> seeds = parse_seed_list(seeds_text);

  const std::vector<ComparisonRow> rows = compare_runs(cfg, methods, seeds, jobs);
  write_text(dir / "comparison.csv", comparison_csv(rows));
  write_text(dir / "comparison_summary.csv", comparison_summary_csv(rows));
  write_side_log(dir, "compare",
                 std::to_string(methods.size()) + " methods x " + std::to_string(seeds.size()) +
                     " seeds");
  std::cout << comparison_summary_csv(rows);
  return 0;
}

int cmd_sweep(const CommonOpts& opts, const std::string& param, const std::string& values_text,
              const std::string& seeds_text, std::size_t jobs) {
  if (param.empty()) throw ConfigError("sweep: --param is required");
  std::vector<std::string> values;
  {
    std::stringstream ss(values_text);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) values.push_back(part);
    }
  }
  if (values.empty()) throw ConfigError("sweep: --values grid is empty");
  const std::vector<std::uint64_t> seeds = parse_seed_list(seeds_text);
  const fs::path dir = resolve_out_dir(opts);

  const ordered_json base = resolve_config_json(opts);
  // Validate the parameter path and every grid value up front, serially, so a
  // bad sweep fails before any run starts.
  std::vector<RunConfig> cfgs;
  for (const auto& v : values) {
    ordered_json j = base;
    apply_override(j, param, v);
    cfgs.push_back(parse_run_config(j));
  }

  struct SweepRow {
    std::string value;
    std::uint64_t seed;
    ComparisonRow result;
  };
  std::vector<SweepRow> rows;
  for (std::size_t vi = 0; vi < values.size(); ++vi) {
    RunConfig cfg = cfgs[vi];
    const std::array<Method, 1> methods{cfg.method};
    const std::vector<ComparisonRow> batch = compare_runs(cfg, methods, seeds, jobs);
    for (const auto& r : batch) rows.push_back({values[vi], r.seed, r});
  }

  std::string csv = "param,value,seed,acc,acc_a,acc_v,f1,gap\n";
  for (const auto& r : rows) {
    csv += param + "," + r.value + "," + std::to_string(r.seed) + "," +
           format_double(r.result.acc) + "," + format_double(r.result.acc_a) + "," +
           format_double(r.result.acc_v) + "," + format_double(r.result.f1) + "," +
           format_double(r.result.gap) + "\n";
  }
  write_text(dir / "sweep.csv", csv);

  std::string summary = "param,value,n,acc_mean,acc_std,gap_mean,gap_std\n";
  for (const auto& v : values) {
    std::vector<double> acc, gap;
    for (const auto& r : rows) {
      if (r.value != v) continue;
      acc.push_back(r.result.acc);
      gap.push_back(r.result.gap);
    }
    double acc_mean = 0.0, gap_mean = 0.0;
    for (double x : acc) acc_mean += x;
    for (double x : gap) gap_mean += x;
    acc_mean /= static_cast<double>(acc.size());
    gap_mean /= static_cast<double>(gap.size());
    double acc_var = 0.0, gap_var = 0.0;
    if (acc.size() > 1) {
      for (double x : acc) acc_var += (x - acc_mean) * (x - acc_mean);
      for (double x : gap) gap_var += (x - gap_mean) * (x - gap_mean);
      acc_var /= static_cast<double>(acc.size() - 1);
      gap_var /= static_cast<double>(gap.size() - 1);
    }
    summary += param + "," + v + "," + std::to_string(acc.size()) + "," +
               format_double(acc_mean) + "," + format_double(std::sqrt(acc_var)) + "," +
               format_double(gap_mean) + "," + format_double(std::sqrt(gap_var)) + "\n";
  }
  write_text(dir / "sweep_summary.csv", summary);
  write_side_log(dir, "sweep",
                 param + " over " + std::to_string(values.size()) + " values x " +
                     std::to_string(seeds.size()) + " seeds");
  std::cout << summary;
  return 0;
}

int cmd_plot(const std::string& telemetry_path, const CommonOpts& opts) {
  const fs::path dir = resolve_out_dir(opts);
  const std::vector<TelemetryRecord> records = read_telemetry(telemetry_path);
  for (const auto& named : run_charts(records)) {
    write_text(dir / (named.stem + ".svg"), render_chart(named.chart));
  }
  write_side_log(dir, "plot", "from " + telemetry_path);
  std::cout << "wrote 5 charts to " << dir.string() << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"redreg: balanced two-modality training laboratory"};
  app.require_subcommand(1);

  CommonOpts gen_opts, train_opts, compare_opts, sweep_opts, plot_opts;
  std::string methods_text = "joint,redreg";
  std::string compare_seeds = "1,2,3,4,5";
  std::string sweep_seeds = "1,2,3";
  std::string sweep_param, sweep_values;
  std::string telemetry_path;
  std::size_t compare_jobs = 1, sweep_jobs = 1;

  CLI::App* gen = app.add_subcommand("gen-data", "Write a synthetic dataset as CSV");
  add_common(gen, gen_opts);

  CLI::App* train_cmd =
      app.add_subcommand("train", "Run one training job and record its artifacts");
  add_common(train_cmd, train_opts);

  CLI::App* compare =
      app.add_subcommand("compare", "Train per (method, seed) and tabulate the results");
  add_common(compare, compare_opts);
  compare->add_option("--methods", methods_text, "Comma list of joint|redreg");
  compare->add_option("--seeds", compare_seeds, "Comma list of seeds");
  compare->add_option("--jobs", compare_jobs, "Worker threads")->check(CLI::PositiveNumber);

  CLI::App* sweep = app.add_subcommand("sweep", "Grid over one config key, several seeds each");
  add_common(sweep, sweep_opts);
  sweep->add_option("--param", sweep_param, "Dot-path config key to vary");
  sweep->add_option("--values", sweep_values, "Comma list of grid values");
  sweep->add_option("--seeds", sweep_seeds, "Comma list of seeds");
  sweep->add_option("--jobs", sweep_jobs, "Worker threads")->check(CLI::PositiveNumber);

  CLI::App* plot = app.add_subcommand("plot", "Render the standard charts from telemetry");
  plot->add_option("--telemetry", telemetry_path, "Telemetry JSONL file")->required();
  add_common(plot, plot_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gen_opts);
    if (train_cmd->parsed()) return cmd_train(train_opts);
    if (compare->parsed())
      return cmd_compare(compare_opts, methods_text, compare_seeds, compare_jobs);
    if (sweep->parsed())
      return cmd_sweep(sweep_opts, sweep_param, sweep_values, sweep_seeds, sweep_jobs);
    if (plot->parsed()) return cmd_plot(telemetry_path, plot_opts);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const LoadError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

int cli_main(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("redreg");
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace redreg
