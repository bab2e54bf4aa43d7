// Acceptance harness: one pass/fail line per shipping criterion, each checked
// at its pinned tolerance. Exits nonzero if anything fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "redreg/dataset.hpp"
#include "redreg/gating.hpp"
#include "redreg/matrix.hpp"
#include "redreg/model.hpp"
#include "redreg/monitor.hpp"
#include "redreg/regulate.hpp"
#include "redreg/rng.hpp"
#include "redreg/telemetry.hpp"
#include "redreg/trainer.hpp"

namespace fs = std::filesystem;
using namespace redreg;

namespace {

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

fs::path scratch_dir() {
  static const fs::path root = [] {
    fs::path p = fs::temp_directory_path() / "redreg_acceptance";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. analytic gradients vs central finite differences

bool criterion_gradients(std::string& detail) {
  struct Arch {
    std::size_t ina, inv, hidden, ra, rv;
    int k;
    Fusion fusion;
    Activation act;
  };
  const std::vector<Arch> archs = {
      {3, 4, 5, 3, 3, 3, Fusion::concat, Activation::identity},
      {4, 3, 4, 2, 2, 2, Fusion::concat, Activation::relu},
      {2, 2, 3, 2, 2, 4, Fusion::sum, Activation::identity},
      {5, 2, 6, 4, 4, 3, Fusion::sum, Activation::relu},
      {3, 3, 4, 3, 5, 5, Fusion::concat, Activation::relu},
      {2, 5, 3, 2, 4, 2, Fusion::concat, Activation::identity},
      {4, 4, 5, 3, 3, 4, Fusion::sum, Activation::relu},
      {6, 3, 4, 2, 3, 3, Fusion::concat, Activation::relu},
  };
  const std::array<double, 3> lambdas{0.0, 0.5, 1.0};
  const double start = now_s();

  // Central differences are only meaningful away from relu kinks, and a batch
  // row that silences an entire hidden layer parks the next layer exactly on
  // one (zero bias plus zero input). Give every parameter a nonzero nudge and
  // redraw any batch that still lands a pre-activation near zero.
  auto kink_margin = [](const ModelState& model, const Matrix& xa, const Matrix& xv) {
    double margin = std::numeric_limits<double>::infinity();
    const std::array<const Matrix*, 2> inputs{&xa, &xv};
    for (std::size_t m = 0; m < 2; ++m) {
      Matrix x = *inputs[m];
      const auto& layers = model.encoders[m].layers;
      for (std::size_t l = 0; l < layers.size(); ++l) {
        Matrix pre = matmul(x, transpose(layers[l].weight));
        for (std::size_t r = 0; r < pre.rows(); ++r) {
          auto row = pre.row(r);
          for (std::size_t c = 0; c < row.size(); ++c) {
            row[c] += layers[l].bias[c];
            margin = std::min(margin, std::abs(row[c]));
          }
        }
        const bool relu = l + 1 < layers.size() ||
                          model.encoders[m].output_activation == Activation::relu;
        if (relu)
          for (auto& v : pre.values()) v = std::max(v, 0.0);
        x = std::move(pre);
      }
    }
    return margin;
  };

  double worst = 0.0;
  std::string offender;
  int instances = 0;
  for (std::size_t li = 0; li < lambdas.size(); ++li) {
    for (std::size_t ai = 0; ai < archs.size(); ++ai) {
      const Arch& a = archs[ai];
      ModelArch arch;
      arch.input_a = a.ina;
      arch.input_v = a.inv;
      arch.hidden = a.hidden;
      arch.repr_a = a.ra;
      arch.repr_v = a.rv;
      arch.classes = a.k;
      arch.fusion = a.fusion;
      arch.output_activation = a.act;
      const std::uint64_t seed = 900 + li * archs.size() + ai;
      ModelState model = build_model(arch, seed);
      {
        RngState jitter = fork_stream(55, seed);
        for (auto& enc : model.encoders) {
          std::vector<double> flat = enc.flatten();
          for (auto& v : flat) v += 0.2 * jitter.next_gaussian();
          enc.unflatten(flat);
        }
        for (auto& v : model.head.weight.values()) v += 0.2 * jitter.next_gaussian();
        for (auto& v : model.head.bias) v += 0.2 * jitter.next_gaussian();
      }

      const std::size_t rows = 3 + (ai % 4);
      Matrix xa, xv;
      for (std::uint64_t draw = 0;; ++draw) {
        RngState rng = fork_stream(33, seed + 10000 * draw);
        xa = sample_gaussian(rng, rows, a.ina, 1.0);
        xv = sample_gaussian(rng, rows, a.inv, 1.0);
        if (kink_margin(model, xa, xv) > 5e-4) break;
        if (draw > 50) {
          detail = " (no kink-free batch found)";
          return false;
        }
      }
      std::vector<int> labels(rows);
      for (std::size_t r = 0; r < rows; ++r) labels[r] = static_cast<int>(r) % a.k;

      const GradientBundle an = backward(model, xa, xv, labels, lambdas[li]);
      const GradientBundle fd = fd_gradient(model, xa, xv, labels, 1e-5, lambdas[li]);

      auto scan = [&](std::span<const double> g1, std::span<const double> g2,
                      const char* section) {
        for (std::size_t i = 0; i < g1.size(); ++i) {
          const double tol = std::max(1e-4 * std::abs(g1[i]), 1e-6);
          const double err = std::abs(g1[i] - g2[i]) / tol;
          if (err > worst) {
            worst = err;
            offender = std::string(section) + "[" + std::to_string(i) + "] arch " +
                       std::to_string(ai) + " lambda " + fmt("%.1f", lambdas[li]);
          }
        }
      };
      scan(an.encoder[0], fd.encoder[0], "enc_a");
      scan(an.encoder[1], fd.encoder[1], "enc_v");
      scan(an.head_weight.values(), fd.head_weight.values(), "head_w");
      scan(an.head_bias, fd.head_bias, "head_b");
      ++instances;
    }
  }

  const double elapsed = now_s() - start;
  detail = " (" + std::to_string(instances) + " instances, worst err " +
           fmt("%.2e", worst) + "x tol" +
           (worst > 1.0 ? " at " + offender : std::string()) + ", " +
           fmt("%.1f", elapsed) + " s)";
  return worst <= 1.0 && elapsed < 30.0;
}

// ---------------------------------------------------------------------------
// 2. orthogonal projection invariants at three scales

bool criterion_projection(std::string& detail) {
  const std::array<std::size_t, 3> dims{10, 1000, 100000};
  const double eps = RegulationConfig{}.epsilon;
  const double beta = RegulationConfig{}.beta;
  const double start = now_s();

  RngState rng = fork_stream(77, 0);
  double worst_ortho = 0.0, worst_idem = 0.0, worst_descent = 0.0;
  bool norms_ok = true;

  for (int pair = 0; pair < 1000; ++pair) {
    const std::size_t dim = dims[static_cast<std::size_t>(pair) % dims.size()];
    std::vector<double> g(dim), d(dim);
    for (auto& x : g) x = rng.next_gaussian();
    for (auto& x : d) x = rng.next_gaussian();
    // pin ||g|| well above the projection guard so the guard-induced bias
    // stays under the 1e-10 budget
    const double target = 4.0 * std::sqrt(static_cast<double>(dim));
    const double gn = l2_norm(g);
    for (auto& x : g) x *= target / gn;

    const std::vector<double> dp = project_orthogonal(d, g, eps);
    const double g_norm = l2_norm(g);
    const double d_norm = l2_norm(d);

    worst_ortho = std::max(worst_ortho, std::abs(dot(g, dp)) / (g_norm * d_norm));
    if (l2_norm(dp) > d_norm * (1.0 + 1e-12)) norms_ok = false;

    const std::vector<double> dpp = project_orthogonal(dp, g, eps);
    std::vector<double> delta(dim);
    for (std::size_t i = 0; i < dim; ++i) delta[i] = dpp[i] - dp[i];
    worst_idem = std::max(worst_idem, l2_norm(delta) / d_norm);

    const std::vector<double> gt = controlled_update(g, true, dp, beta);
    worst_descent =
        std::max(worst_descent, std::abs(dot(gt, g) - g_norm * g_norm) / (g_norm * g_norm));
  }

  const double elapsed = now_s() - start;
  detail = " (worst ortho " + fmt("%.1e", worst_ortho) + ", idem " + fmt("%.1e", worst_idem) +
           ", descent " + fmt("%.1e", worst_descent) + ", " + fmt("%.1f", elapsed) + " s)";
  return worst_ortho <= 1e-10 && worst_idem <= 1e-10 && worst_descent <= 1e-10 && norms_ok &&
         elapsed < 10.0;
}

// ---------------------------------------------------------------------------
// 3. redundancy score closed forms for linear encoders

EncoderParams scaled_identity(double c, std::size_t dim) {
  Layer l;
  l.weight = Matrix(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) l.weight(i, i) = c;
  l.bias.assign(dim, 0.0);
  EncoderParams enc;
  enc.layers = {l};
  enc.output_activation = Activation::identity;
  return enc;
}

bool criterion_redundancy(std::string& detail) {
  const std::size_t dim = 8;
  RngState probe_rng = fork_stream(2024, 0);
  const Matrix probe = sample_gaussian(probe_rng, 64, dim, 1.0);
  RngState noise_rng = fork_stream(2024, 1);

  const double red_id = redundancy_score(scaled_identity(1.0, dim), probe, 0.05, 1e-8,
                                         noise_rng);
  bool ok = red_id >= 1.0 - 1e-8 && red_id <= 1.0 + 1e-8;

  double worst_rel = std::abs(red_id - 1.0);
  for (double c : {0.5, 2.0, 3.0}) {
    const double red = redundancy_score(scaled_identity(c, dim), probe, 0.05, 1e-8, noise_rng);
    const double rel = std::abs(red / (c * c) - 1.0);
    worst_rel = std::max(worst_rel, rel);
    ok = ok && rel <= 0.02;
  }
  detail = " (identity " + fmt("%.10f", red_id) + ", worst scaling error " +
           fmt("%.2e", worst_rel) + ")";
  return ok;
}

// ---------------------------------------------------------------------------
// 4. gate truth table and threshold ramp endpoints

bool criterion_gate(std::string& detail) {
  const GateConfig gc;  // stock settings: 0.2 -> 0.5 over 30 epochs, R = 0.15
  bool ok = threshold_schedule(0, gc) == 0.2 && threshold_schedule(30, gc) == 0.5;

  const double tau = 0.35;
  int wrong = 0;
  for (int dom_flag : {0, 1}) {
    for (int score_flag : {0, 1}) {
      for (int sim_flag : {0, 1}) {
        const int dominant = dom_flag ? 0 : 1;  // branch 0 is the one queried
        const double score = gc.redundancy_threshold + (score_flag ? 0.01 : -0.01);
        const double sim = tau + (sim_flag ? 0.05 : -0.05);
        const bool open = gate_coefficient(0, dominant, score, sim, tau,
                                           gc.redundancy_threshold);
        const bool expect = dom_flag == 1 && score_flag == 1 && sim_flag == 1;
        if (open != expect) ++wrong;
      }
    }
  }
  ok = ok && wrong == 0;
  detail = " (" + std::to_string(8 - wrong) + "/8 combinations, endpoints " +
           fmt("%.17g", threshold_schedule(0, gc)) + " and " +
           fmt("%.17g", threshold_schedule(30, gc)) + ")";
  return ok;
}

// ---------------------------------------------------------------------------
// 5. unreachable threshold reproduces the baseline byte for byte

bool criterion_baseline_equivalence(std::string& detail) {
  RunConfig joint;
  joint.method = Method::joint;
  joint.seed = 3;
  joint.data.synth.seed = 3;
  joint.epochs = 8;
  joint.data.synth.samples = 400;
  joint.gate.redundancy_threshold = std::numeric_limits<double>::infinity();

  RunConfig gated = joint;
  gated.method = Method::redreg;

  const Dataset data = load_dataset(joint);
  const fs::path dir = scratch_dir() / "equivalence";
  fs::create_directories(dir);
  const std::string f_joint = (dir / "joint.jsonl").string();
  const std::string f_gated = (dir / "gated.jsonl").string();
  {
    FileTelemetry sink(f_joint);
    train(joint, data, &sink);
  }
  {
    FileTelemetry sink(f_gated);
    train(gated, data, &sink);
  }

  const auto lines_j = read_lines(f_joint);
  const auto lines_g = read_lines(f_gated);
  if (lines_j.size() != lines_g.size() || lines_j.empty()) {
    detail = " (record counts differ)";
    return false;
  }

  std::string header = lines_g[0];
  const auto pos = header.find("\"method\":\"redreg\"");
  if (pos == std::string::npos) {
    detail = " (missing method label)";
    return false;
  }
  header.replace(pos, 17, "\"method\":\"joint\"");
  std::size_t mismatches = header == lines_j[0] ? 0 : 1;
  for (std::size_t i = 1; i < lines_j.size(); ++i)
    if (lines_j[i] != lines_g[i]) ++mismatches;

  detail = " (" + std::to_string(lines_j.size()) + " records, " +
           std::to_string(mismatches) + " mismatches beyond the method label)";
  return mismatches == 0;
}

// ---------------------------------------------------------------------------
// 6 and 7 share the five-seed balancing experiment

struct SeedResult {
  double joint_acc = 0, joint_acc_a = 0, joint_acc_v = 0;
  double red_acc = 0, red_acc_a = 0, red_acc_v = 0;
  double joint_tail_red = 0, red_tail_red = 0;  // dominant branch, last 10 epochs
};

struct Experiment {
  std::vector<SeedResult> seeds;
  double elapsed_s = 0;
};

RunConfig experiment_config(Method method, std::uint64_t seed) {
  RunConfig cfg;  // stock settings already match the experiment grid
  cfg.method = method;
  cfg.seed = seed;
  cfg.data.synth.seed = seed;
  return cfg;
}

double tail_red(const std::vector<TelemetryRecord>& records, std::size_t modality,
                std::size_t epochs) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& r : records) {
    if (r.kind != TelemetryRecord::Kind::epoch) continue;
    if (r.epoch < static_cast<long long>(epochs - 10)) continue;
    if (r.red[modality]) {
      sum += *r.red[modality];
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

const Experiment& experiment() {
  static const Experiment exp = [] {
    Experiment e;
    const double start = now_s();
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const RunConfig jc = experiment_config(Method::joint, seed);
      const RunConfig rc = experiment_config(Method::redreg, seed);
      const Dataset data = load_dataset(jc);
      const RunOutput joint = train(jc, data);
      const RunOutput red = train(rc, data);

      SeedResult r;
      r.joint_acc = joint.final_eval.accuracy;
      r.joint_acc_a = joint.final_eval.branch_accuracy[0];
      r.joint_acc_v = joint.final_eval.branch_accuracy[1];
      r.red_acc = red.final_eval.accuracy;
      r.red_acc_a = red.final_eval.branch_accuracy[0];
      r.red_acc_v = red.final_eval.branch_accuracy[1];

      // dominant branch as the baseline run itself labels it at the end
      std::size_t dom = 0;
      for (auto it = joint.records.rbegin(); it != joint.records.rend(); ++it) {
        if (it->kind == TelemetryRecord::Kind::epoch && it->dominant) {
          dom = (*it->dominant == "v") ? 1 : 0;
          break;
        }
      }
      r.joint_tail_red = tail_red(joint.records, dom, jc.epochs);
      r.red_tail_red = tail_red(red.records, dom, rc.epochs);
      e.seeds.push_back(r);
    }
    e.elapsed_s = now_s() - start;
    return e;
  }();
  return exp;
}

bool criterion_balancing(std::string& detail) {
  const Experiment& e = experiment();
  double joint_gap = 0, red_gap = 0, joint_acc = 0, red_acc = 0;
  int weak_wins = 0;
  for (const SeedResult& s : e.seeds) {
    joint_gap += s.joint_acc_a - s.joint_acc_v;
    red_gap += s.red_acc_a - s.red_acc_v;
    joint_acc += s.joint_acc;
    red_acc += s.red_acc;
    if (s.red_acc_v >= s.joint_acc_v) ++weak_wins;
  }
  const auto n = static_cast<double>(e.seeds.size());
  joint_gap /= n;
  red_gap /= n;
  joint_acc /= n;
  red_acc /= n;

  const bool a = joint_gap >= 0.05;
  const bool b = red_gap < joint_gap;
  const bool c = weak_wins >= 4;
  const bool d = red_acc >= joint_acc - 0.01;
  const bool fast = e.elapsed_s < 300.0;

  auto mark = [](bool ok) { return std::string(ok ? "ok" : "FAIL"); };
  detail = " (joint gap " + fmt("%.3f", joint_gap) + " " + mark(a) + ", regulated gap " +
           fmt("%.3f", red_gap) + " " + mark(b) + ", weak-branch wins " +
           std::to_string(weak_wins) + "/5 " + mark(c) + ", acc " + fmt("%.3f", red_acc) +
           " vs joint " + fmt("%.3f", joint_acc) + " " + mark(d) + ", " +
           fmt("%.0f", e.elapsed_s) + " s)";
  return a && b && c && d && fast;
}

bool criterion_monitor_dynamics(std::string& detail) {
  const Experiment& e = experiment();
  int lower = 0;
  std::string per_seed;
  for (const SeedResult& s : e.seeds) {
    if (s.red_tail_red <= s.joint_tail_red) ++lower;
    per_seed += per_seed.empty() ? "" : " ";
    per_seed += fmt("%.2f", s.joint_tail_red) + "->" + fmt("%.2f", s.red_tail_red);
  }
  detail = " (dominant-branch tail redundancy lower in " + std::to_string(lower) + "/5: " +
           per_seed + ")";
  return lower >= 4;
}

// ---------------------------------------------------------------------------
// 8. repeated training runs are byte-identical

bool criterion_determinism(std::string& detail) {
  RunConfig cfg;
  cfg.method = Method::redreg;
  cfg.seed = 2;
  cfg.data.synth.seed = 2;
  cfg.epochs = 8;
  cfg.data.synth.samples = 400;

  const Dataset data = load_dataset(cfg);
  std::array<fs::path, 2> dirs{scratch_dir() / "det1", scratch_dir() / "det2"};
  for (const auto& dir : dirs) {
    fs::create_directories(dir);
    FileTelemetry sink((dir / "telemetry.jsonl").string());
    const RunOutput out = train(cfg, data, &sink);
    save_checkpoint(out.model, (dir / "checkpoint.json").string());
  }
  const bool telemetry_equal = slurp((dirs[0] / "telemetry.jsonl").string()) ==
                               slurp((dirs[1] / "telemetry.jsonl").string());
  const bool checkpoint_equal = slurp((dirs[0] / "checkpoint.json").string()) ==
                                slurp((dirs[1] / "checkpoint.json").string());
  detail = std::string(" (telemetry ") + (telemetry_equal ? "identical" : "differs") +
           ", checkpoint " + (checkpoint_equal ? "identical" : "differs") + ")";
  return telemetry_equal && checkpoint_equal;
}

// ---------------------------------------------------------------------------
// 9. gamma sweep peaks in the interior

bool criterion_gamma_sweep(std::string& detail) {
  const std::array<double, 5> gammas{0.0, 0.25, 0.5, 1.0, 2.0};
  const std::array<std::uint64_t, 3> seeds{1, 2, 3};

  std::array<double, 5> mean_acc{};
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    double acc = 0;
    for (const std::uint64_t seed : seeds) {
      RunConfig cfg = experiment_config(Method::redreg, seed);
      cfg.monitor.gamma = gammas[gi];
      acc += train(cfg, load_dataset(cfg)).final_eval.accuracy;
    }
    mean_acc[gi] = acc / static_cast<double>(seeds.size());
  }

  const double best_interior = std::max({mean_acc[1], mean_acc[2], mean_acc[3]});
  const bool ok = mean_acc[0] <= best_interior && mean_acc[4] <= best_interior;
  detail = " (mean acc";
  for (std::size_t gi = 0; gi < gammas.size(); ++gi)
    detail += " " + fmt("%.3g", gammas[gi]) + ":" + fmt("%.3f", mean_acc[gi]);
  detail += ")";
  return ok;
}

// ---------------------------------------------------------------------------
// 10. csv, checkpoint and telemetry survive write -> read -> write

bool criterion_round_trips(std::string& detail) {
  const fs::path dir = scratch_dir() / "roundtrip";
  fs::create_directories(dir);

  SynthConfig sc;
  sc.samples = 40;
  sc.classes = 3;
  sc.dim_a = 4;
  sc.dim_v = 3;
  sc.seed = 9;
  const Dataset ds = generate_synthetic(sc);
  const auto p = [&](const char* name) { return (dir / name).string(); };
  save_csv(ds, p("a1.csv"), p("v1.csv"), p("y1.csv"));
  const Dataset back = load_csv(p("a1.csv"), p("v1.csv"), p("y1.csv"));
  save_csv(back, p("a2.csv"), p("v2.csv"), p("y2.csv"));
  const bool csv_ok = slurp(p("a1.csv")) == slurp(p("a2.csv")) &&
                      slurp(p("v1.csv")) == slurp(p("v2.csv")) &&
                      slurp(p("y1.csv")) == slurp(p("y2.csv"));

  // a trained model so velocity and anchors are nontrivial
  RunConfig cfg;
  cfg.seed = 4;
  cfg.data.synth.seed = 4;
  cfg.epochs = 4;
  cfg.data.synth.samples = 60;
  cfg.data.synth.classes = 3;
  cfg.data.synth.dim_a = 4;
  cfg.data.synth.dim_v = 4;
  cfg.batch_size = 16;
  cfg.model.hidden = 6;
  cfg.model.repr = 4;
  cfg.monitor.probe_size = 16;
  RunOutput out;
  {
    FileTelemetry sink(p("run.jsonl"));
    out = train(cfg, load_dataset(cfg), &sink);
  }
  save_checkpoint(out.model, p("ck1.json"));
  const ModelState restored = load_checkpoint(p("ck1.json"));
  save_checkpoint(restored, p("ck2.json"));
  const bool ck_ok = slurp(p("ck1.json")) == slurp(p("ck2.json"));

  const std::vector<TelemetryRecord> records = read_telemetry(p("run.jsonl"));
  {
    std::ofstream rewrite(p("run2.jsonl"), std::ios::binary);
    for (const auto& r : records) rewrite << r.to_line() << "\n";
  }
  const bool tel_ok = slurp(p("run.jsonl")) == slurp(p("run2.jsonl"));

  detail = std::string(" (csv ") + (csv_ok ? "ok" : "differs") + ", checkpoint " +
           (ck_ok ? "ok" : "differs") + ", telemetry " + (tel_ok ? "ok" : "differs") + ")";
  return csv_ok && ck_ok && tel_ok;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* title;
    std::function<bool(std::string&)> fn;
  };
  const std::vector<Entry> entries = {
      {1, "analytic gradients match central finite differences", criterion_gradients},
      {2, "orthogonal projection invariants hold at every scale", criterion_projection},
      {3, "redundancy score matches closed forms for linear encoders", criterion_redundancy},
      {4, "gate truth table and threshold ramp endpoints", criterion_gate},
      {5, "unreachable threshold reproduces the baseline byte for byte",
       criterion_baseline_equivalence},
      {6, "regulation closes the branch gap without losing accuracy", criterion_balancing},
      {7, "regulation lowers dominant-branch tail redundancy", criterion_monitor_dynamics},
      {8, "repeated training runs are byte-identical", criterion_determinism},
      {9, "gamma sweep peaks at an interior value", criterion_gamma_sweep},
      {10, "csv, checkpoint and telemetry survive write-read-write", criterion_round_trips},
  };

  int failures = 0;
  for (const Entry& e : entries) {
    std::string detail;
    bool ok = false;
    try {
      ok = e.fn(detail);
    } catch (const std::exception& ex) {
      detail = std::string(" (exception: ") + ex.what() + ")";
    }
    if (!ok) ++failures;
    std::printf("%s  %2d  %s%s\n", ok ? "PASS" : "FAIL", e.id, e.title, detail.c_str());
    std::fflush(stdout);
  }

  if (failures) std::printf("%d criterion(s) failed\n", failures);
  else std::printf("all %zu criteria passed\n", entries.size());
  return failures ? 1 : 0;
}
