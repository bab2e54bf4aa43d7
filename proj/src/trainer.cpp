#include "redreg/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "redreg/config.hpp"
#include "redreg/errors.hpp"
#include "redreg/jsonio.hpp"
#include "redreg/rng.hpp"

namespace redreg {

namespace {

// Independent substream ids hung off the run seed.
enum Stream : std::uint64_t {
  kSplitStream = 1,
  kInitStream = 2,
  kShuffleStream = 3,
  kMonitorStream = 4,
  kProbeStream = 5,
  kProjectionStream = 6,
};

constexpr double kLossAbortThreshold = 1e6;
constexpr std::array<const char*, 2> kModalityNames{"a", "v"};

std::size_t argmax_row(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j) {
    if (row[j] > row[best]) best = j;  // ties keep the lowest index
  }
  return best;
}

double f1_of_class(const Matrix& confusion, std::size_t k) {
  double tp = confusion(k, k), fp = 0.0, fn = 0.0;
  for (std::size_t i = 0; i < confusion.rows(); ++i) {
    if (i != k) {
      fp += confusion(i, k);
      fn += confusion(k, i);
    }
  }
  const double denom = 2.0 * tp + fp + fn;
  return denom == 0.0 ? 0.0 : 2.0 * tp / denom;
}

struct Emitter {
  std::vector<TelemetryRecord>* records;
  TelemetrySink* sink;

  void operator()(const TelemetryRecord& r) const {
    records->push_back(r);
    if (sink) sink->write(r);
  }
};

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

std::string method_name(Method m) { return m == Method::joint ? "joint" : "redreg"; }

EvalReport evaluate(const ModelState& model, const Dataset& ds) {
  if (ds.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
  const auto k = static_cast<std::size_t>(ds.classes);
  EvalReport report;
  report.confusion = Matrix(k, k);

  const Matrix za = encode(model.encoders[0], ds.features_a);
  const Matrix zv = encode(model.encoders[1], ds.features_v);
  Matrix logits = matmul(fuse(za, zv, model.fusion), transpose(model.head.weight));
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto row = logits.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += model.head.bias[j];
  }

  double correct = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto truth = static_cast<std::size_t>(ds.labels[i]);
    const std::size_t pred = argmax_row(logits.row(i));
    report.confusion(truth, pred) += 1.0;
    if (pred == truth) correct += 1.0;
  }
  report.accuracy = correct / static_cast<double>(ds.size());

  const std::array<const Matrix*, 2> zs{&za, &zv};
  for (int m = 0; m < kModalities; ++m) {
    const Matrix fm = branch_logits(model, *zs[static_cast<std::size_t>(m)], m);
    double branch_correct = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (argmax_row(fm.row(i)) == static_cast<std::size_t>(ds.labels[i])) branch_correct += 1.0;
    }
    report.branch_accuracy[static_cast<std::size_t>(m)] =
        branch_correct / static_cast<double>(ds.size());
  }

  if (ds.classes == 2) {
    report.macro_f1 = f1_of_class(report.confusion, 1);
  } else {
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) total += f1_of_class(report.confusion, c);
    report.macro_f1 = total / static_cast<double>(k);
  }
  return report;
}

Dataset load_dataset(const RunConfig& cfg) {
  if (cfg.data.source == "csv") {
    return load_csv(cfg.data.features_a, cfg.data.features_v, cfg.data.labels);
  }
  return generate_synthetic(cfg.data.synth);
}

RunOutput train(const RunConfig& cfg, const Dataset& data, TelemetrySink* sink) {
  if (data.size() < 2) throw std::invalid_argument("train: dataset too small to split");
  if (data.classes < 2) throw std::invalid_argument("train: need >= 2 classes");

  auto [train_set, test_set] = split(data, cfg.train_fraction, fork_stream(cfg.seed, kSplitStream).seed);
  if (train_set.size() == 0 || test_set.size() == 0) {
    throw std::invalid_argument("train: split produced an empty side");
  }

  ModelArch arch;
  arch.input_a = data.features_a.cols();
  arch.input_v = data.features_v.cols();
  arch.hidden = cfg.model.hidden;
  arch.repr_a = cfg.model.repr;
  arch.repr_v = cfg.model.repr;
  arch.classes = data.classes;
  arch.fusion = cfg.model.fusion;
  arch.output_activation = cfg.model.output_activation;
  ModelState model = build_model(arch, fork_stream(cfg.seed, kInitStream).seed);

  // Fixed probe rows, chosen once per run.
  const std::size_t probe_n = std::min(cfg.monitor.probe_size, train_set.size());
  std::vector<std::size_t> probe_idx =
      make_batches(train_set.size(), train_set.size(), fork_stream(cfg.seed, kProbeStream).seed, 0)
          .order;
  probe_idx.resize(probe_n);
  std::sort(probe_idx.begin(), probe_idx.end());
  const Dataset probe = take(train_set, probe_idx);

  RngState monitor_rng = fork_stream(cfg.seed, kMonitorStream);
  const std::uint64_t shuffle_seed = fork_stream(cfg.seed, kShuffleStream).seed;

  GateConfig gate_cfg = cfg.gate;
  gate_cfg.total_epochs = cfg.epochs;  // the ramp always spans the actual run

  // Representations of unequal width are compared through one fixed seeded
  // projection of the wider side.
  Matrix sim_proj;
  int sim_wide = -1;
  if (arch.repr_a != arch.repr_v) {
    sim_wide = arch.repr_a > arch.repr_v ? 0 : 1;
    sim_proj = coinfo_projection(std::max(arch.repr_a, arch.repr_v),
                                 std::min(arch.repr_a, arch.repr_v),
                                 fork_stream(cfg.seed, kProjectionStream).seed);
  }
  auto batch_sim = [&](const Matrix& za, const Matrix& zv) {
    if (sim_wide < 0) return coinfo_similarity(za, zv, cfg.monitor.epsilon);
    if (sim_wide == 0) return coinfo_similarity(matmul(za, sim_proj), zv, cfg.monitor.epsilon);
    return coinfo_similarity(za, matmul(zv, sim_proj), cfg.monitor.epsilon);
  };

  RunOutput out;
  Emitter emit{&out.records, sink};
  {
    TelemetryRecord header;
    header.kind = TelemetryRecord::Kind::run;
    header.config_json = run_config_canonical(cfg);
    emit(header);
  }

  MonitorState mon;
  std::optional<double> decision_sim;  // epoch mean of batch sims, one epoch behind
  const std::array<const Matrix*, 2> probe_x{&probe.features_a, &probe.features_v};

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Monitor refresh: probe deltas first, then the noise-pair score, in a
    // fixed modality order so the monitor stream stays aligned across methods.
    for (int m = 0; m < kModalities; ++m) {
      const auto mi = static_cast<std::size_t>(m);
      auto& mm = mon.modality[mi];
      Matrix z = encode(model.encoders[mi], *probe_x[mi]);
      Matrix f = branch_logits(model, z, m);
      if (mm.probe_z) {
        mm.rlc = rlc_coupling(f, *mm.probe_f, z, *mm.probe_z, cfg.monitor.epsilon);
      }
      mm.probe_z = std::move(z);
      mm.probe_f = std::move(f);
      mm.red = redundancy_score(model.encoders[mi], *probe_x[mi], cfg.monitor.sigma,
                                cfg.monitor.epsilon, monitor_rng);
      mm.growth = (mm.pbar && mm.pbar_prev)
                      ? std::optional<double>(gain_growth_rate(*mm.pbar, *mm.pbar_prev,
                                                               cfg.monitor.epsilon))
                      : std::nullopt;
      mm.score = mm.growth ? std::optional<double>(redundancy_monitor(*mm.red, *mm.growth,
                                                                      cfg.monitor.gamma))
                           : std::nullopt;
    }
    mon.dominant = (mon.modality[0].pbar && mon.modality[1].pbar)
                       ? std::optional<int>(dominant_modality(mon))
                       : std::nullopt;

    const double tau = threshold_schedule(epoch, gate_cfg);
    std::array<int, 2> gate{0, 0};
    if (cfg.method == Method::redreg && epoch >= 2) {
      for (int m = 0; m < kModalities; ++m) {
        const auto& mm = mon.modality[static_cast<std::size_t>(m)];
        if (mon.dominant && mm.score && decision_sim) {
          gate[static_cast<std::size_t>(m)] =
              gate_coefficient(m, *mon.dominant, *mm.score, *decision_sim, tau,
                               gate_cfg.redundancy_threshold)
                  ? 1
                  : 0;
        }
      }
    }

    const BatchPlan plan = make_batches(train_set.size(), cfg.batch_size, shuffle_seed, epoch);
    double epoch_loss = 0.0, epoch_sim = 0.0;
    std::array<double, 2> epoch_p{0.0, 0.0};

    for (std::size_t b = 0; b < plan.num_batches(); ++b) {
      const Dataset batch = take(train_set, plan.batch(b));

      const ForwardResult fr = forward(model, batch.features_a, batch.features_v, batch.labels);
      const std::array<const Matrix*, 2> zs{&fr.za, &fr.zv};
      std::array<double, 2> p{};
      for (int m = 0; m < kModalities; ++m) {
        p[static_cast<std::size_t>(m)] = batch_correct_prob(
            softmax_rows(branch_logits(model, *zs[static_cast<std::size_t>(m)], m)),
            batch.labels);
      }
      const double sim = batch_sim(fr.za, fr.zv);

      GradientBundle grads =
          backward(model, batch.features_a, batch.features_v, batch.labels, cfg.lambda_uni);

      if (!std::isfinite(grads.loss) || grads.loss > kLossAbortThreshold) {
        TelemetryRecord diag;
        diag.kind = TelemetryRecord::Kind::abort;
        diag.epoch = static_cast<long long>(epoch);
        diag.batch = static_cast<long long>(b);
        if (std::isfinite(grads.loss)) diag.loss = grads.loss;
        std::ostringstream msg;
        msg << "loss " << grads.loss << " left [0, " << kLossAbortThreshold << "] at epoch "
            << epoch << ", batch " << b;
        diag.message = msg.str();
        emit(diag);
        throw DivergenceError(diag.message, static_cast<long long>(epoch),
                              static_cast<long long>(b), grads.loss);
      }

      TelemetryRecord rec;
      rec.kind = TelemetryRecord::Kind::batch;
      rec.epoch = static_cast<long long>(epoch);
      rec.batch = static_cast<long long>(b);
      rec.loss = grads.loss;
      rec.p = {p[0], p[1]};
      rec.sim = sim;
      rec.g_norm = {grads.encoder_norm[0], grads.encoder_norm[1]};
      rec.gate = gate;

      for (int m = 0; m < kModalities; ++m) {
        const auto mi = static_cast<std::size_t>(m);
        std::vector<double> params = model.encoders[mi].flatten();
        std::vector<double> update;
        if (gate[mi]) {
          const std::vector<double> drift = anchor_direction(params, model.anchors[mi]);
          const std::vector<double> drift_perp =
              project_orthogonal(drift, grads.encoder[mi], cfg.regulate.epsilon);
          update = controlled_update(grads.encoder[mi], true, drift_perp, cfg.regulate.beta);
          rec.d_perp_norm[mi] = l2_norm(drift_perp);
          const double g2 = dot(grads.encoder[mi], grads.encoder[mi]);
          rec.descent_ratio[mi] = g2 > 0.0 ? dot(update, grads.encoder[mi]) / g2 : 1.0;
        } else {
          update = std::move(grads.encoder[mi]);
        }
        sgd_momentum_step(params, model.encoder_velocity[mi], update,
                          cfg.optimizer.learning_rate, cfg.optimizer.momentum);
        model.encoders[mi].unflatten(params);
      }
      sgd_momentum_step(model.head.weight.values(), model.head_weight_velocity.values(),
                        grads.head_weight.values(), cfg.optimizer.learning_rate,
                        cfg.optimizer.momentum);
      sgd_momentum_step(model.head.bias, model.head_bias_velocity, grads.head_bias,
                        cfg.optimizer.learning_rate, cfg.optimizer.momentum);

      emit(rec);
      epoch_loss += grads.loss;
      epoch_sim += sim;
      for (int m = 0; m < kModalities; ++m)
        epoch_p[static_cast<std::size_t>(m)] += p[static_cast<std::size_t>(m)];
    }

    const auto nb = static_cast<double>(plan.num_batches());
    for (int m = 0; m < kModalities; ++m) {
      const auto mi = static_cast<std::size_t>(m);
      mon.modality[mi].push(epoch_p[mi] / nb, cfg.monitor.window);
      update_anchor(model.anchors[mi], model.encoders[mi].flatten(), cfg.regulate.anchor_decay);
    }

    const EvalReport eval = evaluate(model, test_set);
    out.final_eval = eval;

    TelemetryRecord rec;
    rec.kind = TelemetryRecord::Kind::epoch;
    rec.epoch = static_cast<long long>(epoch);
    rec.batch = static_cast<long long>(plan.num_batches());
    rec.loss = epoch_loss / nb;
    for (int m = 0; m < kModalities; ++m) {
      const auto mi = static_cast<std::size_t>(m);
      const auto& mm = mon.modality[mi];
      rec.pbar[mi] = mm.pbar;  // includes this epoch's push
      rec.growth[mi] = mm.growth;
      rec.red[mi] = mm.red;
      rec.score[mi] = mm.score;
      rec.rlc[mi] = mm.rlc;
    }
    rec.sim = decision_sim;
    rec.tau = tau;
    rec.gate = gate;
    if (mon.dominant) rec.dominant = kModalityNames[static_cast<std::size_t>(*mon.dominant)];
    rec.acc = eval.accuracy;
    rec.acc_a = eval.branch_accuracy[0];
    rec.acc_v = eval.branch_accuracy[1];
    rec.f1 = eval.macro_f1;
    emit(rec);

    decision_sim = epoch_sim / nb;
  }

  out.model = std::move(model);
  return out;
}

std::vector<ComparisonRow> compare_runs(const RunConfig& base, std::span<const Method> methods,
                                        std::span<const std::uint64_t> seeds, std::size_t jobs) {
  struct Task {
    Method method;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (Method m : methods)
    for (std::uint64_t s : seeds) tasks.push_back({m, s});

  std::vector<ComparisonRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        RunConfig cfg = base;
        cfg.method = tasks[i].method;
        cfg.seed = tasks[i].seed;
        cfg.data.synth.seed = tasks[i].seed;
        const Dataset data = load_dataset(cfg);
        const RunOutput out = train(cfg, data);
        ComparisonRow& row = rows[i];
        row.method = method_name(cfg.method);
        row.seed = cfg.seed;
        row.acc = out.final_eval.accuracy;
        row.acc_a = out.final_eval.branch_accuracy[0];
        row.acc_v = out.final_eval.branch_accuracy[1];
        row.f1 = out.final_eval.macro_f1;
        row.gap = row.acc_a - row.acc_v;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(tasks.size());
        return;
      }
    }
  };

  const std::size_t n_threads = std::min(std::max<std::size_t>(jobs, 1), tasks.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return rows;
}

std::string comparison_csv(std::span<const ComparisonRow> rows) {
  std::string out = "method,seed,acc,acc_a,acc_v,f1,gap\n";
  for (const auto& r : rows) {
    out += r.method + "," + std::to_string(r.seed) + "," + format_double(r.acc) + "," +
           format_double(r.acc_a) + "," + format_double(r.acc_v) + "," + format_double(r.f1) +
           "," + format_double(r.gap) + "\n";
  }
  return out;
}

std::string comparison_summary_csv(std::span<const ComparisonRow> rows) {
  std::vector<std::string> order;
  for (const auto& r : rows) {
    if (std::find(order.begin(), order.end(), r.method) == order.end()) order.push_back(r.method);
  }
  std::string out =
      "method,n,acc_mean,acc_std,acc_a_mean,acc_a_std,acc_v_mean,acc_v_std,"
      "f1_mean,f1_std,gap_mean,gap_std\n";
  for (const auto& method : order) {
    std::vector<double> acc, acc_a, acc_v, f1, gap;
    for (const auto& r : rows) {
      if (r.method != method) continue;
      acc.push_back(r.acc);
      acc_a.push_back(r.acc_a);
      acc_v.push_back(r.acc_v);
      f1.push_back(r.f1);
      gap.push_back(r.gap);
    }
    out += method + "," + std::to_string(acc.size());
    for (const auto* col : {&acc, &acc_a, &acc_v, &f1, &gap}) {
      out += "," + format_double(mean_of(*col)) + "," + format_double(sample_std(*col));
    }
    out += "\n";
  }
  return out;
}

}  // namespace redreg
