#include "redreg/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "redreg/errors.hpp"
#include "redreg/jsonio.hpp"
#include "redreg/rng.hpp"

namespace redreg {

namespace {

void add_bias_rows(Matrix& m, const std::vector<double>& bias, double scale = 1.0) {
  if (m.cols() != bias.size()) {
    throw std::invalid_argument("bias length " + std::to_string(bias.size()) +
                                " does not match " + std::to_string(m.cols()) + " columns");
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += scale * bias[c];
  }
}

Matrix linear(const Matrix& x, const Layer& layer) {
  Matrix out = matmul(x, transpose(layer.weight));
  add_bias_rows(out, layer.bias);
  return out;
}

void apply_activation(Matrix& m, Activation act) {
  if (act == Activation::relu) {
    for (double& v : m.values()) v = v > 0.0 ? v : 0.0;
  }
}

Activation layer_activation(const EncoderParams& enc, std::size_t layer_index) {
  return layer_index + 1 == enc.layers.size() ? enc.output_activation : Activation::relu;
}

struct EncodeCache {
  std::vector<Matrix> pre;   // pre-activation per layer
  std::vector<Matrix> post;  // post-activation; post[0] is the input
};

Matrix encode_cached(const EncoderParams& enc, const Matrix& x, EncodeCache& cache) {
  if (enc.layers.empty()) throw std::invalid_argument("encode: encoder has no layers");
  if (x.cols() != enc.in_dim()) {
    throw std::invalid_argument("encode: input has " + std::to_string(x.cols()) +
                                " columns, encoder expects " + std::to_string(enc.in_dim()));
  }
  cache.pre.clear();
  cache.post.clear();
  cache.post.push_back(x);
  for (std::size_t l = 0; l < enc.layers.size(); ++l) {
    Matrix pre = linear(cache.post.back(), enc.layers[l]);
    Matrix post = pre;
    apply_activation(post, layer_activation(enc, l));
    cache.pre.push_back(std::move(pre));
    cache.post.push_back(std::move(post));
  }
  return cache.post.back();
}

std::vector<double> colsums(const Matrix& m) {
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c];
  }
  return out;
}

// Backprop dZ (B x out) through one encoder; gradients appended in the
// flattening order (forward layer order) so the caller reverses per layer.
std::vector<double> encoder_backward(const EncoderParams& enc, const EncodeCache& cache,
                                     Matrix dz) {
  const std::size_t n_layers = enc.layers.size();
  std::vector<Matrix> grad_w(n_layers);
  std::vector<std::vector<double>> grad_b(n_layers);
  Matrix da = std::move(dz);
  for (std::size_t l = n_layers; l-- > 0;) {
    Matrix dpre = std::move(da);
    if (layer_activation(enc, l) == Activation::relu) {
      const Matrix& pre = cache.pre[l];
      for (std::size_t i = 0; i < dpre.size(); ++i)
        if (pre.values()[i] <= 0.0) dpre.values()[i] = 0.0;
    }
    grad_w[l] = matmul(transpose(dpre), cache.post[l]);
    grad_b[l] = colsums(dpre);
    da = matmul(dpre, enc.layers[l].weight);
  }
  std::vector<double> flat;
  flat.reserve(enc.param_count());
  for (std::size_t l = 0; l < n_layers; ++l) {
    flat.insert(flat.end(), grad_w[l].values().begin(), grad_w[l].values().end());
    flat.insert(flat.end(), grad_b[l].begin(), grad_b[l].end());
  }
  return flat;
}

void check_labels(const Matrix& logits, const std::vector<int>& labels) {
  if (logits.rows() != labels.size()) {
    throw std::invalid_argument("labels: " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(logits.rows()) + " rows");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= logits.cols()) {
      throw std::invalid_argument("labels: class " + std::to_string(y) +
                                  " out of range [0, " + std::to_string(logits.cols()) + ")");
    }
  }
}

// K x dm slice of the head weight feeding modality m (whole weight under sum).
Matrix head_block(const ModelState& model, int m) {
  const Matrix& w = model.head.weight;
  if (model.fusion == Fusion::sum) return w;
  const std::size_t offset = m == 0 ? 0 : model.head.block_dims[0];
  const std::size_t dm = model.head.block_dims[static_cast<std::size_t>(m)];
  Matrix out(w.rows(), dm);
  for (std::size_t r = 0; r < w.rows(); ++r)
    for (std::size_t c = 0; c < dm; ++c) out(r, c) = w(r, offset + c);
  return out;
}

// Mean-reduced softmax residual, optionally scaled: (P - Y) * scale / B.
Matrix residual(const Matrix& logits, const std::vector<int>& labels, double scale) {
  Matrix e = softmax_rows(logits);
  const double inv = scale / static_cast<double>(logits.rows());
  for (std::size_t i = 0; i < e.rows(); ++i) {
    e(i, static_cast<std::size_t>(labels[i])) -= 1.0;
    auto row = e.row(i);
    for (double& v : row) v *= inv;
  }
  return e;
}

void check_modality(int m) {
  if (m < 0 || m >= kModalities) {
    throw std::invalid_argument("modality index " + std::to_string(m) +
                                " out of range [0, 2)");
  }
}

}  // namespace

std::size_t EncoderParams::in_dim() const {
  if (layers.empty()) throw std::invalid_argument("encoder has no layers");
  return layers.front().weight.cols();
}

std::size_t EncoderParams::out_dim() const {
  if (layers.empty()) throw std::invalid_argument("encoder has no layers");
  return layers.back().weight.rows();
}

std::size_t EncoderParams::param_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

std::vector<double> EncoderParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(param_count());
  for (const auto& l : layers) {
    flat.insert(flat.end(), l.weight.values().begin(), l.weight.values().end());
    flat.insert(flat.end(), l.bias.begin(), l.bias.end());
  }
  return flat;
}

void EncoderParams::unflatten(std::span<const double> flat) {
  if (flat.size() != param_count()) {
    throw std::invalid_argument("unflatten: got " + std::to_string(flat.size()) +
                                " values, encoder has " + std::to_string(param_count()));
  }
  std::size_t pos = 0;
  for (auto& l : layers) {
    std::copy_n(flat.data() + pos, l.weight.size(), l.weight.values().data());
    pos += l.weight.size();
    std::copy_n(flat.data() + pos, l.bias.size(), l.bias.data());
    pos += l.bias.size();
  }
}

ModelState build_model(const ModelArch& arch, std::uint64_t seed) {
  if (arch.input_a == 0 || arch.input_v == 0 || arch.hidden == 0 || arch.repr_a == 0 ||
      arch.repr_v == 0) {
    throw std::invalid_argument("build_model: all dimensions must be > 0");
  }
  if (arch.classes < 2) throw std::invalid_argument("build_model: need >= 2 classes");
  if (arch.fusion == Fusion::sum && arch.repr_a != arch.repr_v) {
    throw std::invalid_argument("build_model: sum fusion needs equal representation dims");
  }

  RngState rng = fork_stream(seed, 0);
  auto glorot = [&rng](std::size_t out, std::size_t in) {
    Matrix w(out, in);
    const double a = std::sqrt(6.0 / static_cast<double>(in + out));
    for (double& v : w.values()) v = a * (2.0 * rng.next_uniform() - 1.0);
    return w;
  };
  auto make_encoder = [&](std::size_t in, std::size_t out) {
    EncoderParams enc;
    enc.output_activation = arch.output_activation;
    enc.layers.push_back({glorot(arch.hidden, in), std::vector<double>(arch.hidden, 0.0)});
    enc.layers.push_back({glorot(out, arch.hidden), std::vector<double>(out, 0.0)});
    return enc;
  };

  ModelState model;
  model.fusion = arch.fusion;
  model.encoders[0] = make_encoder(arch.input_a, arch.repr_a);
  model.encoders[1] = make_encoder(arch.input_v, arch.repr_v);

  const std::size_t fused =
      arch.fusion == Fusion::concat ? arch.repr_a + arch.repr_v : arch.repr_a;
  model.head.weight = glorot(static_cast<std::size_t>(arch.classes), fused);
  model.head.bias.assign(static_cast<std::size_t>(arch.classes), 0.0);
  model.head.block_dims = {arch.repr_a, arch.repr_v};

  for (int m = 0; m < kModalities; ++m) {
    const auto n = model.encoders[static_cast<std::size_t>(m)].param_count();
    model.encoder_velocity[static_cast<std::size_t>(m)].assign(n, 0.0);
    model.anchors[static_cast<std::size_t>(m)] =
        model.encoders[static_cast<std::size_t>(m)].flatten();
  }
  model.head_weight_velocity = Matrix(model.head.weight.rows(), model.head.weight.cols());
  model.head_bias_velocity.assign(model.head.bias.size(), 0.0);
  return model;
}

Matrix encode(const EncoderParams& enc, const Matrix& x) {
  EncodeCache cache;
  return encode_cached(enc, x, cache);
}

Matrix fuse(const Matrix& za, const Matrix& zv, Fusion kind) {
  if (za.rows() != zv.rows()) {
    throw std::invalid_argument("fuse: row mismatch (" + std::to_string(za.rows()) +
                                " vs " + std::to_string(zv.rows()) + ")");
  }
  if (kind == Fusion::sum) return za + zv;
  Matrix out(za.rows(), za.cols() + zv.cols());
  for (std::size_t r = 0; r < za.rows(); ++r) {
    std::copy_n(za.row(r).data(), za.cols(), out.row(r).data());
    std::copy_n(zv.row(r).data(), zv.cols(), out.row(r).data() + za.cols());
  }
  return out;
}

double cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
  check_labels(logits, labels);
  double total = 0.0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto row = logits.row(i);
    double mx = row[0];
    for (double v : row) mx = std::max(mx, v);
    double sum = 0.0;
    for (double v : row) sum += std::exp(v - mx);
    total += mx + std::log(sum) - row[static_cast<std::size_t>(labels[i])];
  }
  return total / static_cast<double>(logits.rows());
}

ForwardResult forward(const ModelState& model, const Matrix& xa, const Matrix& xv,
                      const std::vector<int>& labels) {
  ForwardResult r;
  r.za = encode(model.encoders[0], xa);
  r.zv = encode(model.encoders[1], xv);
  r.fused = fuse(r.za, r.zv, model.fusion);
  r.logits = matmul(r.fused, transpose(model.head.weight));
  add_bias_rows(r.logits, model.head.bias);
  r.probs = softmax_rows(r.logits);
  r.loss = cross_entropy(r.logits, labels);
  return r;
}

Matrix branch_logits(const ModelState& model, const Matrix& zm, int modality) {
  check_modality(modality);
  const std::size_t dm = model.head.block_dims[static_cast<std::size_t>(modality)];
  if (zm.cols() != dm) {
    throw std::invalid_argument("branch_logits: representation has " +
                                std::to_string(zm.cols()) + " columns, head block expects " +
                                std::to_string(dm));
  }
  Matrix f = matmul(zm, transpose(head_block(model, modality)));
  add_bias_rows(f, model.head.bias, 1.0 / kModalities);
  return f;
}

double total_loss(const ModelState& model, const Matrix& xa, const Matrix& xv,
                  const std::vector<int>& labels, double lambda_uni) {
  ForwardResult r = forward(model, xa, xv, labels);
  double loss = r.loss;
  if (lambda_uni != 0.0) {
    loss += lambda_uni * cross_entropy(branch_logits(model, r.za, 0), labels);
    loss += lambda_uni * cross_entropy(branch_logits(model, r.zv, 1), labels);
  }
  return loss;
}

GradientBundle backward(const ModelState& model, const Matrix& xa, const Matrix& xv,
                        const std::vector<int>& labels, double lambda_uni) {
  EncodeCache cache_a, cache_v;
  Matrix za = encode_cached(model.encoders[0], xa, cache_a);
  Matrix zv = encode_cached(model.encoders[1], xv, cache_v);
  Matrix fused = fuse(za, zv, model.fusion);
  Matrix logits = matmul(fused, transpose(model.head.weight));
  add_bias_rows(logits, model.head.bias);
  check_labels(logits, labels);

  GradientBundle g;
  g.loss = cross_entropy(logits, labels);

  const Matrix e = residual(logits, labels, 1.0);
  g.head_weight = matmul(transpose(e), fused);
  g.head_bias = colsums(e);

  Matrix dz = matmul(e, model.head.weight);  // B x fused_dim
  const std::size_t da = model.head.block_dims[0];
  std::array<Matrix, 2> dzm;
  if (model.fusion == Fusion::concat) {
    dzm[0] = Matrix(dz.rows(), da);
    dzm[1] = Matrix(dz.rows(), dz.cols() - da);
    for (std::size_t r = 0; r < dz.rows(); ++r) {
      std::copy_n(dz.row(r).data(), da, dzm[0].row(r).data());
      std::copy_n(dz.row(r).data() + da, dz.cols() - da, dzm[1].row(r).data());
    }
  } else {
    dzm[0] = dz;
    dzm[1] = dz;
  }

  if (lambda_uni != 0.0) {
    const std::array<const Matrix*, 2> zs{&za, &zv};
    for (int m = 0; m < kModalities; ++m) {
      const auto mi = static_cast<std::size_t>(m);
      const Matrix wm = head_block(model, m);
      Matrix fm = matmul(*zs[mi], transpose(wm));
      add_bias_rows(fm, model.head.bias, 1.0 / kModalities);
      g.loss += lambda_uni * cross_entropy(fm, labels);
      const Matrix em = residual(fm, labels, lambda_uni);
      const Matrix gwm = matmul(transpose(em), *zs[mi]);
      const std::size_t offset = (model.fusion == Fusion::concat && m == 1) ? da : 0;
      for (std::size_t r = 0; r < gwm.rows(); ++r)
        for (std::size_t c = 0; c < gwm.cols(); ++c) g.head_weight(r, offset + c) += gwm(r, c);
      const auto gbm = colsums(em);
      for (std::size_t k = 0; k < gbm.size(); ++k)
        g.head_bias[k] += gbm[k] / kModalities;
      dzm[mi] = dzm[mi] + matmul(em, wm);
    }
  }

  g.encoder[0] = encoder_backward(model.encoders[0], cache_a, std::move(dzm[0]));
  g.encoder[1] = encoder_backward(model.encoders[1], cache_v, std::move(dzm[1]));
  for (int m = 0; m < kModalities; ++m) {
    double s = 0.0;
    for (double v : g.encoder[static_cast<std::size_t>(m)]) s += v * v;
    g.encoder_norm[static_cast<std::size_t>(m)] = std::sqrt(s);
  }
  return g;
}

GradientBundle fd_gradient(const ModelState& model, const Matrix& xa, const Matrix& xv,
                           const std::vector<int>& labels, double h, double lambda_uni) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("fd_gradient: step must be finite and > 0");
  }
  ModelState work = model;
  auto probe = [&](double* coord) {
    const double saved = *coord;
    *coord = saved + h;
    const double up = total_loss(work, xa, xv, labels, lambda_uni);
    *coord = saved - h;
    const double down = total_loss(work, xa, xv, labels, lambda_uni);
    *coord = saved;
    return (up - down) / (2.0 * h);
  };

  GradientBundle g;
  g.loss = total_loss(model, xa, xv, labels, lambda_uni);
  for (int m = 0; m < kModalities; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    std::vector<double>& out = g.encoder[mi];
    out.reserve(work.encoders[mi].param_count());
    for (auto& layer : work.encoders[mi].layers) {
      for (double& w : layer.weight.values()) out.push_back(probe(&w));
      for (double& b : layer.bias) out.push_back(probe(&b));
    }
    double s = 0.0;
    for (double v : out) s += v * v;
    g.encoder_norm[mi] = std::sqrt(s);
  }
  g.head_weight = Matrix(work.head.weight.rows(), work.head.weight.cols());
  for (std::size_t i = 0; i < work.head.weight.size(); ++i)
    g.head_weight.values()[i] = probe(&work.head.weight.values()[i]);
  for (double& b : work.head.bias) g.head_bias.push_back(probe(&b));
  return g;
}

namespace {

constexpr int kCheckpointVersion = 1;

nlohmann::ordered_json array_json(std::span<const double> v) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (double x : v) arr.push_back(x);
  return arr;
}

std::vector<double> array_from(const nlohmann::ordered_json& j, const std::string& what,
                               std::size_t expected) {
  if (!j.is_array() || j.size() != expected) {
    throw LoadError("checkpoint: " + what + " must be an array of " +
                    std::to_string(expected) + " numbers");
  }
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& x : j) {
    if (!x.is_number()) throw LoadError("checkpoint: non-numeric entry in " + what);
    out.push_back(x.get<double>());
  }
  return out;
}

void reject_unknown_keys(const nlohmann::ordered_json& obj,
                         std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return it.key() == k;
        }) == allowed.end()) {
      throw LoadError("checkpoint: unknown key \"" + it.key() + "\" in " + where);
    }
  }
}

}  // namespace

void save_checkpoint(const ModelState& model, const std::string& path) {
  nlohmann::ordered_json j;
  j["format"] = "redreg-checkpoint";
  j["version"] = kCheckpointVersion;
  j["fusion"] = model.fusion == Fusion::concat ? "concat" : "sum";
  nlohmann::ordered_json encs = nlohmann::ordered_json::array();
  for (const auto& enc : model.encoders) {
    nlohmann::ordered_json je;
    je["output_activation"] =
        enc.output_activation == Activation::relu ? "relu" : "identity";
    nlohmann::ordered_json layers = nlohmann::ordered_json::array();
    for (const auto& l : enc.layers) {
      nlohmann::ordered_json jl;
      jl["out"] = l.weight.rows();
      jl["in"] = l.weight.cols();
      jl["weight"] = array_json(l.weight.values());
      jl["bias"] = array_json(l.bias);
      layers.push_back(std::move(jl));
    }
    je["layers"] = std::move(layers);
    encs.push_back(std::move(je));
  }
  j["encoders"] = std::move(encs);

  nlohmann::ordered_json jh;
  jh["classes"] = model.head.weight.rows();
  jh["dim"] = model.head.weight.cols();
  jh["blocks"] = {model.head.block_dims[0], model.head.block_dims[1]};
  jh["weight"] = array_json(model.head.weight.values());
  jh["bias"] = array_json(model.head.bias);
  j["head"] = std::move(jh);

  nlohmann::ordered_json jv;
  jv["encoders"] = {array_json(model.encoder_velocity[0]), array_json(model.encoder_velocity[1])};
  jv["head_weight"] = array_json(model.head_weight_velocity.values());
  jv["head_bias"] = array_json(model.head_bias_velocity);
  j["velocity"] = std::move(jv);
  j["anchors"] = {array_json(model.anchors[0]), array_json(model.anchors[1])};

  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write " + path);
  out << dump_canonical(j) << '\n';
}

ModelState load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path);
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw LoadError(path + ": invalid JSON: " + e.what());
  }
  reject_unknown_keys(j, {"format", "version", "fusion", "encoders", "head", "velocity", "anchors"},
                      "checkpoint root");
  if (!j.contains("format") || j["format"] != "redreg-checkpoint") {
    throw LoadError(path + ": not a redreg checkpoint");
  }
  if (!j.contains("version") || !j["version"].is_number_integer() ||
      j["version"].get<int>() != kCheckpointVersion) {
    throw LoadError(path + ": unsupported checkpoint version");
  }

  ModelState model;
  const std::string fusion = j.at("fusion").get<std::string>();
  if (fusion == "concat") {
    model.fusion = Fusion::concat;
  } else if (fusion == "sum") {
    model.fusion = Fusion::sum;
  } else {
    throw LoadError(path + ": unknown fusion \"" + fusion + "\"");
  }

  const auto& encs = j.at("encoders");
  if (!encs.is_array() || encs.size() != 2) throw LoadError(path + ": need exactly 2 encoders");
  for (std::size_t m = 0; m < 2; ++m) {
    const auto& je = encs[m];
    reject_unknown_keys(je, {"output_activation", "layers"}, "encoder");
    EncoderParams enc;
    const std::string act = je.at("output_activation").get<std::string>();
    if (act == "relu") {
      enc.output_activation = Activation::relu;
    } else if (act == "identity") {
      enc.output_activation = Activation::identity;
    } else {
      throw LoadError(path + ": unknown activation \"" + act + "\"");
    }
    for (const auto& jl : je.at("layers")) {
      reject_unknown_keys(jl, {"out", "in", "weight", "bias"}, "layer");
      const auto out_dim = jl.at("out").get<std::size_t>();
      const auto in_dim = jl.at("in").get<std::size_t>();
      Layer layer;
      layer.weight = Matrix(out_dim, in_dim,
                            array_from(jl.at("weight"), "layer weight", out_dim * in_dim));
      layer.bias = array_from(jl.at("bias"), "layer bias", out_dim);
      enc.layers.push_back(std::move(layer));
    }
    if (enc.layers.empty()) throw LoadError(path + ": encoder has no layers");
    model.encoders[m] = std::move(enc);
  }

  const auto& jh = j.at("head");
  reject_unknown_keys(jh, {"classes", "dim", "blocks", "weight", "bias"}, "head");
  const auto classes = jh.at("classes").get<std::size_t>();
  const auto dim = jh.at("dim").get<std::size_t>();
  model.head.weight =
      Matrix(classes, dim, array_from(jh.at("weight"), "head weight", classes * dim));
  model.head.bias = array_from(jh.at("bias"), "head bias", classes);
  const auto& blocks = jh.at("blocks");
  if (!blocks.is_array() || blocks.size() != 2) throw LoadError(path + ": head blocks must have 2 entries");
  model.head.block_dims = {blocks[0].get<std::size_t>(), blocks[1].get<std::size_t>()};

  const auto& jv = j.at("velocity");
  reject_unknown_keys(jv, {"encoders", "head_weight", "head_bias"}, "velocity");
  const auto& venc = jv.at("encoders");
  if (!venc.is_array() || venc.size() != 2) throw LoadError(path + ": velocity needs 2 encoder arrays");
  for (std::size_t m = 0; m < 2; ++m) {
    model.encoder_velocity[m] =
        array_from(venc[m], "encoder velocity", model.encoders[m].param_count());
  }
  model.head_weight_velocity =
      Matrix(classes, dim, array_from(jv.at("head_weight"), "head weight velocity", classes * dim));
  model.head_bias_velocity = array_from(jv.at("head_bias"), "head bias velocity", classes);

  const auto& ja = j.at("anchors");
  if (!ja.is_array() || ja.size() != 2) throw LoadError(path + ": anchors needs 2 arrays");
  for (std::size_t m = 0; m < 2; ++m) {
    model.anchors[m] = array_from(ja[m], "anchor", model.encoders[m].param_count());
  }
  return model;
}

}  // namespace redreg
