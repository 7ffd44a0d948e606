#include "dvit/vit.hpp"

#include <cmath>

#include "dvit/errors.hpp"

namespace dvit {

// ---------------------------------------------------------------------------
// VitConfig

std::size_t VitConfig::num_patches() const {
  return (height() / patch_size) * (width() / patch_size);
}

std::size_t VitConfig::patch_elements() const { return patch_size * patch_size * channels(); }

void VitConfig::validate() const {
  auto fail = [](const std::string& what) { throw ContractError("config: " + what); };
  if (num_classes < 2) fail("num_classes must be at least 2");
  if (channels() != 1 && channels() != 3) fail("input channels must be 1 or 3");
  if (patch_size == 0) fail("patch_size must be positive");
  if (height() == 0 || width() == 0) fail("resized_image_size must be positive");
  if (height() % patch_size != 0 || width() % patch_size != 0)
    fail("resized size " + std::to_string(height()) + "x" + std::to_string(width()) +
         " is not divisible by patch size " + std::to_string(patch_size));
  if (num_heads == 0 || projection_dim == 0) fail("num_heads and projection_dim must be positive");
  if (projection_dim % num_heads != 0)
    fail("projection_dim " + std::to_string(projection_dim) + " is not divisible by num_heads " +
         std::to_string(num_heads));
  if (transformer_units.empty() || transformer_units.back() != projection_dim)
    fail("last transformer unit must equal projection_dim " + std::to_string(projection_dim));
  for (std::size_t u : transformer_units)
    if (u == 0) fail("transformer_units must be positive");
  for (std::size_t u : mlp_head_units)
    if (u == 0) fail("mlp_head_units must be positive");
  if (batch_size == 0) fail("batch_size must be positive");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (!(weight_decay >= 0.0)) fail("weight_decay must be non-negative");
  if (!(layer_norm_eps > 0.0)) fail("layer_norm_eps must be positive");
  if (!(init_std > 0.0)) fail("init_std must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout_rate must lie in [0, 1)");
  if (channel_mean.size() != channels() || channel_std.size() != channels())
    fail("channel_mean/channel_std need one value per channel");
  for (double s : channel_std)
    if (!(s > 0.0)) fail("channel_std must be positive");
}

namespace {

template <class T>
std::string join(const std::vector<T>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>)
      out += format_double(values[i]);
    else
      out += std::to_string(values[i]);
  }
  return out + "]";
}

std::vector<std::size_t> to_sizes(const std::vector<long long>& v, std::string_view what) {
  std::vector<std::size_t> out;
  for (long long x : v) {
    if (x <= 0) throw FormatError(std::string(what) + ": values must be positive");
    out.push_back(static_cast<std::size_t>(x));
  }
  return out;
}

std::size_t to_size(std::string_view s, std::string_view what) {
  const long long v = parse_int(s, what);
  if (v < 0) throw FormatError(std::string(what) + ": must be non-negative");
  return static_cast<std::size_t>(v);
}

}  // namespace

KeyValues VitConfig::to_key_values() const {
  KeyValues kv;
  kv["num_classes"] = std::to_string(num_classes);
  kv["input_shape"] = join(std::vector<std::size_t>(input_shape.begin(), input_shape.end()));
  kv["resized_image_size"] = join(std::vector<std::size_t>(resized_size.begin(), resized_size.end()));
  kv["patch_size"] = std::to_string(patch_size);
  kv["batch_size"] = std::to_string(batch_size);
  kv["num_epochs"] = std::to_string(epochs);
  kv["learning_rate"] = format_double(learning_rate);
  kv["weight_decay"] = format_double(weight_decay);
  kv["num_heads"] = std::to_string(num_heads);
  kv["transformer_layers"] = std::to_string(transformer_layers);
  kv["transformer_units"] = join(transformer_units);
  kv["mlp_head_units"] = join(mlp_head_units);
  kv["projection_dim"] = std::to_string(projection_dim);
  kv["layer_norm_eps"] = format_double(layer_norm_eps);
  kv["init_std"] = format_double(init_std);
  kv["dropout_rate"] = format_double(dropout_rate);
  kv["channel_mean"] = join(channel_mean);
  kv["channel_std"] = join(channel_std);
  return kv;
}

VitConfig VitConfig::from_key_values(const KeyValues& kv, const VitConfig& base) {
  VitConfig c = base;
  bool channels_changed = false;
  for (const auto& [key, value] : kv) {
    if (key == "num_classes") {
      c.num_classes = to_size(value, key);
    } else if (key == "input_shape") {
      const auto v = to_sizes(parse_int_list(value, key), key);
      if (v.size() != 3) throw FormatError("input_shape: expected (H, W, C)");
      channels_changed = channels_changed || v[2] != c.input_shape[2];
      c.input_shape = {v[0], v[1], v[2]};
    } else if (key == "resized_image_size") {
      const auto v = to_sizes(parse_int_list(value, key), key);
      if (v.size() != 2) throw FormatError("resized_image_size: expected (H, W)");
      c.resized_size = {v[0], v[1]};
    } else if (key == "patch_size") {
      c.patch_size = to_size(value, key);
    } else if (key == "batch_size") {
      c.batch_size = to_size(value, key);
    } else if (key == "num_epochs") {
      c.epochs = to_size(value, key);
    } else if (key == "learning_rate") {
      c.learning_rate = parse_double(value, key);
    } else if (key == "weight_decay") {
      c.weight_decay = parse_double(value, key);
    } else if (key == "num_heads") {
      c.num_heads = to_size(value, key);
    } else if (key == "transformer_layers") {
      c.transformer_layers = to_size(value, key);
    } else if (key == "transformer_units") {
      c.transformer_units = to_sizes(parse_int_list(value, key), key);
    } else if (key == "mlp_head_units") {
      c.mlp_head_units = value.find_first_of("0123456789") == std::string::npos
                             ? std::vector<std::size_t>{}
                             : to_sizes(parse_int_list(value, key), key);
    } else if (key == "projection_dim") {
      c.projection_dim = to_size(value, key);
    } else if (key == "layer_norm_eps") {
      c.layer_norm_eps = parse_double(value, key);
    } else if (key == "init_std") {
      c.init_std = parse_double(value, key);
    } else if (key == "dropout_rate") {
      c.dropout_rate = parse_double(value, key);
    } else if (key == "channel_mean") {
      c.channel_mean = parse_double_list(value, key);
    } else if (key == "channel_std") {
      c.channel_std = parse_double_list(value, key);
    } else {
      throw FormatError("config: unknown key '" + key + "'");
    }
  }
  // A channel change without explicit statistics resets them to identity.
  if (channels_changed && !kv.contains("channel_mean")) c.channel_mean.assign(c.channels(), 0.0);
  if (channels_changed && !kv.contains("channel_std")) c.channel_std.assign(c.channels(), 1.0);
  return c;
}

VitConfig VitConfig::from_key_values(const KeyValues& kv) { return from_key_values(kv, VitConfig{}); }

VitConfig VitConfig::tiny() {
  VitConfig c;
  c.input_shape = {8, 8, 3};
  c.resized_size = {8, 8};
  c.patch_size = 4;
  c.batch_size = 16;
  c.epochs = 20;
  c.num_heads = 2;
  c.transformer_layers = 1;
  c.transformer_units = {16, 8};
  c.mlp_head_units = {8};
  c.projection_dim = 8;
  return c;
}

// ---------------------------------------------------------------------------
// Patches

PatchSequence patchify(const ImageFrame& frame, std::size_t patch) {
  if (patch == 0) throw ContractError("patchify: patch size must be positive");
  if (frame.height() % patch != 0 || frame.width() % patch != 0)
    throw ContractError("patchify: frame " + std::to_string(frame.height()) + "x" + std::to_string(frame.width()) +
                        " is not divisible into " + std::to_string(patch) + "-pixel patches");
  const std::size_t c = frame.channels();
  const std::size_t gy = frame.height() / patch, gx = frame.width() / patch;
  const std::size_t per_patch = patch * patch * c;
  std::vector<double> rows(gy * gx * per_patch);
  std::size_t o = 0;
  for (std::size_t py = 0; py < gy; ++py)
    for (std::size_t px = 0; px < gx; ++px)
      for (std::size_t y = 0; y < patch; ++y)
        for (std::size_t x = 0; x < patch; ++x)
          for (std::size_t ch = 0; ch < c; ++ch) rows[o++] = frame.at(py * patch + y, px * patch + x, ch);
  return PatchSequence{gy * gx, per_patch, Tensor({gy * gx, per_patch}, std::move(rows))};
}

ImageFrame unpatchify(const PatchSequence& seq, std::size_t height, std::size_t width, std::size_t channels,
                      std::size_t patch) {
  if (patch == 0 || height % patch != 0 || width % patch != 0)
    throw ContractError("unpatchify: extents not divisible by patch size");
  const std::size_t gy = height / patch, gx = width / patch;
  if (seq.count != gy * gx || seq.elements_per_patch != patch * patch * channels)
    throw ContractError("unpatchify: sequence does not match the requested frame");
  ImageFrame frame(height, width, channels);
  const auto src = seq.rows.data();
  std::size_t o = 0;
  for (std::size_t py = 0; py < gy; ++py)
    for (std::size_t px = 0; px < gx; ++px)
      for (std::size_t y = 0; y < patch; ++y)
        for (std::size_t x = 0; x < patch; ++x)
          for (std::size_t ch = 0; ch < channels; ++ch) frame.at(py * patch + y, px * patch + x, ch) = src[o++];
  return frame;
}

// ---------------------------------------------------------------------------
// Parameters

namespace {

Tensor gaussian(Shape shape, double stddev, SeededGenerator& rng) {
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = static_cast<double>(static_cast<float>(rng.normal(0.0, stddev)));
  return Tensor(std::move(shape), std::move(v), true);
}

Tensor constant(Shape shape, double value) { return Tensor::full(std::move(shape), value, true); }

// Builds every parameter from `make(shape, is_weight, fill)`.
template <class Make>
void build(VitModel& m, const VitConfig& c, Make make) {
  const std::size_t d = c.projection_dim, dk = c.head_dim();
  const std::size_t n = c.num_patches();
  m.embedding.projection = make(Shape{c.patch_elements(), d}, true, 0.0);
  m.embedding.class_token = make(Shape{1, d}, true, 0.0);
  m.embedding.position = make(Shape{n + 1, d}, true, 0.0);
  m.layers.clear();
  for (std::size_t l = 0; l < c.transformer_layers; ++l) {
    EncoderLayerParams layer;
    layer.attention_norm = {make(Shape{d}, false, 1.0), make(Shape{d}, false, 0.0)};
    for (std::size_t h = 0; h < c.num_heads; ++h)
      layer.heads.push_back({make(Shape{d, dk}, true, 0.0), make(Shape{d, dk}, true, 0.0),
                             make(Shape{d, dk}, true, 0.0)});
    layer.output_projection = make(Shape{c.num_heads * dk, d}, true, 0.0);
    layer.mlp_norm = {make(Shape{d}, false, 1.0), make(Shape{d}, false, 0.0)};
    std::size_t in = d;
    for (std::size_t units : c.transformer_units) {
      layer.mlp.push_back({make(Shape{in, units}, true, 0.0), make(Shape{units}, false, 0.0)});
      in = units;
    }
    m.layers.push_back(std::move(layer));
  }
  m.final_norm = {make(Shape{d}, false, 1.0), make(Shape{d}, false, 0.0)};
  m.head.clear();
  std::size_t in = d;
  for (std::size_t units : c.mlp_head_units) {
    m.head.push_back({make(Shape{in, units}, true, 0.0), make(Shape{units}, false, 0.0)});
    in = units;
  }
  m.classifier = {make(Shape{in, c.num_classes}, true, 0.0), make(Shape{c.num_classes}, false, 0.0)};
}

}  // namespace

VitModel VitModel::initialize(const VitConfig& config, SeededGenerator& rng) {
  config.validate();
  VitModel m(config);
  build(m, config, [&](Shape shape, bool weight, double fill) {
    return weight ? gaussian(std::move(shape), config.init_std, rng) : constant(std::move(shape), fill);
  });
  return m;
}

VitModel VitModel::zeros(const VitConfig& config) {
  config.validate();
  VitModel m(config);
  build(m, config, [](Shape shape, bool, double) { return constant(std::move(shape), 0.0); });
  return m;
}

void VitModel::set_channel_stats(const ChannelStats& stats) {
  if (stats.mean.size() != config_.channels() || stats.std.size() != config_.channels())
    throw ContractError("set_channel_stats: channel count mismatch");
  config_.channel_mean = stats.mean;
  config_.channel_std = stats.std;
  config_.validate();
}

std::vector<NamedTensor> VitModel::named_parameters() const {
  std::vector<NamedTensor> out;
  out.push_back({"embedding.projection", embedding.projection});
  out.push_back({"embedding.class_token", embedding.class_token});
  out.push_back({"embedding.position", embedding.position});
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string p = "encoder." + std::to_string(l) + ".";
    const auto& layer = layers[l];
    out.push_back({p + "attention_norm.gain", layer.attention_norm.gain});
    out.push_back({p + "attention_norm.bias", layer.attention_norm.bias});
    for (std::size_t h = 0; h < layer.heads.size(); ++h) {
      const std::string hp = p + "head." + std::to_string(h) + ".";
      out.push_back({hp + "query", layer.heads[h].query});
      out.push_back({hp + "key", layer.heads[h].key});
      out.push_back({hp + "value", layer.heads[h].value});
    }
    out.push_back({p + "output_projection", layer.output_projection});
    out.push_back({p + "mlp_norm.gain", layer.mlp_norm.gain});
    out.push_back({p + "mlp_norm.bias", layer.mlp_norm.bias});
    for (std::size_t i = 0; i < layer.mlp.size(); ++i) {
      const std::string mp = p + "mlp." + std::to_string(i) + ".";
      out.push_back({mp + "weight", layer.mlp[i].weight});
      out.push_back({mp + "bias", layer.mlp[i].bias});
    }
  }
  out.push_back({"final_norm.gain", final_norm.gain});
  out.push_back({"final_norm.bias", final_norm.bias});
  for (std::size_t i = 0; i < head.size(); ++i) {
    const std::string hp = "head." + std::to_string(i) + ".";
    out.push_back({hp + "weight", head[i].weight});
    out.push_back({hp + "bias", head[i].bias});
  }
  out.push_back({"classifier.weight", classifier.weight});
  out.push_back({"classifier.bias", classifier.bias});
  return out;
}

std::vector<Tensor> VitModel::parameters() const {
  std::vector<Tensor> out;
  for (auto& p : named_parameters()) out.push_back(p.tensor);
  return out;
}

VitModel VitModel::clone() const {
  VitModel copy = VitModel::zeros(config_);
  const auto src = named_parameters();
  const auto dst = copy.named_parameters();
  for (std::size_t i = 0; i < src.size(); ++i) {
    auto d = dst[i].tensor;
    const auto s = src[i].tensor.data();
    std::copy(s.begin(), s.end(), d.mutable_data().begin());
  }
  return copy;
}

// ---------------------------------------------------------------------------
// Forward pass

Tensor embed_patches(const PatchSequence& seq, const EmbeddingParams& params) {
  if (seq.rows.rows() != seq.count || seq.rows.cols() != params.projection.rows())
    throw ContractError("embed_patches: patch width " + std::to_string(seq.rows.cols()) +
                        " does not match projection " + shape_str(params.projection.shape()));
  if (params.position.rows() != seq.count + 1)
    throw ContractError("embed_patches: positional embedding has " + std::to_string(params.position.rows()) +
                        " rows, expected " + std::to_string(seq.count + 1));
  const Tensor projected = matmul(seq.rows, params.projection);
  return add(concat_rows({params.class_token, projected}), params.position);
}

Tensor attention_head(const Tensor& z, const AttentionHeadParams& params, AttentionState* state) {
  const Tensor q = matmul(z, params.query);
  const Tensor k = matmul(z, params.key);
  const Tensor v = matmul(z, params.value);
  const double scale_factor = 1.0 / std::sqrt(static_cast<double>(params.key.cols()));
  const Tensor weights = softmax_rows(scale(matmul_nt(q, k), scale_factor));
  if (state != nullptr) *state = AttentionState{q, k, v, weights};
  return matmul(weights, v);
}

Tensor multi_head_attention(const Tensor& z, const EncoderLayerParams& params, std::vector<AttentionState>* states) {
  std::vector<Tensor> outputs;
  outputs.reserve(params.heads.size());
  if (states != nullptr) states->assign(params.heads.size(), {});
  std::size_t width = 0;
  for (std::size_t h = 0; h < params.heads.size(); ++h) {
    outputs.push_back(attention_head(z, params.heads[h], states ? &(*states)[h] : nullptr));
    width += outputs.back().cols();
  }
  if (width != params.output_projection.rows())
    throw ContractError("multi_head_attention: concatenated width " + std::to_string(width) +
                        " does not match output projection " + shape_str(params.output_projection.shape()));
  return matmul(concat_cols(outputs), params.output_projection);
}

Tensor mlp_block(const Tensor& x, const std::vector<DenseParams>& layers, double dropout_rate, SeededGenerator* rng) {
  Tensor h = x;
  for (const DenseParams& dense : layers) {
    h = gelu(add_row(matmul(h, dense.weight), dense.bias));
    if (rng != nullptr && dropout_rate > 0.0) h = dropout(h, dropout_rate, *rng);
  }
  return h;
}

Tensor encoder_layer(const Tensor& z, const EncoderLayerParams& params, double eps,
                     std::vector<AttentionState>* states, double dropout_rate, SeededGenerator* rng) {
  const Tensor attended =
      multi_head_attention(layer_norm(z, params.attention_norm.gain, params.attention_norm.bias, eps), params, states);
  const Tensor mid = add(attended, z);
  const Tensor mlp_out =
      mlp_block(layer_norm(mid, params.mlp_norm.gain, params.mlp_norm.bias, eps), params.mlp, dropout_rate, rng);
  return add(mlp_out, mid);
}

Tensor forward_logits(const VitModel& model, const PatchSequence& patches, const ForwardOptions& options) {
  const VitConfig& c = model.config();
  Tensor z = embed_patches(patches, model.embedding);
  if (options.attention != nullptr) options.attention->assign(model.layers.size(), {});
  for (std::size_t l = 0; l < model.layers.size(); ++l)
    z = encoder_layer(z, model.layers[l], c.layer_norm_eps, options.attention ? &(*options.attention)[l] : nullptr,
                      c.dropout_rate, options.dropout_rng);
  const Tensor cls = layer_norm(slice_rows(z, 0, 1), model.final_norm.gain, model.final_norm.bias, c.layer_norm_eps);
  const Tensor features = mlp_block(cls, model.head, c.dropout_rate, options.dropout_rng);
  return add_row(matmul(features, model.classifier.weight), model.classifier.bias);
}

ImageFrame standardize_for_model(const VitConfig& config, const ImageFrame& unit_frame) {
  return standardize(unit_frame, ChannelStats{config.channel_mean, config.channel_std});
}

ImageFrame preprocess(const VitConfig& config, const ImageFrame& raw) {
  if (raw.channels() != config.channels())
    throw ContractError("preprocess: frame has " + std::to_string(raw.channels()) + " channels, model expects " +
                        std::to_string(config.channels()));
  const std::vector<double> zero(config.channels(), 0.0), one(config.channels(), 1.0);
  const ImageFrame unit = normalize_frame(raw, zero, one);
  return standardize_for_model(config, resize_bilinear(unit, config.height(), config.width()));
}

std::vector<double> forward_classify(const VitModel& model, const ImageFrame& frame) {
  const VitConfig& c = model.config();
  if (frame.height() != c.height() || frame.width() != c.width() || frame.channels() != c.channels())
    throw ContractError("forward_classify: frame is " + std::to_string(frame.height()) + "x" +
                        std::to_string(frame.width()) + "x" + std::to_string(frame.channels()) + ", model expects " +
                        std::to_string(c.height()) + "x" + std::to_string(c.width()) + "x" +
                        std::to_string(c.channels()) + " (resize first)");
  const Tensor probs = softmax_rows(forward_logits(model, patchify(frame, c.patch_size)));
  return std::vector<double>(probs.data().begin(), probs.data().end());
}

}  // namespace dvit
