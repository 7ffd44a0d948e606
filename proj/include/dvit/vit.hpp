#pragma once

// Vision Transformer binary classifier.
//
// Shape chain for the default configuration:
//   392x392x3 frame -> 196 patches of 28*28*3 = 2352 values
//   -> z0: 197 x D (class token + 196 patch embeddings, plus positions)
//   -> L encoder layers (pre-norm attention and MLP, each with a residual)
//   -> class-token row -> layer norm -> MLP head -> 2 logits.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "dvit/image.hpp"
#include "dvit/keyvalue.hpp"
#include "dvit/rng.hpp"
#include "dvit/tensor.hpp"

namespace dvit {

struct VitConfig {
  std::size_t num_classes = 2;
  /// Nominal dataset frame shape (H, W, C). Frames of any size are accepted
  /// and resized; the channel count is taken from here.
  std::array<std::size_t, 3> input_shape{256, 256, 3};
  std::array<std::size_t, 2> resized_size{392, 392};
  std::size_t patch_size = 28;
  std::size_t batch_size = 256;
  std::size_t epochs = 150;
  double learning_rate = 0.001;
  double weight_decay = 0.0001;
  std::size_t num_heads = 4;
  std::size_t transformer_layers = 8;
  /// Encoder MLP widths; the last must equal projection_dim.
  std::vector<std::size_t> transformer_units{128, 64};
  /// Classifier head hidden widths before the logit layer.
  std::vector<std::size_t> mlp_head_units{2048, 1024};
  std::size_t projection_dim = 64;
  double layer_norm_eps = kLayerNormEps;
  double init_std = 0.02;
  double dropout_rate = 0.0;
  /// Per-channel standardisation applied after scaling pixels to [0, 1].
  std::vector<double> channel_mean{0.0, 0.0, 0.0};
  std::vector<double> channel_std{1.0, 1.0, 1.0};

  std::size_t channels() const { return input_shape[2]; }
  std::size_t height() const { return resized_size[0]; }
  std::size_t width() const { return resized_size[1]; }
  /// N = H * W / P^2.
  std::size_t num_patches() const;
  /// P^2 * C.
  std::size_t patch_elements() const;
  std::size_t head_dim() const { return projection_dim / num_heads; }

  /// Throws ContractError naming the violated constraint.
  void validate() const;

  KeyValues to_key_values() const;
  /// Keys absent from `kv` keep their value from `base`; unknown keys are
  /// rejected with FormatError.
  static VitConfig from_key_values(const KeyValues& kv, const VitConfig& base);
  static VitConfig from_key_values(const KeyValues& kv);

  /// 8x8x3 input, P = 4, D = 8, 2 heads, 1 layer, MLP [16, 8], head [8].
  static VitConfig tiny();

  bool operator==(const VitConfig&) const = default;
};

/// N x (P^2 C) matrix of flattened patches, patches in row-major grid order,
/// each patch flattened as (row, column, channel).
struct PatchSequence {
  std::size_t count = 0;
  std::size_t elements_per_patch = 0;
  Tensor rows;
};

PatchSequence patchify(const ImageFrame& frame, std::size_t patch);
ImageFrame unpatchify(const PatchSequence& seq, std::size_t height, std::size_t width, std::size_t channels,
                      std::size_t patch);

struct EmbeddingParams {
  Tensor projection;   // (P^2 C) x D
  Tensor class_token;  // 1 x D
  Tensor position;     // (N + 1) x D
};

struct AttentionHeadParams {
  Tensor query;  // D x d_k
  Tensor key;
  Tensor value;
};

struct DenseParams {
  Tensor weight;  // in x out
  Tensor bias;    // out
};

struct LayerNormParams {
  Tensor gain;
  Tensor bias;
};

struct EncoderLayerParams {
  LayerNormParams attention_norm;
  std::vector<AttentionHeadParams> heads;
  Tensor output_projection;  // (h d_k) x D
  LayerNormParams mlp_norm;
  std::vector<DenseParams> mlp;
};

/// Intermediate values of one attention head.
struct AttentionState {
  Tensor query;
  Tensor key;
  Tensor value;
  Tensor weights;  // (N + 1) x (N + 1), row-stochastic
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

class VitModel {
 public:
  /// Gaussian(0, init_std) weights, zero biases, unit layer-norm gains.
  /// Every value is rounded to the nearest float so that checkpoints, which
  /// store 32-bit values, reproduce the model exactly.
  static VitModel initialize(const VitConfig& config, SeededGenerator& rng);
  /// All-zero parameters with the shapes implied by `config`.
  static VitModel zeros(const VitConfig& config);

  const VitConfig& config() const { return config_; }
  void set_channel_stats(const ChannelStats& stats);

  /// Every parameter tensor with a stable name, in a fixed order.
  std::vector<NamedTensor> named_parameters() const;
  std::vector<Tensor> parameters() const;
  /// Deep copy, independent storage.
  VitModel clone() const;

  EmbeddingParams embedding;
  std::vector<EncoderLayerParams> layers;
  LayerNormParams final_norm;
  std::vector<DenseParams> head;
  DenseParams classifier;

 private:
  explicit VitModel(VitConfig config) : config_(std::move(config)) {}
  VitConfig config_;
};

/// z0 = [class; x_1 E; ...; x_N E] + E_pos.
Tensor embed_patches(const PatchSequence& seq, const EmbeddingParams& params);

/// softmax(Q K^T / sqrt(d_k)) V with Q = z W_q, K = z W_k, V = z W_v.
Tensor attention_head(const Tensor& z, const AttentionHeadParams& params, AttentionState* state = nullptr);

/// concat(head_1, ..., head_h) W_o.
Tensor multi_head_attention(const Tensor& z, const EncoderLayerParams& params,
                            std::vector<AttentionState>* states = nullptr);

/// Dense layers with GeLU after each, optional dropout after each activation.
Tensor mlp_block(const Tensor& x, const std::vector<DenseParams>& layers, double dropout_rate = 0.0,
                 SeededGenerator* rng = nullptr);

/// z' = MSA(LN(z)) + z; out = MLP(LN(z')) + z'.
Tensor encoder_layer(const Tensor& z, const EncoderLayerParams& params, double eps,
                     std::vector<AttentionState>* states = nullptr, double dropout_rate = 0.0,
                     SeededGenerator* rng = nullptr);

struct ForwardOptions {
  /// Enables dropout (training mode) when non-null.
  SeededGenerator* dropout_rng = nullptr;
  /// When non-null, receives one vector of head states per layer.
  std::vector<std::vector<AttentionState>>* attention = nullptr;
};

/// 1 x num_classes logits for an already patchified, standardised frame.
Tensor forward_logits(const VitModel& model, const PatchSequence& patches, const ForwardOptions& options = {});

/// Raw frame in [0, 255] of any size -> standardised frame at the model's
/// resolution.
ImageFrame preprocess(const VitConfig& config, const ImageFrame& raw);
/// Frame in [0, 1] at model resolution -> standardised frame.
ImageFrame standardize_for_model(const VitConfig& config, const ImageFrame& unit_frame);

/// Class probabilities for a standardised frame at model resolution.
/// Throws ContractError if the frame has not been resized.
std::vector<double> forward_classify(const VitModel& model, const ImageFrame& frame);

}  // namespace dvit
