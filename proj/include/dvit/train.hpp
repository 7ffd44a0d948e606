#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dvit/dataset.hpp"
#include "dvit/image.hpp"
#include "dvit/metrics.hpp"
#include "dvit/tensor.hpp"
#include "dvit/vit.hpp"

namespace dvit {

struct AdamWOptions {
  double learning_rate = 0.001;
  double weight_decay = 0.0001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Store updated weights at 32-bit precision (checkpoint precision).
  bool round_to_f32 = false;
};

struct OptimizerState {
  AdamWOptions options;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::uint64_t step = 0;

  static OptimizerState for_parameters(std::span<const Tensor> params, const AdamWOptions& options = {});
};

/// One bias-corrected adaptive-moment step with decoupled decay:
///   w <- w (1 - lr lambda) - lr mhat / (sqrt(vhat) + eps).
/// Throws TrainingError on a non-finite gradient before touching any weight.
void adamw_step(std::span<Tensor> params, std::span<const std::vector<double>> grads, OptimizerState& state);
/// Uses each tensor's accumulated gradient (zero when none).
void adamw_step(std::span<Tensor> params, OptimizerState& state);

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct Evaluation {
  std::vector<std::array<double, 2>> probabilities;
  std::vector<Label> predictions;
  std::vector<Label> labels;
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Inference pass over frames already in [0, 1] at model resolution.
Evaluation evaluate_dataset(const VitModel& model, const Dataset& data);

struct TrainOptions {
  AugmentationPolicy augmentation;
  bool augment = true;
  /// Called after each epoch; returning false stops training.
  std::function<bool(const EpochStats&, const VitModel&)> on_epoch;
};

struct TrainRun {
  std::vector<EpochStats> curves;
  std::size_t best_epoch = 0;
  double best_val_accuracy = -1.0;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
  VitConfig config;
  std::optional<VitModel> best_model;
  std::optional<VitModel> final_model;

  /// epoch,train_loss,train_acc,val_loss,val_acc
  std::string curves_csv() const;
};

/// Mini-batch training. Train loss/accuracy are running values over the
/// (augmented) batches of each epoch; validation runs on clean frames.
/// Deterministic for a fixed seed. Channel statistics are taken from
/// `config` as given.
TrainRun train(const Dataset& train_set, const Dataset& validation_set, const VitConfig& config,
               std::uint64_t seed, const TrainOptions& options = {});

struct SplitRow {
  std::string preset;
  std::size_t train_size = 0;
  std::size_t validation_size = 0;
  std::array<std::size_t, 2> train_per_class{0, 0};
  std::array<std::size_t, 2> validation_per_class{0, 0};
  double train_accuracy = 0.0;
  double validation_accuracy = 0.0;
  std::optional<double> test_accuracy;
  std::size_t best_epoch = 0;
};

struct SplitReport {
  std::vector<SplitRow> rows;
  /// preset,train_size,validation_size,train_drowsy,train_vigilant,
  /// val_drowsy,val_vigilant,train_acc,val_acc,test_acc,best_epoch
  std::string to_csv() const;
  std::string to_text() const;
};

/// Trains once per preset on `data` (test accuracy only when `test` is
/// non-null). Errors are rethrown annotated with the preset.
SplitReport split_experiment(const Dataset& data, const VitConfig& config, std::span<const std::string> presets,
                             std::uint64_t seed, const TrainOptions& options = {}, const Dataset* test = nullptr);

}  // namespace dvit
