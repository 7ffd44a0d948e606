#include "dvit/train.hpp"

#include <cmath>

#include "dvit/errors.hpp"
#include "dvit/keyvalue.hpp"

namespace dvit {

OptimizerState OptimizerState::for_parameters(std::span<const Tensor> params, const AdamWOptions& options) {
  OptimizerState s;
  s.options = options;
  for (const Tensor& p : params) {
    s.m.emplace_back(p.numel(), 0.0);
    s.v.emplace_back(p.numel(), 0.0);
  }
  return s;
}

void adamw_step(std::span<Tensor> params, std::span<const std::vector<double>> grads, OptimizerState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw ContractError("adamw_step: parameter, gradient and moment counts differ");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].size() != params[i].numel() || state.m[i].size() != params[i].numel())
      throw DimensionError("adamw_step: gradient " + std::to_string(i) + " does not match its parameter " +
                           shape_str(params[i].shape()));
    for (double g : grads[i])
      if (!std::isfinite(g)) throw TrainingError("adamw_step: non-finite gradient in parameter " + std::to_string(i));
  }
  const AdamWOptions& o = state.options;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(o.beta1, t);
  const double c2 = 1.0 - std::pow(o.beta2, t);
  const double decay = 1.0 - o.learning_rate * o.weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i].mutable_data();
    auto& m = state.m[i];
    auto& v = state.v[i];
    const auto& g = grads[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = o.beta1 * m[j] + (1.0 - o.beta1) * g[j];
      v[j] = o.beta2 * v[j] + (1.0 - o.beta2) * g[j] * g[j];
      const double update = (m[j] / c1) / (std::sqrt(v[j] / c2) + o.eps);
      double next = w[j] * decay - o.learning_rate * update;
      if (o.round_to_f32) next = static_cast<double>(static_cast<float>(next));
      w[j] = next;
    }
  }
}

void adamw_step(std::span<Tensor> params, OptimizerState& state) {
  std::vector<std::vector<double>> grads;
  grads.reserve(params.size());
  for (const Tensor& p : params) {
    if (p.has_grad()) grads.emplace_back(p.grad().begin(), p.grad().end());
    else grads.emplace_back(p.numel(), 0.0);
  }
  adamw_step(params, grads, state);
}

Evaluation evaluate_dataset(const VitModel& model, const Dataset& data) {
  if (data.empty()) throw ContractError("evaluate_dataset: empty dataset");
  Evaluation ev;
  std::size_t correct = 0;
  for (const LabeledFrame& item : data) {
    const auto p = forward_classify(model, standardize_for_model(model.config(), item.frame));
    const std::array<double, 2> pair{p[0], p[1]};
    ev.probabilities.push_back(pair);
    ev.predictions.push_back(predict_label(pair));
    ev.labels.push_back(item.label);
    if (ev.predictions.back() == item.label) ++correct;
  }
  ev.loss = binary_cross_entropy(ev.probabilities, ev.labels);
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return ev;
}

std::string TrainRun::curves_csv() const {
  std::string out = "epoch,train_loss,train_acc,val_loss,val_acc\n";
  for (const EpochStats& e : curves)
    out += std::to_string(e.epoch) + ',' + format_fixed(e.train_loss, 6) + ',' + format_fixed(e.train_accuracy, 6) +
           ',' + format_fixed(e.val_loss, 6) + ',' + format_fixed(e.val_accuracy, 6) + '\n';
  return out;
}

namespace {

// Stream ids for derived generators.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;
constexpr std::uint64_t kSampleStream = 3;

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace

TrainRun train(const Dataset& train_set, const Dataset& validation_set, const VitConfig& config, std::uint64_t seed,
               const TrainOptions& options) {
  config.validate();
  if (train_set.empty()) throw ContractError("train: empty training split");
  if (validation_set.empty()) throw ContractError("train: empty validation split");
  if (options.augment) options.augmentation.validate();

  TrainRun run;
  run.seed = seed;
  run.config = config;
  const SeededGenerator root(seed);
  SeededGenerator init_rng = root.derive(kInitStream);
  VitModel model = VitModel::initialize(config, init_rng);
  std::vector<Tensor> params = model.parameters();
  AdamWOptions adam;
  adam.learning_rate = config.learning_rate;
  adam.weight_decay = config.weight_decay;
  adam.round_to_f32 = true;
  OptimizerState opt = OptimizerState::for_parameters(params, adam);

  const SeededGenerator shuffle_root = root.derive(kShuffleStream);
  const SeededGenerator sample_root = root.derive(kSampleStream);
  const std::size_t n = train_set.size();
  const std::size_t batch = std::min(config.batch_size, n);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    SeededGenerator shuffle_rng = shuffle_root.derive(epoch);
    shuffle_indices(order, shuffle_rng);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    const SeededGenerator epoch_root = sample_root.derive(epoch);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(start + batch, n);
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      for (const Tensor& p : params) p.zero_grad();
      try {
        for (std::size_t k = start; k < end; ++k) {
          const LabeledFrame& item = train_set[order[k]];
          SeededGenerator rng = epoch_root.derive(k);
          ImageFrame frame = options.augment ? apply_augmentation(item.frame, options.augmentation, rng) : item.frame;
          frame = standardize_for_model(config, frame);
          Tape tape;
          TapeScope scope(tape);
          ForwardOptions fwd;
          if (config.dropout_rate > 0.0) fwd.dropout_rng = &rng;
          const Tensor logits = forward_logits(model, patchify(frame, config.patch_size), fwd);
          const std::size_t target = static_cast<std::size_t>(item.label);
          const Tensor loss = cross_entropy_logits(logits, std::span<const std::size_t>(&target, 1));
          loss_sum += loss.item();
          if (argmax(logits.data()) == target) ++correct;
          tape.backward(scale(loss, inv_batch));
        }
        adamw_step(params, opt);
      } catch (const NumericError& e) {
        throw TrainingError("training diverged at epoch " + std::to_string(epoch) + ", step " +
                            std::to_string(run.steps + 1) + ": " + e.what());
      }
      ++run.steps;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(n);
    stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    if (!std::isfinite(stats.train_loss))
      throw TrainingError("training diverged at epoch " + std::to_string(epoch) + ": loss is not finite");
    Evaluation val;
    try {
      val = evaluate_dataset(model, validation_set);
    } catch (const NumericError& e) {
      throw TrainingError("training diverged at epoch " + std::to_string(epoch) + " during validation: " + e.what());
    }
    stats.val_loss = val.loss;
    stats.val_accuracy = val.accuracy;
    run.curves.push_back(stats);
    if (stats.val_accuracy > run.best_val_accuracy) {
      run.best_val_accuracy = stats.val_accuracy;
      run.best_epoch = epoch;
      run.best_model = model.clone();
    }
    if (options.on_epoch && !options.on_epoch(stats, model)) break;
  }
  for (const Tensor& p : params) p.zero_grad();
  run.final_model = model.clone();
  return run;
}

std::string SplitReport::to_csv() const {
  std::string out =
      "preset,train_size,validation_size,train_drowsy,train_vigilant,val_drowsy,val_vigilant,train_acc,val_acc,"
      "test_acc,best_epoch\n";
  for (const SplitRow& r : rows)
    out += r.preset + ',' + std::to_string(r.train_size) + ',' + std::to_string(r.validation_size) + ',' +
           std::to_string(r.train_per_class[0]) + ',' + std::to_string(r.train_per_class[1]) + ',' +
           std::to_string(r.validation_per_class[0]) + ',' + std::to_string(r.validation_per_class[1]) + ',' +
           format_fixed(r.train_accuracy) + ',' + format_fixed(r.validation_accuracy) + ',' +
           format_cell(r.test_accuracy) + ',' + std::to_string(r.best_epoch) + '\n';
  return out;
}

std::string SplitReport::to_text() const {
  std::string out = "split   train%   val%     test%\n";
  const auto pct = [](std::optional<double> v) {
    if (!v) return std::string("-      ");
    std::string s = format_fixed(*v * 100.0, 1);
    s.resize(std::max<std::size_t>(s.size(), 7), ' ');
    return s;
  };
  for (const SplitRow& r : rows) {
    std::string name = r.preset;
    name.resize(8, ' ');
    out += name + pct(r.train_accuracy) + "  " + pct(r.validation_accuracy) + "  " + pct(r.test_accuracy) + '\n';
  }
  return out;
}

SplitReport split_experiment(const Dataset& data, const VitConfig& config, std::span<const std::string> presets,
                             std::uint64_t seed, const TrainOptions& options, const Dataset* test) {
  if (presets.empty()) throw ContractError("split_experiment: no presets given");
  std::vector<Sample> samples;
  samples.reserve(data.size());
  for (const LabeledFrame& f : data) {
    Sample s = f.sample;
    s.label = f.label;
    samples.push_back(std::move(s));
  }
  SplitReport report;
  for (const std::string& name : presets) {
    try {
      const SplitSpec spec = SplitSpec::preset(name, seed);
      const SplitResult split = make_splits(samples, spec);
      const Dataset train_set = select(data, split.train);
      const Dataset val_set = select(data, split.validation);
      SplitRow row;
      row.preset = name;
      row.train_size = train_set.size();
      row.validation_size = val_set.size();
      for (const auto& f : train_set) ++row.train_per_class[static_cast<std::size_t>(f.label)];
      for (const auto& f : val_set) ++row.validation_per_class[static_cast<std::size_t>(f.label)];
      const TrainRun run = train(train_set, val_set, config, seed, options);
      row.train_accuracy = evaluate_dataset(*run.best_model, train_set).accuracy;
      row.validation_accuracy = run.best_val_accuracy;
      row.best_epoch = run.best_epoch;
      if (test != nullptr && !test->empty()) row.test_accuracy = evaluate_dataset(*run.best_model, *test).accuracy;
      report.rows.push_back(std::move(row));
    } catch (const Error& e) {
      throw TrainingError("split " + name + ": " + e.what());
    }
  }
  return report;
}

}  // namespace dvit
