#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <random>

#include "dvit/checkpoint.hpp"
#include "dvit/dataset.hpp"
#include "dvit/detector.hpp"
#include "dvit/errors.hpp"
#include "dvit/image.hpp"
#include "dvit/keyvalue.hpp"
#include "dvit/metrics.hpp"
#include "dvit/png_io.hpp"
#include "dvit/train.hpp"
#include "dvit/vit.hpp"

namespace fs = std::filesystem;

namespace dvit::cli {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Artifacts are written into a hidden staging directory and moved into the
// output directory only when the command succeeds.
class ArtifactStage {
 public:
  explicit ArtifactStage(fs::path out) : out_(std::move(out)) {
    fs::create_directories(out_);
    std::random_device rd;
    staging_ = out_ / (".staging-" + std::to_string(rd()));
    fs::create_directories(staging_);
  }
  ~ArtifactStage() {
    std::error_code ec;
    fs::remove_all(staging_, ec);
  }
  ArtifactStage(const ArtifactStage&) = delete;
  ArtifactStage& operator=(const ArtifactStage&) = delete;

  fs::path path(const std::string& name) {
    names_.push_back(name);
    const fs::path p = staging_ / name;
    fs::create_directories(p.parent_path());
    return p;
  }
  void write(const std::string& name, std::string_view content) { write_file_atomic(path(name), content); }

  /// Writes the run manifest, then moves everything into place.
  void commit(KeyValues manifest) {
    for (const std::string& name : names_) manifest["artifact." + name] = file_digest(staging_ / name);
    write_file_atomic(staging_ / "run_manifest.txt", format_key_values(manifest));
    names_.push_back("run_manifest.txt");
    for (const std::string& name : names_) {
      const fs::path target = out_ / name;
      fs::create_directories(target.parent_path());
      fs::rename(staging_ / name, target);
    }
  }

 private:
  fs::path out_;
  fs::path staging_;
  std::vector<std::string> names_;
};

std::uint64_t default_seed() {
  const char* env = std::getenv(kSeedEnv);
  if (env == nullptr || *env == '\0') return 0;
  try {
    const long long v = parse_int(env, kSeedEnv);
    if (v < 0) throw ContractError("negative");
    return static_cast<std::uint64_t>(v);
  } catch (const Error&) {
    throw UsageError(std::string(kSeedEnv) + " must be a non-negative integer, got '" + env + "'");
  }
}

struct ModelFlags {
  std::string config_path;
  std::string preset = "default";
  std::vector<std::string> overrides;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
    app->add_option("--preset", preset, "base configuration")
        ->check(CLI::IsMember({"default", "tiny"}))
        ->capture_default_str();
    app->add_option("--set", overrides, "configuration override key=value (repeatable)");
    app->add_option("--epochs", epochs, "override num_epochs");
    app->add_option("--batch-size", batch_size, "override batch_size");
  }

  VitConfig resolve() const {
    VitConfig config = preset == "tiny" ? VitConfig::tiny() : VitConfig{};
    if (!config_path.empty()) config = VitConfig::from_key_values(read_key_values(config_path), config);
    std::string text;
    for (const std::string& s : overrides) text += s + '\n';
    config = VitConfig::from_key_values(parse_key_values(text), config);
    if (epochs) config.epochs = *epochs;
    if (batch_size) config.batch_size = *batch_size;
    config.validate();
    return config;
  }
};

KeyValues base_manifest(const std::string& command, std::uint64_t seed, const VitConfig* config) {
  KeyValues kv;
  kv["command"] = command;
  kv["seed"] = std::to_string(seed);
  if (config != nullptr)
    for (const auto& [k, v] : config->to_key_values()) kv["config." + k] = v;
  return kv;
}

void set_stats_from(VitConfig& config, const DatasetManifest& manifest, const Dataset& frames) {
  if (manifest.stats.mean.size() == config.channels()) {
    config.channel_mean = manifest.stats.mean;
    config.channel_std = manifest.stats.std;
    return;
  }
  std::vector<ImageFrame> unit;
  for (const auto& f : frames) unit.push_back(f.frame);
  const ChannelStats stats = compute_channel_stats(unit);
  config.channel_mean = stats.mean;
  config.channel_std = stats.std;
}

ImageFrame load_unit_frame(const fs::path& path, std::size_t channels) {
  const ImageFrame raw = convert_channels(read_png(path), channels);
  const std::vector<double> zero(channels, 0.0), one(channels, 1.0);
  return normalize_frame(raw, zero, one);
}

// ---- train ---------------------------------------------------------------

struct TrainArgs {
  std::string data, out, split = "80-20";
  std::optional<std::uint64_t> seed;
  bool no_augment = false, subject_disjoint = false;
  ModelFlags model;
};

int cmd_train(const TrainArgs& a, std::uint64_t seed, std::ostream& out) {
  VitConfig config = a.model.resolve();
  const DatasetManifest manifest = ingest_directory(a.data);
  SplitSpec spec = SplitSpec::preset(a.split, seed);
  spec.subject_disjoint = a.subject_disjoint;
  const SplitResult split = make_splits(manifest.samples, spec);
  const Dataset all = load_frames(manifest.samples, config);
  set_stats_from(config, manifest, all);

  TrainOptions options;
  options.augment = !a.no_augment;
  options.on_epoch = [&out](const EpochStats& e, const VitModel&) {
    out << "epoch " << e.epoch << " train_loss=" << format_fixed(e.train_loss) << " train_acc="
        << format_fixed(e.train_accuracy) << " val_loss=" << format_fixed(e.val_loss)
        << " val_acc=" << format_fixed(e.val_accuracy) << '\n';
    return true;
  };
  const TrainRun run = train(select(all, split.train), select(all, split.validation), config, seed, options);

  ArtifactStage stage(a.out);
  save_checkpoint(*run.best_model, stage.path("checkpoint.vgvt"));
  stage.write("curves.csv", run.curves_csv());
  std::string assignment = "path,label,split\n";
  const auto list = [&](const std::vector<std::size_t>& idx, const char* name) {
    for (std::size_t i : idx) {
      const Sample& s = manifest.samples[i];
      assignment += s.path.lexically_relative(manifest.root).generic_string() + ',' +
                    std::string(to_string(s.label)) + ',' + name + '\n';
    }
  };
  list(split.train, "train");
  list(split.validation, "validation");
  stage.write("split.csv", assignment);
  stage.write("manifest.csv", manifest.to_csv());
  KeyValues m = base_manifest("train", seed, &config);
  m["input.data"] = fs::absolute(a.data).generic_string();
  m["split"] = spec.name();
  m["best_epoch"] = std::to_string(run.best_epoch);
  m["best_val_accuracy"] = format_fixed(run.best_val_accuracy);
  stage.commit(std::move(m));
  out << "best epoch " << run.best_epoch << " val_acc=" << format_fixed(run.best_val_accuracy) << '\n';
  return kOk;
}

// ---- eval ----------------------------------------------------------------

struct EvalArgs {
  std::string data, ckpt, out;
};

int cmd_eval(const EvalArgs& a, std::uint64_t seed, std::ostream& out) {
  const VitModel model = load_checkpoint(a.ckpt);
  const DatasetManifest manifest = ingest_directory(a.data);
  const Dataset data = load_frames(manifest.samples, model.config());
  const Evaluation ev = evaluate_dataset(model, data);
  const MetricsReport report = evaluate_metrics(ev.predictions, ev.labels, ev.probabilities);
  out << report.to_text();

  bool tagged = false;
  for (const Sample& s : manifest.samples)
    tagged = tagged || s.scenario != Scenario::Unknown || s.time != TimeOfDay::Unknown;
  std::optional<ScenarioTable> table;
  if (tagged) {
    table = scenario_breakdown(ev.predictions, manifest.samples);
    out << '\n' << table->to_text();
  }
  if (!a.out.empty()) {
    ArtifactStage stage(a.out);
    stage.write("metrics.txt", format_key_values(report.to_key_values()));
    if (table) stage.write("scenario_table.csv", table->to_csv());
    std::string preds = "path,label,predicted,p_drowsy,p_vigilant\n";
    for (std::size_t i = 0; i < data.size(); ++i)
      preds += manifest.samples[i].path.lexically_relative(manifest.root).generic_string() + ',' +
               std::string(to_string(ev.labels[i])) + ',' + std::string(to_string(ev.predictions[i])) + ',' +
               format_fixed(ev.probabilities[i][0]) + ',' + format_fixed(ev.probabilities[i][1]) + '\n';
    stage.write("predictions.csv", preds);
    KeyValues m = base_manifest("eval", seed, &model.config());
    m["input.data"] = fs::absolute(a.data).generic_string();
    m["input.checkpoint"] = file_digest(a.ckpt);
    stage.commit(std::move(m));
  }
  return kOk;
}

// ---- infer ---------------------------------------------------------------

struct InferArgs {
  std::string image, ckpt, out;
};

int cmd_infer(const InferArgs& a, std::uint64_t seed, std::ostream& out) {
  const VitModel model = load_checkpoint(a.ckpt);
  const VitConfig& c = model.config();
  const ImageFrame frame = preprocess(c, convert_channels(read_png(a.image), c.channels()));
  const auto p = forward_classify(model, frame);
  const Label label = predict_label({p[0], p[1]});
  const std::string line = std::string(to_string(label)) + " p=" + format_fixed(p[static_cast<std::size_t>(label)]);
  const std::string detail = "p_drowsy=" + format_fixed(p[0]) + " p_vigilant=" + format_fixed(p[1]);
  out << line << '\n' << detail << '\n';
  if (!a.out.empty()) {
    ArtifactStage stage(a.out);
    stage.write("prediction.txt", line + '\n' + detail + '\n');
    KeyValues m = base_manifest("infer", seed, &c);
    m["input.image"] = file_digest(a.image);
    m["input.checkpoint"] = file_digest(a.ckpt);
    stage.commit(std::move(m));
  }
  return kOk;
}

// ---- detect-crop ---------------------------------------------------------

struct DetectArgs {
  std::string frames, dets, out;
  double conf = kDefaultConfidenceThreshold;
  double iou = kDefaultNmsIouThreshold;
  double margin = kDefaultCropMargin;
};

fs::path resolve_frame(const fs::path& dir, const std::string& id) {
  const fs::path direct = dir / id;
  if (fs::is_regular_file(direct)) return direct;
  const fs::path with_ext = dir / (id + ".png");
  if (fs::is_regular_file(with_ext)) return with_ext;
  throw IoError("detect-crop: no frame '" + id + "' in " + dir.string());
}

int cmd_detect(const DetectArgs& a, std::uint64_t seed, std::ostream& out) {
  if (!(a.conf >= 0.0 && a.conf <= 1.0)) throw RangeError("detect-crop: --conf must lie in [0, 1]");
  if (!(a.iou >= 0.0 && a.iou <= 1.0)) throw RangeError("detect-crop: --iou must lie in [0, 1]");
  if (!(a.margin >= 0.0)) throw RangeError("detect-crop: --margin must be >= 0");
  const auto detections = read_detections(a.dets);
  std::map<std::string, std::vector<BoundingBox>> by_image;
  for (const Detection& d : detections) by_image[d.image_id].push_back(d.box);

  ArtifactStage stage(a.out);
  std::string index = "image,crop,cx,cy,w,h,confidence,x0,y0,x1,y1,file\n";
  std::size_t total = 0;
  for (const auto& [id, boxes] : by_image) {
    const auto kept = non_max_suppression(boxes, a.iou, a.conf);
    if (kept.empty()) continue;
    const ImageFrame frame = read_png(resolve_frame(a.frames, id));
    const std::string stem = fs::path(id).stem().string();
    for (std::size_t k = 0; k < kept.size(); ++k) {
      const BoundingBox& b = kept[k];
      const PixelRect r = roi_rect(frame.height(), frame.width(), b, a.margin);
      const std::string name = "crops/" + stem + "_" + std::to_string(k) + ".png";
      write_png(stage.path(name), crop_roi(frame, b, a.margin));
      index += id + ',' + std::to_string(k) + ',' + format_fixed(b.cx) + ',' + format_fixed(b.cy) + ',' +
               format_fixed(b.w) + ',' + format_fixed(b.h) + ',' + format_fixed(b.confidence) + ',' +
               std::to_string(r.x0) + ',' + std::to_string(r.y0) + ',' + std::to_string(r.x1) + ',' +
               std::to_string(r.y1) + ',' + name + '\n';
      ++total;
    }
  }
  stage.write("crops.csv", index);
  KeyValues m = base_manifest("detect-crop", seed, nullptr);
  m["conf"] = format_double(a.conf);
  m["iou"] = format_double(a.iou);
  m["margin"] = format_double(a.margin);
  m["input.detections"] = file_digest(a.dets);
  stage.commit(std::move(m));
  out << total << " crop(s) from " << detections.size() << " detection(s)\n";
  return kOk;
}

// ---- augment-preview -----------------------------------------------------

struct AugmentArgs {
  std::string image, out;
  std::size_t count = 8;
  AugmentationPolicy policy;
  std::vector<double> brightness;
};

int cmd_augment(AugmentArgs a, std::uint64_t seed, std::ostream& out) {
  if (!a.brightness.empty()) {
    if (a.brightness.size() != 2) throw RangeError("augment-preview: --brightness takes two values");
    a.policy.brightness_range = {a.brightness[0], a.brightness[1]};
  }
  a.policy.validate();
  const ImageFrame raw = read_png(a.image);
  const std::vector<double> zero(raw.channels(), 0.0), one(raw.channels(), 1.0);
  const ImageFrame unit = normalize_frame(raw, zero, one);
  const SeededGenerator root(seed);
  ArtifactStage stage(a.out);
  std::string trace_csv = "index,flipped,angle,scale,brightness,file\n";
  for (std::size_t i = 0; i < a.count; ++i) {
    SeededGenerator rng = root.derive(i);
    AugmentationTrace trace;
    const ImageFrame aug = apply_augmentation(unit, a.policy, rng, &trace);
    char name[32];
    std::snprintf(name, sizeof name, "aug_%03zu.png", i);
    write_png(stage.path(name), aug, 255.0);
    trace_csv += std::to_string(i) + ',' + (trace.flipped ? "1" : "0") + ',' + format_double(trace.angle) + ',' +
                 format_double(trace.scale) + ',' + format_double(trace.brightness) + ',' + name + '\n';
  }
  stage.write("augmentations.csv", trace_csv);
  KeyValues m = base_manifest("augment-preview", seed, nullptr);
  m["input.image"] = file_digest(a.image);
  m["count"] = std::to_string(a.count);
  stage.commit(std::move(m));
  out << a.count << " variant(s) written to " << a.out << '\n';
  return kOk;
}

// ---- split-experiment ----------------------------------------------------

struct SplitArgs {
  std::string data, out, test;
  std::vector<std::string> presets{kSplitPresets.begin(), kSplitPresets.end()};
  bool no_augment = false;
  ModelFlags model;
};

int cmd_split(const SplitArgs& a, std::uint64_t seed, std::ostream& out) {
  VitConfig config = a.model.resolve();
  const DatasetManifest manifest = ingest_directory(a.data);
  const Dataset all = load_frames(manifest.samples, config);
  set_stats_from(config, manifest, all);
  std::optional<Dataset> test;
  if (!a.test.empty()) test = load_frames(ingest_directory(a.test).samples, config);
  TrainOptions options;
  options.augment = !a.no_augment;
  const SplitReport report = split_experiment(all, config, a.presets, seed, options, test ? &*test : nullptr);
  out << report.to_text();
  ArtifactStage stage(a.out);
  stage.write("splits.csv", report.to_csv());
  KeyValues m = base_manifest("split-experiment", seed, &config);
  m["input.data"] = fs::absolute(a.data).generic_string();
  if (!a.test.empty()) m["input.test"] = fs::absolute(a.test).generic_string();
  stage.commit(std::move(m));
  return kOk;
}

// ---- patch-dump ----------------------------------------------------------

struct PatchArgs {
  std::string image, ckpt, out;
  ModelFlags model;
};

int cmd_patch(const PatchArgs& a, std::uint64_t seed, std::ostream& out) {
  std::optional<VitModel> model;
  if (!a.ckpt.empty()) {
    model = load_checkpoint(a.ckpt);
  } else {
    SeededGenerator rng(seed);
    model = VitModel::initialize(a.model.resolve(), rng);
  }
  const VitConfig& c = model->config();
  const ImageFrame unit =
      resize_bilinear(load_unit_frame(a.image, c.channels()), c.height(), c.width());
  const PatchSequence raw_patches = patchify(unit, c.patch_size);
  const std::size_t grid = c.width() / c.patch_size;

  std::string patches = "patch,grid_row,grid_col";
  for (std::size_t e = 0; e < raw_patches.elements_per_patch; ++e) patches += ",v" + std::to_string(e);
  patches += '\n';
  for (std::size_t p = 0; p < raw_patches.count; ++p) {
    patches += std::to_string(p) + ',' + std::to_string(p / grid) + ',' + std::to_string(p % grid);
    for (std::size_t e = 0; e < raw_patches.elements_per_patch; ++e)
      patches += ',' + format_fixed(raw_patches.rows.at(p, e), 6);
    patches += '\n';
  }

  std::vector<std::vector<AttentionState>> states;
  ForwardOptions opts;
  opts.attention = &states;
  forward_logits(*model, patchify(standardize_for_model(c, unit), c.patch_size), opts);
  // Token 0 is the class token; token t > 0 is patch t - 1.
  std::string attention = "layer,head,query,key,weight\n";
  for (std::size_t l = 0; l < states.size(); ++l)
    for (std::size_t h = 0; h < states[l].size(); ++h) {
      const Tensor& w = states[l][h].weights;
      for (std::size_t q = 0; q < w.rows(); ++q)
        for (std::size_t k = 0; k < w.cols(); ++k)
          attention += std::to_string(l) + ',' + std::to_string(h) + ',' + std::to_string(q) + ',' +
                       std::to_string(k) + ',' + format_double(w.at(q, k)) + '\n';
    }

  ArtifactStage stage(a.out);
  stage.write("patches.csv", patches);
  stage.write("attention.csv", attention);
  KeyValues m = base_manifest("patch-dump", seed, &c);
  m["input.image"] = file_digest(a.image);
  if (!a.ckpt.empty()) m["input.checkpoint"] = file_digest(a.ckpt);
  stage.commit(std::move(m));
  out << raw_patches.count << " patches of " << raw_patches.elements_per_patch << " values, " << states.size()
      << " layer(s) of attention\n";
  return kOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Drowsiness detection with a vision transformer", "dvit"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed_flag;
  const auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", seed_flag, std::string("random seed (default: $") + kSeedEnv + " or 0)");
  };

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train a model on a dataset directory");
  train_cmd->add_option("--data", train_args.data, "dataset root")->required()->check(CLI::ExistingDirectory);
  train_cmd->add_option("--out", train_args.out, "output directory")->required();
  train_cmd->add_option("--split", train_args.split, "train-validation split")->capture_default_str();
  train_cmd->add_flag("--no-augment", train_args.no_augment, "disable training augmentation");
  train_cmd->add_flag("--subject-disjoint", train_args.subject_disjoint, "keep subjects on one side of the split");
  train_args.model.attach(train_cmd);
  add_seed(train_cmd);

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset directory");
  eval_cmd->add_option("--data", eval_args.data, "dataset root")->required()->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--ckpt", eval_args.ckpt, "checkpoint file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval_args.out, "output directory for reports");
  add_seed(eval_cmd);

  InferArgs infer_args;
  auto* infer_cmd = app.add_subcommand("infer", "classify one image");
  infer_cmd->add_option("image", infer_args.image, "PNG image")->required()->check(CLI::ExistingFile);
  infer_cmd->add_option("--ckpt", infer_args.ckpt, "checkpoint file")->required()->check(CLI::ExistingFile);
  infer_cmd->add_option("--out", infer_args.out, "output directory");
  add_seed(infer_cmd);

  DetectArgs detect_args;
  auto* detect_cmd = app.add_subcommand("detect-crop", "crop faces from detector output after NMS");
  detect_cmd->add_option("--frames", detect_args.frames, "frame directory")->required()->check(CLI::ExistingDirectory);
  detect_cmd->add_option("--dets", detect_args.dets, "detections: image_id cx cy w h confidence")
      ->required()
      ->check(CLI::ExistingFile);
  detect_cmd->add_option("--out", detect_args.out, "output directory")->required();
  detect_cmd->add_option("--conf", detect_args.conf, "minimum confidence")->capture_default_str();
  detect_cmd->add_option("--iou", detect_args.iou, "NMS overlap threshold")->capture_default_str();
  detect_cmd->add_option("--margin", detect_args.margin, "crop margin per side, fraction of box")
      ->capture_default_str();
  add_seed(detect_cmd);

  AugmentArgs aug_args;
  auto* aug_cmd = app.add_subcommand("augment-preview", "write augmented variants of an image");
  aug_cmd->add_option("image", aug_args.image, "PNG image")->required()->check(CLI::ExistingFile);
  aug_cmd->add_option("--out", aug_args.out, "output directory")->required();
  aug_cmd->add_option("--count", aug_args.count, "number of variants")->capture_default_str();
  aug_cmd->add_option("--flip", aug_args.policy.flip_probability, "horizontal flip probability")
      ->capture_default_str();
  aug_cmd->add_option("--rotation", aug_args.policy.rotation_factor, "rotation factor (fraction of 2 pi)")
      ->capture_default_str();
  aug_cmd->add_option("--zoom", aug_args.policy.zoom_factor, "zoom factor")->capture_default_str();
  aug_cmd->add_option("--brightness", aug_args.brightness, "brightness range LOW HIGH")->expected(2);
  add_seed(aug_cmd);

  SplitArgs split_args;
  auto* split_cmd = app.add_subcommand("split-experiment", "train once per split preset");
  split_cmd->add_option("--data", split_args.data, "dataset root")->required()->check(CLI::ExistingDirectory);
  split_cmd->add_option("--out", split_args.out, "output directory")->required();
  split_cmd->add_option("--test", split_args.test, "held-out test dataset root")->check(CLI::ExistingDirectory);
  split_cmd->add_option("--presets", split_args.presets, "split presets")->delimiter(',')->capture_default_str();
  split_cmd->add_flag("--no-augment", split_args.no_augment, "disable training augmentation");
  split_args.model.attach(split_cmd);
  add_seed(split_cmd);

  PatchArgs patch_args;
  auto* patch_cmd = app.add_subcommand("patch-dump", "dump patches and attention weights as CSV");
  patch_cmd->add_option("image", patch_args.image, "PNG image")->required()->check(CLI::ExistingFile);
  patch_cmd->add_option("--ckpt", patch_args.ckpt, "checkpoint (default: freshly initialised model)")
      ->check(CLI::ExistingFile);
  patch_cmd->add_option("--out", patch_args.out, "output directory")->required();
  patch_args.model.attach(patch_cmd);
  add_seed(patch_cmd);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* failing = &app;
    for (CLI::App* sub : app.get_subcommands()) failing = sub;
    err << failing->help();
    return kUsage;
  }

  try {
    const std::uint64_t seed = seed_flag ? *seed_flag : default_seed();
    if (*train_cmd) return cmd_train(train_args, seed, out);
    if (*eval_cmd) return cmd_eval(eval_args, seed, out);
    if (*infer_cmd) return cmd_infer(infer_args, seed, out);
    if (*detect_cmd) return cmd_detect(detect_args, seed, out);
    if (*aug_cmd) return cmd_augment(aug_args, seed, out);
    if (*split_cmd) return cmd_split(split_args, seed, out);
    if (*patch_cmd) return cmd_patch(patch_args, seed, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDomain;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kDomain;
  }
  err << app.help();
  return kUsage;
}

}  // namespace dvit::cli
