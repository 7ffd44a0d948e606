#pragma once

// Dataset ingestion, frame sampling and train/validation splitting.
//
// On-disk layout:
//   root/drowsy/*.png
//   root/vigilant/*.png
//   root/meta.csv            optional, header `path,subject,scenario,time`,
//                            paths relative to root

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dvit/image.hpp"
#include "dvit/vit.hpp"

namespace dvit {

/// Drowsy is the positive class; its value is also its logit index.
enum class Label : std::size_t { Drowsy = 0, Vigilant = 1 };
enum class Scenario { BareFace, Spectacles, Sunglasses, Other, Unknown };
enum class TimeOfDay { Day, Evening, Night, Unknown };

inline constexpr std::array<Label, 2> kLabels{Label::Drowsy, Label::Vigilant};

std::string_view to_string(Label label);
std::string_view to_string(Scenario scenario);
std::string_view to_string(TimeOfDay time);
std::optional<Label> parse_label(std::string_view s);
std::optional<Scenario> parse_scenario(std::string_view s);
std::optional<TimeOfDay> parse_time(std::string_view s);

struct Sample {
  std::filesystem::path path;
  Label label = Label::Drowsy;
  std::string subject = "unknown";
  Scenario scenario = Scenario::Unknown;
  TimeOfDay time = TimeOfDay::Unknown;
};

struct DatasetManifest {
  std::filesystem::path root;
  std::vector<Sample> samples;
  std::array<std::size_t, 2> class_counts{0, 0};
  /// Per-channel statistics over every ingested pixel scaled to [0, 1].
  ChannelStats stats;

  std::size_t count(Label label) const { return class_counts[static_cast<std::size_t>(label)]; }
  /// `path,label,subject,scenario,time`, paths relative to root.
  std::string to_csv() const;
};

/// Builds a manifest from the layout above, decoding every image once.
/// Throws IngestionError for a missing or empty class directory (naming the
/// class) and for undecodable files (listing every failing path).
DatasetManifest ingest_directory(const std::filesystem::path& root);

/// Indices phase, phase + stride, ... below `count`.
std::vector<std::size_t> stride_indices(std::size_t count, std::size_t stride, std::size_t phase);
/// Stride sampling over the files of `frame_dir` in name order, with the
/// phase drawn uniformly from [0, stride) by a generator seeded with `seed`.
std::vector<std::filesystem::path> sample_frames(const std::filesystem::path& frame_dir, std::size_t stride,
                                                 std::uint64_t seed);

struct SplitSpec {
  double train_fraction = 0.8;
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;
  bool stratified = true;
  /// Keeps every subject on one side of the split.
  bool subject_disjoint = false;

  std::string name() const;
  /// "80-20" style preset.
  static SplitSpec preset(std::string_view name, std::uint64_t seed = 0);
};

inline constexpr std::array<std::string_view, 4> kSplitPresets{"80-20", "70-30", "60-40", "50-50"};

struct SplitResult {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Seeded, disjoint split of sample indices. Per-class sizes are
/// round(fraction * class count) when stratified, round(fraction * total)
/// otherwise.
SplitResult make_splits(std::span<const Sample> samples, const SplitSpec& spec);

/// Seeded Fisher-Yates shuffle, identical on every platform.
void shuffle_indices(std::vector<std::size_t>& indices, SeededGenerator& rng);

/// A decoded sample: frame scaled to [0, 1] at model resolution.
struct LabeledFrame {
  ImageFrame frame;
  Label label = Label::Drowsy;
  Sample sample;
};
using Dataset = std::vector<LabeledFrame>;

/// Replicates gray to RGB or averages RGB to gray as needed.
ImageFrame convert_channels(const ImageFrame& frame, std::size_t channels);

/// Decodes, scales to [0, 1] and resizes each sample for `config`.
Dataset load_frames(std::span<const Sample> samples, const VitConfig& config);
Dataset select(const Dataset& data, std::span<const std::size_t> indices);

}  // namespace dvit
