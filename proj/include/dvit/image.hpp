#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "dvit/rng.hpp"

namespace dvit {

/// H x W x C raster, row-major with interleaved channels.
///
/// Value ranges by pipeline stage: [0, 255] as decoded, [0, 1] after
/// normalize_frame with zero mean and unit std, arbitrary after standardize.
class ImageFrame {
 public:
  ImageFrame() = default;
  ImageFrame(std::size_t height, std::size_t width, std::size_t channels, double fill = 0.0);
  ImageFrame(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> pixels);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t channels() const { return channels_; }
  bool empty() const { return pixels_.empty(); }

  double& at(std::size_t y, std::size_t x, std::size_t c) { return pixels_[(y * width_ + x) * channels_ + c]; }
  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return pixels_[(y * width_ + x) * channels_ + c];
  }

  std::span<const double> pixels() const { return pixels_; }
  std::span<double> pixels() { return pixels_; }

  bool operator==(const ImageFrame&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> pixels_;
};

struct ChannelStats {
  std::vector<double> mean;
  std::vector<double> std;
};

/// Bilinear resampling with half-pixel centres and edge clamping.
ImageFrame resize_bilinear(const ImageFrame& frame, std::size_t height, std::size_t width);

/// v -> (v / 255 - mean_c) / std_c. With mean 0 and std 1 this maps raw
/// [0, 255] pixels to [0, 1].
ImageFrame normalize_frame(const ImageFrame& frame, std::span<const double> mean, std::span<const double> std);

/// v -> (v - mean_c) / std_c on frames already scaled to [0, 1].
ImageFrame standardize(const ImageFrame& frame, const ChannelStats& stats);

/// Per-channel mean and population std over every pixel of every frame.
ChannelStats compute_channel_stats(std::span<const ImageFrame> frames);

ImageFrame flip_horizontal(const ImageFrame& frame);
/// Rotation by `radians` (counter-clockwise) about the image centre.
/// Samples falling outside the source are filled with 0.
ImageFrame rotate(const ImageFrame& frame, double radians);
/// Scale about the centre; scale > 1 magnifies. Out-of-bounds fill is 0.
ImageFrame zoom(const ImageFrame& frame, double scale);
ImageFrame adjust_brightness(const ImageFrame& frame, double factor);
ImageFrame clamp_unit(const ImageFrame& frame);

struct AugmentationPolicy {
  double flip_probability = 0.5;
  /// Fraction of a full turn; angles are drawn from +-factor * 2 pi.
  double rotation_factor = 0.01;
  /// Scales are drawn from [1 - factor, 1 + factor].
  double zoom_factor = 0.2;
  std::array<double, 2> brightness_range{0.2, 1.0};

  /// Throws ContractError when a field is out of range.
  void validate() const;
  /// Policy that draws no transformation at all.
  static AugmentationPolicy neutral();
};

/// The random draws behind one apply_augmentation call.
struct AugmentationTrace {
  bool flipped = false;
  double angle = 0.0;
  double scale = 1.0;
  double brightness = 1.0;
};

/// Horizontal flip, rotation, zoom, brightness, then clamp to [0, 1], in that
/// order. Input must already be in [0, 1]. Deterministic for a given
/// generator state.
ImageFrame apply_augmentation(const ImageFrame& frame, const AugmentationPolicy& policy, SeededGenerator& rng,
                              AugmentationTrace* trace = nullptr);

}  // namespace dvit
