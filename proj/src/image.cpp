#include "dvit/image.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dvit/errors.hpp"

namespace dvit {

ImageFrame::ImageFrame(std::size_t height, std::size_t width, std::size_t channels, double fill)
    : ImageFrame(height, width, channels, std::vector<double>(height * width * channels, fill)) {}

ImageFrame::ImageFrame(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> pixels)
    : height_(height), width_(width), channels_(channels), pixels_(std::move(pixels)) {
  if (height == 0 || width == 0 || channels == 0)
    throw ContractError("ImageFrame: extents must be positive");
  if (pixels_.size() != height * width * channels)
    throw ContractError("ImageFrame: expected " + std::to_string(height * width * channels) + " values, got " +
                        std::to_string(pixels_.size()));
}

namespace {

// Bilinear sample at index-space coordinates (pixel centres at integers),
// coordinates already clamped to the valid range. Lerp form keeps constant
// regions exact.
double bilinear(const ImageFrame& f, double sy, double sx, std::size_t c) {
  const std::size_t y0 = static_cast<std::size_t>(std::floor(sy));
  const std::size_t x0 = static_cast<std::size_t>(std::floor(sx));
  const std::size_t y1 = std::min(y0 + 1, f.height() - 1);
  const std::size_t x1 = std::min(x0 + 1, f.width() - 1);
  const double fy = sy - static_cast<double>(y0);
  const double fx = sx - static_cast<double>(x0);
  const double v00 = f.at(y0, x0, c), v01 = f.at(y0, x1, c);
  const double v10 = f.at(y1, x0, c), v11 = f.at(y1, x1, c);
  const double top = v00 + fx * (v01 - v00);
  const double bottom = v10 + fx * (v11 - v10);
  return top + fy * (bottom - top);
}

double clampd(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// Inverse-mapped warp: `source(y, x)` gives the index-space source point of an
// output pixel. Points outside the source extent read as 0.
template <class Map>
ImageFrame warp(const ImageFrame& frame, Map source) {
  ImageFrame out(frame.height(), frame.width(), frame.channels(), 0.0);
  const double h = static_cast<double>(frame.height());
  const double w = static_cast<double>(frame.width());
  for (std::size_t y = 0; y < frame.height(); ++y) {
    for (std::size_t x = 0; x < frame.width(); ++x) {
      const auto [sy, sx] = source(static_cast<double>(y), static_cast<double>(x));
      if (sy < -0.5 || sy > h - 0.5 || sx < -0.5 || sx > w - 0.5) continue;
      const double cy = clampd(sy, 0.0, h - 1.0);
      const double cx = clampd(sx, 0.0, w - 1.0);
      for (std::size_t c = 0; c < frame.channels(); ++c) out.at(y, x, c) = bilinear(frame, cy, cx, c);
    }
  }
  return out;
}

double channel_value(std::span<const double> v, std::size_t c, const char* what) {
  if (v.size() == 1) return v[0];
  if (c >= v.size()) throw ContractError(std::string(what) + ": one value per channel required");
  return v[c];
}

}  // namespace

ImageFrame resize_bilinear(const ImageFrame& frame, std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) throw ContractError("resize_bilinear: target extents must be >= 1");
  if (frame.empty()) throw ContractError("resize_bilinear: empty frame");
  if (height == frame.height() && width == frame.width()) return frame;
  ImageFrame out(height, width, frame.channels());
  const double ry = static_cast<double>(frame.height()) / static_cast<double>(height);
  const double rx = static_cast<double>(frame.width()) / static_cast<double>(width);
  const double max_y = static_cast<double>(frame.height() - 1);
  const double max_x = static_cast<double>(frame.width() - 1);
  for (std::size_t y = 0; y < height; ++y) {
    const double sy = clampd((static_cast<double>(y) + 0.5) * ry - 0.5, 0.0, max_y);
    for (std::size_t x = 0; x < width; ++x) {
      const double sx = clampd((static_cast<double>(x) + 0.5) * rx - 0.5, 0.0, max_x);
      for (std::size_t c = 0; c < frame.channels(); ++c) out.at(y, x, c) = bilinear(frame, sy, sx, c);
    }
  }
  return out;
}

ImageFrame normalize_frame(const ImageFrame& frame, std::span<const double> mean, std::span<const double> std) {
  for (std::size_t c = 0; c < frame.channels(); ++c)
    if (channel_value(std, c, "normalize_frame") == 0.0)
      throw ContractError("normalize_frame: std of channel " + std::to_string(c) + " is zero");
  ImageFrame out = frame;
  auto px = out.pixels();
  const std::size_t channels = frame.channels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (px[i] < 0.0 || px[i] > 255.0)
      throw ContractError("normalize_frame: raw pixel outside [0, 255]");
    const std::size_t c = i % channels;
    px[i] = (px[i] / 255.0 - channel_value(mean, c, "normalize_frame")) / channel_value(std, c, "normalize_frame");
  }
  return out;
}

ImageFrame standardize(const ImageFrame& frame, const ChannelStats& stats) {
  ImageFrame out = frame;
  auto px = out.pixels();
  const std::size_t channels = frame.channels();
  for (std::size_t c = 0; c < channels; ++c)
    if (channel_value(stats.std, c, "standardize") == 0.0)
      throw ContractError("standardize: std of channel " + std::to_string(c) + " is zero");
  for (std::size_t i = 0; i < px.size(); ++i) {
    const std::size_t c = i % channels;
    px[i] = (px[i] - channel_value(stats.mean, c, "standardize")) / channel_value(stats.std, c, "standardize");
  }
  return out;
}

ChannelStats compute_channel_stats(std::span<const ImageFrame> frames) {
  if (frames.empty()) throw ContractError("compute_channel_stats: no frames");
  const std::size_t channels = frames.front().channels();
  std::vector<double> sum(channels, 0.0);
  std::vector<double> count(channels, 0.0);
  for (const ImageFrame& f : frames) {
    if (f.channels() != channels) throw ContractError("compute_channel_stats: mixed channel counts");
    const auto px = f.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
      sum[i % channels] += px[i];
      count[i % channels] += 1.0;
    }
  }
  ChannelStats stats;
  stats.mean.resize(channels);
  for (std::size_t c = 0; c < channels; ++c) stats.mean[c] = sum[c] / count[c];
  // Second pass for the variance avoids cancellation.
  std::vector<double> sq(channels, 0.0);
  for (const ImageFrame& f : frames) {
    const auto px = f.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
      const double d = px[i] - stats.mean[i % channels];
      sq[i % channels] += d * d;
    }
  }
  stats.std.resize(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    const double s = std::sqrt(sq[c] / count[c]);
    stats.std[c] = s > 0.0 ? s : 1.0;
  }
  return stats;
}

ImageFrame flip_horizontal(const ImageFrame& frame) {
  ImageFrame out = frame;
  const std::size_t w = frame.width();
  for (std::size_t y = 0; y < frame.height(); ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < frame.channels(); ++c) out.at(y, x, c) = frame.at(y, w - 1 - x, c);
  return out;
}

ImageFrame rotate(const ImageFrame& frame, double radians) {
  if (radians == 0.0) return frame;
  const double cy = (static_cast<double>(frame.height()) - 1.0) / 2.0;
  const double cx = (static_cast<double>(frame.width()) - 1.0) / 2.0;
  const double cs = std::cos(radians), sn = std::sin(radians);
  return warp(frame, [&](double y, double x) {
    const double dy = y - cy, dx = x - cx;
    return std::pair{cy + (-sn * dx + cs * dy), cx + (cs * dx + sn * dy)};
  });
}

ImageFrame zoom(const ImageFrame& frame, double scale) {
  if (!(scale > 0.0)) throw ContractError("zoom: scale must be positive");
  if (scale == 1.0) return frame;
  const double cy = (static_cast<double>(frame.height()) - 1.0) / 2.0;
  const double cx = (static_cast<double>(frame.width()) - 1.0) / 2.0;
  return warp(frame, [&](double y, double x) { return std::pair{cy + (y - cy) / scale, cx + (x - cx) / scale}; });
}

ImageFrame adjust_brightness(const ImageFrame& frame, double factor) {
  ImageFrame out = frame;
  for (double& v : out.pixels()) v *= factor;
  return out;
}

ImageFrame clamp_unit(const ImageFrame& frame) {
  ImageFrame out = frame;
  for (double& v : out.pixels()) v = clampd(v, 0.0, 1.0);
  return out;
}

void AugmentationPolicy::validate() const {
  if (!(flip_probability >= 0.0 && flip_probability <= 1.0))
    throw ContractError("augmentation: flip probability must lie in [0, 1]");
  if (!(rotation_factor >= 0.0)) throw ContractError("augmentation: rotation factor must be >= 0");
  if (!(zoom_factor >= 0.0 && zoom_factor < 1.0))
    throw ContractError("augmentation: zoom factor must lie in [0, 1)");
  if (!(brightness_range[0] > 0.0 && brightness_range[0] <= brightness_range[1]))
    throw ContractError("augmentation: brightness range must satisfy 0 < low <= high");
}

AugmentationPolicy AugmentationPolicy::neutral() {
  AugmentationPolicy p;
  p.flip_probability = 0.0;
  p.rotation_factor = 0.0;
  p.zoom_factor = 0.0;
  p.brightness_range = {1.0, 1.0};
  return p;
}

ImageFrame apply_augmentation(const ImageFrame& frame, const AugmentationPolicy& policy, SeededGenerator& rng,
                              AugmentationTrace* trace) {
  policy.validate();
  constexpr double kTol = 1e-9;
  for (double v : frame.pixels())
    if (v < -kTol || v > 1.0 + kTol)
      throw ContractError("apply_augmentation: input must be normalized to [0, 1]");

  // Always four draws, so the stream position never depends on the policy.
  AugmentationTrace t;
  t.flipped = rng.uniform() < policy.flip_probability;
  t.angle = rng.uniform(-1.0, 1.0) * policy.rotation_factor * 2.0 * std::numbers::pi;
  t.scale = rng.uniform(1.0 - policy.zoom_factor, 1.0 + policy.zoom_factor);
  t.brightness = rng.uniform(policy.brightness_range[0], policy.brightness_range[1]);

  ImageFrame out = t.flipped ? flip_horizontal(frame) : frame;
  out = rotate(out, t.angle);
  out = zoom(out, t.scale);
  if (t.brightness != 1.0) out = adjust_brightness(out, t.brightness);
  out = clamp_unit(out);
  if (trace != nullptr) *trace = t;
  return out;
}

}  // namespace dvit
