#pragma once

// Detection geometry for face boxes produced by an external YOLO-style
// detector: grid responsibility, confidence targets, IOU, non-maximum
// suppression, and ROI cropping.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "dvit/image.hpp"

namespace dvit {

/// Box in normalised image coordinates: centre (cx, cy), extents (w, h).
struct BoundingBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  double confidence = 1.0;

  static BoundingBox from_corners(double x0, double y0, double x1, double y1, double confidence = 1.0);
  double x0() const { return cx - w / 2.0; }
  double y0() const { return cy - h / 2.0; }
  double x1() const { return cx + w / 2.0; }
  double y1() const { return cy + h / 2.0; }
  double area() const { return w * h; }

  bool operator==(const BoundingBox&) const = default;
};

struct GridSpec {
  std::size_t cells = 1;  // A, for an A x A grid
};

struct GridCell {
  std::size_t row = 0;
  std::size_t col = 0;
  bool operator==(const GridCell&) const = default;
};

/// Training target for one predicted box: confidence = responsible * IOU.
struct DetectionTarget {
  GridCell cell;
  int responsible = 0;
  double iou_with_truth = 0.0;
  double confidence = 0.0;
};

inline constexpr double kDefaultConfidenceThreshold = 0.75;
inline constexpr double kDefaultNmsIouThreshold = 0.45;
inline constexpr double kDefaultCropMargin = 0.10;

/// Intersection over union. Throws ContractError for a zero-area box.
double iou(const BoundingBox& a, const BoundingBox& b);

/// responsible * iou; responsible must be 0 or 1.
double grid_confidence(int responsible, double iou_value);

/// (floor(cy * A), floor(cx * A)), with centres at exactly 1.0 falling into
/// the last cell. Throws ContractError for centres outside [0, 1]^2.
GridCell assign_responsible_cell(const BoundingBox& truth, const GridSpec& grid);

/// Scores predictions against one ground-truth box. Only predictions in the
/// truth's responsible cell get responsible = 1.
struct CellPrediction {
  GridCell cell;
  BoundingBox box;
};
std::vector<DetectionTarget> build_targets(const BoundingBox& truth, const std::vector<CellPrediction>& predictions,
                                           const GridSpec& grid);

/// Drops boxes below `conf_threshold`, then greedily keeps the most
/// confident remaining box and suppresses boxes overlapping it by more than
/// `iou_threshold`. Ties in confidence keep input order. Output is in
/// keep order.
std::vector<BoundingBox> non_max_suppression(const std::vector<BoundingBox>& boxes,
                                             double iou_threshold = kDefaultNmsIouThreshold,
                                             double conf_threshold = kDefaultConfidenceThreshold);

/// Integer pixel rectangle [x0, x1) x [y0, y1).
struct PixelRect {
  std::size_t x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  std::size_t width() const { return x1 - x0; }
  std::size_t height() const { return y1 - y0; }
  bool operator==(const PixelRect&) const = default;
};

/// Box expanded by `margin * w` (and `margin * h`) on each side, scaled to
/// the frame, rounded to the nearest pixel edge, and clamped to the frame.
PixelRect roi_rect(std::size_t frame_height, std::size_t frame_width, const BoundingBox& box, double margin);

/// Crops `roi_rect(...)` out of the frame. Throws ContractError if the
/// clamped crop is empty.
ImageFrame crop_roi(const ImageFrame& frame, const BoundingBox& box, double margin = kDefaultCropMargin);

struct Detection {
  std::string image_id;
  BoundingBox box;
};

/// One detection per line: `image_id cx cy w h confidence`. Blank lines and
/// lines starting with '#' are skipped. ParseError names the offending line
/// for malformed input; RangeError for values outside their domain.
std::vector<Detection> parse_detections(std::string_view text);
std::vector<Detection> read_detections(const std::filesystem::path& path);

}  // namespace dvit
