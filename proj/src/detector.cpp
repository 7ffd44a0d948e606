#include "dvit/detector.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dvit/errors.hpp"
#include "dvit/keyvalue.hpp"

namespace dvit {

BoundingBox BoundingBox::from_corners(double x0, double y0, double x1, double y1, double confidence) {
  return BoundingBox{(x0 + x1) / 2.0, (y0 + y1) / 2.0, x1 - x0, y1 - y0, confidence};
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  if (!(a.w > 0.0 && a.h > 0.0) || !(b.w > 0.0 && b.h > 0.0)) throw ContractError("iou: zero-area box");
  const double iw = std::min(a.x1(), b.x1()) - std::max(a.x0(), b.x0());
  const double ih = std::min(a.y1(), b.y1()) - std::max(a.y0(), b.y0());
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double grid_confidence(int responsible, double iou_value) {
  if (responsible != 0 && responsible != 1) throw ContractError("grid_confidence: responsibility must be 0 or 1");
  if (!(iou_value >= 0.0 && iou_value <= 1.0)) throw ContractError("grid_confidence: IOU must lie in [0, 1]");
  return static_cast<double>(responsible) * iou_value;
}

GridCell assign_responsible_cell(const BoundingBox& truth, const GridSpec& grid) {
  if (grid.cells == 0) throw ContractError("assign_responsible_cell: grid must have at least one cell");
  if (!(truth.cx >= 0.0 && truth.cx <= 1.0 && truth.cy >= 0.0 && truth.cy <= 1.0))
    throw ContractError("assign_responsible_cell: centre outside [0, 1]^2");
  const double a = static_cast<double>(grid.cells);
  const auto index = [&](double v) {
    return std::min(static_cast<std::size_t>(std::floor(v * a)), grid.cells - 1);
  };
  return GridCell{index(truth.cy), index(truth.cx)};
}

std::vector<DetectionTarget> build_targets(const BoundingBox& truth, const std::vector<CellPrediction>& predictions,
                                           const GridSpec& grid) {
  const GridCell owner = assign_responsible_cell(truth, grid);
  std::vector<DetectionTarget> targets;
  targets.reserve(predictions.size());
  for (const auto& p : predictions) {
    if (p.cell.row >= grid.cells || p.cell.col >= grid.cells)
      throw ContractError("build_targets: prediction cell outside the grid");
    DetectionTarget t;
    t.cell = p.cell;
    t.responsible = p.cell == owner ? 1 : 0;
    t.iou_with_truth = iou(p.box, truth);
    t.confidence = grid_confidence(t.responsible, t.iou_with_truth);
    targets.push_back(t);
  }
  return targets;
}

std::vector<BoundingBox> non_max_suppression(const std::vector<BoundingBox>& boxes, double iou_threshold,
                                             double conf_threshold) {
  if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0) || !(conf_threshold >= 0.0 && conf_threshold <= 1.0))
    throw ContractError("non_max_suppression: thresholds must lie in [0, 1]");
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < boxes.size(); ++i)
    if (boxes[i].confidence >= conf_threshold) order.push_back(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return boxes[a].confidence > boxes[b].confidence; });
  std::vector<BoundingBox> kept;
  for (std::size_t i : order) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(),
                                        [&](const BoundingBox& k) { return iou(k, boxes[i]) > iou_threshold; });
    if (!suppressed) kept.push_back(boxes[i]);
  }
  return kept;
}

PixelRect roi_rect(std::size_t frame_height, std::size_t frame_width, const BoundingBox& box, double margin) {
  if (!(margin >= 0.0)) throw ContractError("crop_roi: margin must be non-negative");
  const double fw = static_cast<double>(frame_width), fh = static_cast<double>(frame_height);
  const auto edge = [](double v, double limit) {
    return static_cast<std::size_t>(std::clamp(std::round(v), 0.0, limit));
  };
  PixelRect r;
  r.x0 = edge((box.x0() - margin * box.w) * fw, fw);
  r.x1 = edge((box.x1() + margin * box.w) * fw, fw);
  r.y0 = edge((box.y0() - margin * box.h) * fh, fh);
  r.y1 = edge((box.y1() + margin * box.h) * fh, fh);
  return r;
}

ImageFrame crop_roi(const ImageFrame& frame, const BoundingBox& box, double margin) {
  if (frame.empty()) throw ContractError("crop_roi: empty frame");
  const PixelRect r = roi_rect(frame.height(), frame.width(), box, margin);
  if (r.x1 <= r.x0 || r.y1 <= r.y0) throw ContractError("crop_roi: crop is empty after clamping to the frame");
  ImageFrame out(r.height(), r.width(), frame.channels());
  for (std::size_t y = 0; y < r.height(); ++y)
    for (std::size_t x = 0; x < r.width(); ++x)
      for (std::size_t c = 0; c < frame.channels(); ++c) out.at(y, x, c) = frame.at(r.y0 + y, r.x0 + x, c);
  return out;
}

std::vector<Detection> parse_detections(std::string_view text) {
  std::vector<Detection> out;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string tok; fields >> tok;) tokens.push_back(tok);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    if (tokens.size() != 6)
      throw ParseError(line_no, "expected 'image_id cx cy w h confidence', got " + std::to_string(tokens.size()) +
                                    " fields");
    double v[5];
    for (int i = 0; i < 5; ++i) {
      const std::string& t = tokens[i + 1];
      const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v[i]);
      if (ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v[i]))
        throw ParseError(line_no, "not a decimal number: '" + t + "'");
    }
    const BoundingBox box{v[0], v[1], v[2], v[3], v[4]};
    const auto range = [&](bool ok, const char* what) {
      if (!ok) throw RangeError("line " + std::to_string(line_no) + ": " + what);
    };
    range(box.cx >= 0.0 && box.cx <= 1.0 && box.cy >= 0.0 && box.cy <= 1.0, "centre outside [0, 1]");
    range(box.w > 0.0 && box.w <= 1.0 && box.h > 0.0 && box.h <= 1.0, "extent outside (0, 1]");
    range(box.confidence >= 0.0 && box.confidence <= 1.0, "confidence outside [0, 1]");
    out.push_back(Detection{tokens[0], box});
  }
  return out;
}

std::vector<Detection> read_detections(const std::filesystem::path& path) {
  return parse_detections(read_text_file(path));
}

}  // namespace dvit
