#include <gtest/gtest.h>

#include "dvit/detector.hpp"
#include "dvit/errors.hpp"
#include "test_util.hpp"

using namespace dvit;

namespace {

// Exhaustive reselection: repeatedly take the most confident surviving box
// (lowest index on ties), then drop everything overlapping it.
std::vector<BoundingBox> reference_nms(const std::vector<BoundingBox>& boxes, double iou_t, double conf_t) {
  std::vector<bool> alive(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) alive[i] = boxes[i].confidence >= conf_t;
  std::vector<BoundingBox> kept;
  while (true) {
    std::size_t best = boxes.size();
    for (std::size_t i = 0; i < boxes.size(); ++i)
      if (alive[i] && (best == boxes.size() || boxes[i].confidence > boxes[best].confidence)) best = i;
    if (best == boxes.size()) break;
    kept.push_back(boxes[best]);
    alive[best] = false;
    for (std::size_t i = 0; i < boxes.size(); ++i)
      if (alive[i] && iou(boxes[best], boxes[i]) > iou_t) alive[i] = false;
  }
  return kept;
}

}  // namespace

TEST(Iou, HandValues) {
  const auto a = BoundingBox::from_corners(0, 0, 2, 2);
  const auto b = BoundingBox::from_corners(1, 1, 3, 3);
  EXPECT_NEAR(iou(a, b), 1.0 / 7.0, 1e-15);
  EXPECT_EQ(iou(a, a), 1.0);
  EXPECT_EQ(iou(a, BoundingBox::from_corners(5, 5, 6, 6)), 0.0);
  EXPECT_EQ(iou(a, BoundingBox::from_corners(2, 0, 4, 2)), 0.0);  // touching edge
  EXPECT_NEAR(iou(a, BoundingBox::from_corners(0.5, 0.5, 1.5, 1.5)), 0.25, 1e-15);
  EXPECT_THROW(iou(a, BoundingBox{0.5, 0.5, 0.0, 1.0}), ContractError);
}

TEST(Iou, Symmetric) {
  SeededGenerator rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto a = test::random_box(rng), b = test::random_box(rng);
    EXPECT_EQ(iou(a, b), iou(b, a));
    EXPECT_GE(iou(a, b), 0.0);
    EXPECT_LE(iou(a, b), 1.0);
  }
}

TEST(GridConfidence, ResponsibilityTimesIou) {
  EXPECT_EQ(grid_confidence(0, 0.7), 0.0);
  EXPECT_EQ(grid_confidence(1, 0.7), 0.7);
  EXPECT_THROW(grid_confidence(2, 0.5), ContractError);
  EXPECT_THROW(grid_confidence(1, 1.5), ContractError);
}

TEST(Grid, ResponsibleCellIsFloorOfCentre) {
  EXPECT_EQ(assign_responsible_cell({0.5, 0.5, 0.1, 0.1}, {7}), (GridCell{3, 3}));
  EXPECT_EQ(assign_responsible_cell({0.99, 0.01, 0.1, 0.1}, {7}), (GridCell{0, 6}));
  EXPECT_EQ(assign_responsible_cell({1.0, 1.0, 0.1, 0.1}, {7}), (GridCell{6, 6}));
  EXPECT_EQ(assign_responsible_cell({0.3, 0.3, 0.1, 0.1}, {1}), (GridCell{0, 0}));
  EXPECT_THROW(assign_responsible_cell({1.2, 0.5, 0.1, 0.1}, {7}), ContractError);
  EXPECT_THROW(assign_responsible_cell({0.5, 0.5, 0.1, 0.1}, {0}), ContractError);
}

TEST(Grid, BuildTargetsCreditsOnlyResponsibleCell) {
  const BoundingBox truth{0.55, 0.25, 0.2, 0.2};
  const GridSpec grid{4};  // responsible cell (1, 2)
  const std::vector<CellPrediction> preds{{{1, 2}, {0.56, 0.26, 0.2, 0.2}}, {{0, 0}, {0.55, 0.25, 0.2, 0.2}}};
  const auto t = build_targets(truth, preds, grid);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].responsible, 1);
  EXPECT_EQ(t[0].confidence, iou(truth, preds[0].box));
  EXPECT_EQ(t[1].responsible, 0);
  EXPECT_EQ(t[1].confidence, 0.0);
}

TEST(Nms, HandCase) {
  const std::vector<BoundingBox> boxes{
      BoundingBox::from_corners(0, 0, 1, 1, 0.9), BoundingBox::from_corners(0.05, 0, 1.05, 1, 0.95),
      BoundingBox::from_corners(2, 2, 3, 3, 0.8), BoundingBox::from_corners(5, 5, 6, 6, 0.5)};
  const auto kept = non_max_suppression(boxes, 0.45, 0.75);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].confidence, 0.95);
  EXPECT_EQ(kept[1].confidence, 0.8);
}

TEST(Nms, ThresholdIsInclusiveAndTiesKeepInputOrder) {
  const auto a = BoundingBox::from_corners(0, 0, 1, 1, 0.75);
  const auto b = BoundingBox::from_corners(0, 0, 1, 1, 0.75);
  const auto kept = non_max_suppression({a, b}, 0.45, 0.75);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0], a);
}

TEST(Nms, MatchesReselectionOracle) {
  SeededGenerator rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<BoundingBox> boxes;
    for (int i = 0; i < 30; ++i) boxes.push_back(test::random_box(rng));
    EXPECT_EQ(non_max_suppression(boxes, 0.3, 0.2), reference_nms(boxes, 0.3, 0.2));
  }
}

TEST(Roi, MarginRoundingAndClamping) {
  const BoundingBox box = BoundingBox::from_corners(0.2, 0.2, 0.6, 0.6);
  // margin 0.1 of 0.4 -> [0.16, 0.64] * 100 -> [16, 64)
  EXPECT_EQ(roi_rect(100, 100, box, 0.1), (PixelRect{16, 16, 64, 64}));
  const BoundingBox edge = BoundingBox::from_corners(0.0, 0.9, 0.3, 1.0);
  const PixelRect r = roi_rect(50, 50, edge, 0.5);
  EXPECT_EQ(r.x0, 0u);
  EXPECT_EQ(r.y1, 50u);
  ImageFrame f(10, 10, 1);
  for (std::size_t y = 0; y < 10; ++y)
    for (std::size_t x = 0; x < 10; ++x) f.at(y, x, 0) = static_cast<double>(y * 10 + x);
  const ImageFrame c = crop_roi(f, BoundingBox::from_corners(0.2, 0.3, 0.5, 0.7), 0.0);
  EXPECT_EQ(c.height(), 4u);
  EXPECT_EQ(c.width(), 3u);
  EXPECT_EQ(c.at(0, 0, 0), 32.0);
  EXPECT_THROW(crop_roi(f, BoundingBox{2.0, 2.0, 0.1, 0.1}, 0.0), ContractError);
}

TEST(DetectionFile, ParsesAndReportsLineNumbers) {
  const auto d = parse_detections("# header\nframe1 0.5 0.5 0.2 0.3 0.9\n\nframe2.png 0.1 0.2 0.05 0.05 0.4\n");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].image_id, "frame1");
  EXPECT_EQ(d[1].box.confidence, 0.4);
  try {
    parse_detections("a 0.5 0.5 0.2 0.2 0.9\nb 0.5 0.5 0.2\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_detections("a 0.5 0.5 0.2 0.2 x\n"), ParseError);
  EXPECT_THROW(parse_detections("a 0.5 0.5 0.2 0.2 1.5\n"), RangeError);
  EXPECT_THROW(parse_detections("a 0.5 0.5 -0.2 0.2 0.5\n"), RangeError);
}
