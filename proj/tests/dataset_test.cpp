#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "dvit/dataset.hpp"
#include "dvit/errors.hpp"
#include "dvit/keyvalue.hpp"
#include "dvit/png_io.hpp"
#include "test_util.hpp"

using namespace dvit;
namespace fs = std::filesystem;

namespace {

std::vector<Sample> labelled(std::size_t drowsy, std::size_t vigilant) {
  std::vector<Sample> out;
  for (std::size_t i = 0; i < drowsy + vigilant; ++i) {
    Sample s;
    s.path = "f" + std::to_string(i) + ".png";
    s.label = i < drowsy ? Label::Drowsy : Label::Vigilant;
    s.subject = "s" + std::to_string(i % 10);
    out.push_back(s);
  }
  return out;
}

std::size_t count_label(const std::vector<Sample>& s, const std::vector<std::size_t>& idx, Label l) {
  return static_cast<std::size_t>(std::count_if(idx.begin(), idx.end(), [&](std::size_t i) { return s[i].label == l; }));
}

}  // namespace

TEST(Ingest, CountsAndLabelsFromDirectories) {
  test::TempDir dir;
  test::write_dataset(dir.path(), {.drowsy = 10, .vigilant = 10});
  const DatasetManifest m = ingest_directory(dir.path());
  EXPECT_EQ(m.samples.size(), 20u);
  EXPECT_EQ(m.count(Label::Drowsy), 10u);
  EXPECT_EQ(m.count(Label::Vigilant), 10u);
  EXPECT_EQ(m.samples.front().label, Label::Drowsy);
  EXPECT_EQ(m.samples.back().label, Label::Vigilant);
  EXPECT_EQ(m.samples.front().scenario, Scenario::Unknown);
  EXPECT_EQ(m.stats.mean.size(), 3u);
}

TEST(Ingest, ChannelStatsOverAllPixels) {
  test::TempDir dir;
  fs::create_directories(dir / "drowsy");
  fs::create_directories(dir / "vigilant");
  write_png(dir / "drowsy" / "a.png", ImageFrame(2, 2, 1, 0.0));
  write_png(dir / "vigilant" / "b.png", ImageFrame(2, 2, 1, 255.0));
  const DatasetManifest m = ingest_directory(dir.path());
  EXPECT_EQ(m.stats.mean[0], 0.5);
  EXPECT_EQ(m.stats.std[0], 0.5);
}

TEST(Ingest, MetadataTags) {
  test::TempDir dir;
  test::write_dataset(dir.path(), {.drowsy = 3, .vigilant = 3, .write_meta = true});
  const DatasetManifest m = ingest_directory(dir.path());
  EXPECT_EQ(m.samples[0].scenario, Scenario::BareFace);
  EXPECT_EQ(m.samples[1].scenario, Scenario::Spectacles);
  EXPECT_EQ(m.samples[3].time, TimeOfDay::Evening);
  EXPECT_EQ(m.samples[0].subject, "p0");
  const std::string csv = m.to_csv();
  EXPECT_EQ(csv.rfind("path,label,subject,scenario,time\n", 0), 0u);
  EXPECT_NE(csv.find("drowsy/img_0000.png,drowsy,p0,bare_face,day"), std::string::npos);
}

TEST(Ingest, BadMetadataValueNamesLine) {
  test::TempDir dir;
  test::write_dataset(dir.path(), {.drowsy = 1, .vigilant = 1});
  write_file_atomic(dir / "meta.csv", "path,subject,scenario,time\ndrowsy/img_0000.png,p1,hat,day\n");
  try {
    ingest_directory(dir.path());
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Ingest, MissingClassIsNamed) {
  test::TempDir dir;
  test::write_dataset(dir.path(), {.drowsy = 2, .vigilant = 2});
  fs::remove_all(dir / "vigilant");
  try {
    ingest_directory(dir.path());
    FAIL();
  } catch (const IngestionError& e) {
    EXPECT_NE(std::string(e.what()).find("vigilant"), std::string::npos);
  }
}

TEST(Ingest, EmptyClassAndUndecodableFile) {
  test::TempDir dir;
  test::write_dataset(dir.path(), {.drowsy = 2, .vigilant = 2});
  for (const auto& e : fs::directory_iterator(dir / "drowsy")) fs::remove(e.path());
  EXPECT_THROW(ingest_directory(dir.path()), IngestionError);
  test::write_dataset(dir.path(), {.drowsy = 2, .vigilant = 2});
  std::ofstream(dir / "vigilant" / "broken.png") << "garbage";
  try {
    ingest_directory(dir.path());
    FAIL();
  } catch (const IngestionError& e) {
    EXPECT_NE(std::string(e.what()).find("broken.png"), std::string::npos);
  }
}

TEST(FrameSampling, StrideArithmetic) {
  EXPECT_EQ(stride_indices(100, 1, 0).size(), 100u);
  const auto s = stride_indices(100, 10, 3);
  ASSERT_EQ(s.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(s[i], 3 + 10 * i);
  EXPECT_THROW(stride_indices(10, 0, 0), ContractError);
  EXPECT_THROW(stride_indices(10, 3, 3), ContractError);
}

TEST(FrameSampling, SeededPhaseOverDirectory) {
  test::TempDir dir;
  for (int i = 0; i < 25; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03d.png", i);
    std::ofstream(dir / name) << "x";
  }
  const auto a = sample_frames(dir.path(), 5, 42);
  const auto b = sample_frames(dir.path(), 5, 42);
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.size(), 5u);
  SeededGenerator rng(42);
  const auto phase = rng.uniform_int(5);
  EXPECT_EQ(a[0].filename().string(), "frame_00" + std::to_string(phase) + ".png");
  EXPECT_EQ(sample_frames(dir.path(), 1, 7).size(), 25u);
  test::TempDir empty;
  EXPECT_THROW(sample_frames(empty.path(), 2, 1), IngestionError);
}

TEST(Splits, PresetSizes) {
  const auto samples = labelled(500, 500);
  const SplitResult r = make_splits(samples, SplitSpec::preset("80-20", 1));
  EXPECT_EQ(r.train.size(), 800u);
  EXPECT_EQ(r.validation.size(), 200u);
  for (std::string_view p : kSplitPresets) EXPECT_NO_THROW(SplitSpec::preset(p));
  EXPECT_EQ(SplitSpec::preset("70-30").name(), "70-30");
  EXPECT_THROW(SplitSpec::preset("90-20"), ContractError);
  EXPECT_THROW(SplitSpec::preset("eighty"), Error);
}

TEST(Splits, StratifiedPerClassArithmetic) {
  const auto samples = labelled(600, 400);
  const SplitResult r = make_splits(samples, SplitSpec::preset("80-20", 3));
  EXPECT_EQ(count_label(samples, r.train, Label::Drowsy), 480u);
  EXPECT_EQ(count_label(samples, r.train, Label::Vigilant), 320u);
  EXPECT_EQ(count_label(samples, r.validation, Label::Drowsy), 120u);
  EXPECT_EQ(count_label(samples, r.validation, Label::Vigilant), 80u);
}

TEST(Splits, DisjointExhaustiveDeterministic) {
  const auto samples = labelled(37, 23);
  for (std::string_view p : kSplitPresets) {
    const SplitResult a = make_splits(samples, SplitSpec::preset(p, 9));
    const SplitResult b = make_splits(samples, SplitSpec::preset(p, 9));
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.validation, b.validation);
    std::set<std::size_t> all(a.train.begin(), a.train.end());
    for (std::size_t i : a.validation) EXPECT_TRUE(all.insert(i).second);
    EXPECT_EQ(all.size(), samples.size());
    const SplitResult c = make_splits(samples, SplitSpec::preset(p, 10));
    EXPECT_NE(a.train, c.train);
  }
}

TEST(Splits, UnstratifiedAndPartialFractions) {
  const auto samples = labelled(50, 50);
  SplitSpec spec;
  spec.train_fraction = 0.5;
  spec.validation_fraction = 0.25;
  spec.stratified = false;
  const SplitResult r = make_splits(samples, spec);
  EXPECT_EQ(r.train.size(), 50u);
  EXPECT_EQ(r.validation.size(), 25u);
  spec.train_fraction = 0.9;
  EXPECT_THROW(make_splits(samples, spec), ContractError);
}

TEST(Splits, TooFewSamplesInAClass) {
  const auto samples = labelled(20, 1);
  EXPECT_THROW(make_splits(samples, SplitSpec::preset("80-20")), ContractError);
}

TEST(Splits, SubjectDisjoint) {
  const auto samples = labelled(60, 40);
  SplitSpec spec = SplitSpec::preset("80-20", 4);
  spec.subject_disjoint = true;
  const SplitResult r = make_splits(samples, spec);
  std::set<std::string> train_subjects;
  for (std::size_t i : r.train) train_subjects.insert(samples[i].subject);
  for (std::size_t i : r.validation) EXPECT_EQ(train_subjects.count(samples[i].subject), 0u);
  EXPECT_FALSE(r.validation.empty());
}

TEST(Loading, FramesAreUnitRangeAtModelResolution) {
  test::TempDir dir;
  test::write_dataset(dir.path(), {.drowsy = 2, .vigilant = 2, .size = 13});
  const DatasetManifest m = ingest_directory(dir.path());
  const Dataset d = load_frames(m.samples, VitConfig::tiny());
  ASSERT_EQ(d.size(), 4u);
  for (const auto& f : d) {
    EXPECT_EQ(f.frame.height(), 8u);
    EXPECT_EQ(f.frame.channels(), 3u);
    for (double v : f.frame.pixels()) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
  }
  EXPECT_EQ(select(d, std::vector<std::size_t>{3, 0})[0].label, Label::Vigilant);
}

TEST(Loading, ChannelConversion) {
  const ImageFrame gray(1, 1, 1, 0.3);
  const ImageFrame rgb = convert_channels(gray, 3);
  EXPECT_EQ(rgb.at(0, 0, 2), 0.3);
  EXPECT_NEAR(convert_channels(ImageFrame(1, 1, 3, std::vector<double>{0.0, 0.3, 0.6}), 1).at(0, 0, 0), 0.3, 1e-15);
}
