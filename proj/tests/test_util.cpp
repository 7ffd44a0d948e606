#include "test_util.hpp"

#include <atomic>
#include <algorithm>
#include <cmath>
#include <unistd.h>

#include "dvit/keyvalue.hpp"
#include "dvit/png_io.hpp"

namespace fs = std::filesystem;

namespace dvit::test {

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  const auto stamp = std::to_string(std::hash<std::string>{}(fs::current_path().string()) ^
                                    static_cast<std::size_t>(::getpid()));
  path_ = fs::temp_directory_path() / ("dvit-test-" + stamp + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

ImageFrame random_frame(std::size_t h, std::size_t w, std::size_t c, SeededGenerator& rng, double lo, double hi) {
  ImageFrame f(h, w, c);
  for (double& v : f.pixels()) v = rng.uniform(lo, hi);
  return f;
}

ImageFrame synthetic_face(std::size_t size, std::size_t channels, Label label, SeededGenerator& rng) {
  const double face = label == Label::Drowsy ? 0.25 : 0.8;
  const double background = 0.5;
  const double r = static_cast<double>(size) / 2.0;
  ImageFrame f(size, size, channels);
  for (std::size_t y = 0; y < size; ++y)
    for (std::size_t x = 0; x < size; ++x) {
      const double dy = (static_cast<double>(y) + 0.5 - r) / (0.9 * r);
      const double dx = (static_cast<double>(x) + 0.5 - r) / (0.7 * r);
      const double base = dx * dx + dy * dy <= 1.0 ? face : background;
      for (std::size_t c = 0; c < channels; ++c)
        f.at(y, x, c) = std::clamp(base + rng.uniform(-0.08, 0.08), 0.0, 1.0);
    }
  return f;
}

Dataset synthetic_dataset(std::size_t count, std::size_t size, std::size_t channels, std::uint64_t seed) {
  SeededGenerator rng(seed);
  Dataset out;
  for (std::size_t i = 0; i < count; ++i) {
    const Label label = i % 2 == 0 ? Label::Drowsy : Label::Vigilant;
    Sample s;
    s.path = "synthetic_" + std::to_string(i) + ".png";
    s.label = label;
    s.subject = "s" + std::to_string(i % 5);
    out.push_back(LabeledFrame{synthetic_face(size, channels, label, rng), label, s});
  }
  return out;
}

void write_dataset(const fs::path& root, const DatasetLayout& layout) {
  SeededGenerator rng(layout.seed);
  static constexpr const char* kScenarios[] = {"bare_face", "spectacles", "sunglasses"};
  static constexpr const char* kTimes[] = {"day", "evening", "night"};
  std::string meta = "path,subject,scenario,time\n";
  std::size_t k = 0;
  for (Label label : kLabels) {
    const std::size_t n = label == Label::Drowsy ? layout.drowsy : layout.vigilant;
    const fs::path dir = root / std::string(to_string(label));
    fs::create_directories(dir);
    for (std::size_t i = 0; i < n; ++i, ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "img_%04zu.png", i);
      write_png(dir / name, synthetic_face(layout.size, layout.channels, label, rng), 255.0);
      meta += std::string(to_string(label)) + "/" + name + ",p" + std::to_string(k % 4) + "," + kScenarios[k % 3] +
              "," + kTimes[(k / 3) % 3] + "\n";
    }
  }
  if (layout.write_meta) write_file_atomic(root / "meta.csv", meta);
}

BoundingBox random_box(SeededGenerator& rng) {
  BoundingBox b;
  b.cx = rng.uniform();
  b.cy = rng.uniform();
  b.w = rng.uniform(0.02, 0.5);
  b.h = rng.uniform(0.02, 0.5);
  b.confidence = rng.uniform();
  return b;
}

}  // namespace dvit::test
