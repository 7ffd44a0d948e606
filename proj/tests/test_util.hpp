#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dvit/dataset.hpp"
#include "dvit/detector.hpp"
#include "dvit/image.hpp"
#include "dvit/rng.hpp"

namespace dvit::test {

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Uniform values in [lo, hi].
ImageFrame random_frame(std::size_t h, std::size_t w, std::size_t c, SeededGenerator& rng, double lo = 0.0,
                        double hi = 1.0);

/// Synthetic face crop in [0, 1]: an ellipse on a background. Drowsy faces
/// are dark, vigilant faces bright, with per-pixel noise.
ImageFrame synthetic_face(std::size_t size, std::size_t channels, Label label, SeededGenerator& rng);

/// Same frames as LabeledFrames, alternating labels.
Dataset synthetic_dataset(std::size_t count, std::size_t size, std::size_t channels, std::uint64_t seed);

struct DatasetLayout {
  std::size_t drowsy = 4;
  std::size_t vigilant = 4;
  std::size_t size = 12;
  std::size_t channels = 3;
  bool write_meta = false;
  std::uint64_t seed = 1;
};

/// Writes root/drowsy/*.png, root/vigilant/*.png and optionally meta.csv
/// cycling through scenario and time tags.
void write_dataset(const std::filesystem::path& root, const DatasetLayout& layout);

/// Box with centre in [0, 1] and extents in [0.02, 0.5].
BoundingBox random_box(SeededGenerator& rng);

}  // namespace dvit::test
