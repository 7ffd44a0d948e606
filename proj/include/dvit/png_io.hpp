#pragma once

#include <filesystem>

#include "dvit/image.hpp"

namespace dvit {

/// Decodes an 8-bit grayscale or RGB PNG (alpha is dropped, palettes are
/// expanded). Pixels come back as raw values in [0, 255].
ImageFrame read_png(const std::filesystem::path& path);

/// Encodes a 1- or 3-channel frame as 8-bit PNG. Each value is multiplied
/// by `scale`, rounded and clamped to [0, 255]; use scale 255 for frames in
/// [0, 1]. Writes to a temporary file and renames it into place.
void write_png(const std::filesystem::path& path, const ImageFrame& frame, double scale = 1.0);

}  // namespace dvit
