#include "dvit/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "dvit/errors.hpp"

namespace dvit {

ImageFrame read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw IoError("cannot decode PNG " + path.string() + ": " + image.message);
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw IoError("cannot decode PNG " + path.string() + ": " + message);
  }
  const std::size_t channels = color ? 3 : 1;
  std::vector<double> pixels(buffer.begin(), buffer.end());
  return ImageFrame(image.height, image.width, channels, std::move(pixels));
}

void write_png(const std::filesystem::path& path, const ImageFrame& frame, double scale) {
  if (frame.channels() != 1 && frame.channels() != 3)
    throw ContractError("write_png: only 1 or 3 channels are supported");
  std::vector<png_byte> buffer(frame.pixels().size());
  const auto px = frame.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double v = std::round(px[i] * scale);
    buffer[i] = static_cast<png_byte>(v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v));
  }
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(frame.width());
  image.height = static_cast<png_uint_32>(frame.height());
  image.format = frame.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  if (!png_image_write_to_file(&image, tmp.c_str(), 0, buffer.data(), 0, nullptr)) {
    std::filesystem::remove(tmp);
    throw IoError("cannot write PNG " + path.string() + ": " + image.message);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace dvit
