#include <algorithm>
#include <cmath>
#include <cstring>

#include <png.h>

#include "lfoacc/io.hpp"

namespace lfoacc {

Image8 read_png(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    fail(ErrorCode::missing_file, "missing image " + path.string());
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    fail(ErrorCode::format, path.string() + ": " + image.message);
  }
  if (image.format & (PNG_FORMAT_FLAG_ALPHA | PNG_FORMAT_FLAG_LINEAR)) {
    png_image_free(&image);
    fail(ErrorCode::unsupported, path.string() + ": only 8-bit gray or RGB PNGs are supported");
  }
  Image8 out;
  out.channels = (image.format & PNG_FORMAT_FLAG_COLOR) ? 3 : 1;
  image.format = out.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  out.height = static_cast<int>(image.height);
  out.width = static_cast<int>(image.width);
  out.data.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.data.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    fail(ErrorCode::format, path.string() + ": " + msg);
  }
  return out;
}

void write_png(const std::filesystem::path& path, const Image8& img) {
  require(img.channels == 1 || img.channels == 3, ErrorCode::invalid_argument,
          "PNG writer supports 1 or 3 channels");
  require(img.data.size() == static_cast<std::size_t>(img.height) * img.width * img.channels,
          ErrorCode::shape_mismatch, "PNG buffer size does not match extents");
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.data.data(), 0, nullptr)) {
    fail(ErrorCode::io, path.string() + ": " + image.message);
  }
}

Image8 to_image8(const FloatGrid& grid) {
  Image8 out{grid.height(), grid.width(), 1, {}};
  out.data.reserve(grid.size());
  for (float x : grid.values()) {
    const double q = std::round(std::clamp(static_cast<double>(x), 0.0, 1.0) * 255.0);
    out.data.push_back(static_cast<std::uint8_t>(q));
  }
  return out;
}

}  // namespace lfoacc
