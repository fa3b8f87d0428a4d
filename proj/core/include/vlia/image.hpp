#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace vlia {

/// Row-major H x W x 3 image with unit-interval float intensities.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<float> data;  // size = height * width * 3

  Image() = default;
  Image(int h, int w, float fill = 0.0f)
      : height(h), width(w), data(static_cast<size_t>(h) * w * 3, fill) {}

  float& at(int y, int x, int c) {
    return data[(static_cast<size_t>(y) * width + x) * 3 + c];
  }
  float at(int y, int x, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * 3 + c];
  }

  bool same_shape(const Image& o) const {
    return height == o.height && width == o.width;
  }
  bool operator==(const Image& o) const {
    return height == o.height && width == o.width && data == o.data;
  }
};

/// Writes a binary PPM (P6). Used for report overlays; intensities are
/// clamped to [0,1] and quantized to 8 bits.
void write_ppm(const Image& img, const std::string& path);

}  // namespace vlia
