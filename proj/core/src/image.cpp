#include "vlia/image.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <string>

#include "vlia/errors.hpp"

namespace vlia {

void write_ppm(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  std::vector<uint8_t> row(static_cast<size_t>(img.width) * 3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        float v = std::clamp(img.at(y, x, c), 0.0f, 1.0f);
        row[static_cast<size_t>(x) * 3 + c] = static_cast<uint8_t>(v * 255.0f + 0.5f);
      }
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw IoError("short write to " + path);
}

}  // namespace vlia
