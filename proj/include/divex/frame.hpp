#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace divex {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Row-major 8-bit RGB image.
class Frame {
 public:
  Frame() = default;
  Frame(int width, int height, Rgb fill = {});
  Frame(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<std::uint8_t>& bytes() const { return pixels_; }

  Rgb at(int x, int y) const {
    const auto i = (static_cast<std::size_t>(y) * width_ + x) * 3;
    return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
  }
  void set(int x, int y, Rgb c) {
    const auto i = (static_cast<std::size_t>(y) * width_ + x) * 3;
    pixels_[i] = c.r;
    pixels_[i + 1] = c.g;
    pixels_[i + 2] = c.b;
  }

  /// Luma 0.299 R + 0.587 G + 0.114 B on the 0..255 scale.
  double luma(int x, int y) const {
    const auto c = at(x, y);
    return 0.299 * c.r + 0.587 * c.g + 0.114 * c.b;
  }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Binary PPM (P6, maxval 255). Throws Error(UnsupportedFormat) for other
/// variants and Error(Parse) for malformed files; messages name the file.
Frame read_ppm(const std::filesystem::path& path);
Frame decode_ppm(const std::string& bytes, const std::string& name);
std::string encode_ppm(const Frame& frame);
void write_ppm(const std::filesystem::path& path, const Frame& frame);

/// Nearest-neighbour downscale so the longest edge is at most `maxEdge`.
/// Frames already within bounds are returned unchanged.
Frame scale_to_fit(const Frame& frame, int maxEdge);

}  // namespace divex
