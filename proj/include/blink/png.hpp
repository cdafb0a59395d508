#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace blink {

// Minimal RGB8 PNG writer (zlib-compressed, no interlacing).
// `pixels` is row-major RGB, 3*width*height bytes.
void write_png_rgb(const std::string& path, int width, int height,
                   const std::vector<std::uint8_t>& pixels);

// Simple raster canvas for scatter/heatmap plots.
class Canvas {
 public:
  Canvas(int width, int height, std::uint8_t r = 255, std::uint8_t g = 255,
         std::uint8_t b = 255);
  int width() const { return w_; }
  int height() const { return h_; }
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
  void fill_rect(int x0, int y0, int x1, int y1, std::uint8_t r,
                 std::uint8_t g, std::uint8_t b);
  void disc(int cx, int cy, int radius, std::uint8_t r, std::uint8_t g,
            std::uint8_t b);
  void save(const std::string& path) const;

 private:
  int w_, h_;
  std::vector<std::uint8_t> px_;
};

}  // namespace blink
