#include "blink/png.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace blink {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void write_chunk(std::ofstream& f, const char type[4],
                 const std::vector<std::uint8_t>& data) {
  std::vector<std::uint8_t> head;
  put_u32(head, static_cast<std::uint32_t>(data.size()));
  f.write(reinterpret_cast<const char*>(head.data()), 4);
  f.write(type, 4);
  if (!data.empty())
    f.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  std::uint32_t crc = crc32(0, nullptr, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(type), 4);
  if (!data.empty()) crc = crc32(crc, data.data(), static_cast<uInt>(data.size()));
  std::vector<std::uint8_t> tail;
  put_u32(tail, crc);
  f.write(reinterpret_cast<const char*>(tail.data()), 4);
}

}  // namespace

void write_png_rgb(const std::string& path, int width, int height,
                   const std::vector<std::uint8_t>& pixels) {
  if (pixels.size() != static_cast<std::size_t>(width) * height * 3)
    throw std::runtime_error("pixel buffer size mismatch");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  static const std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
  f.write(reinterpret_cast<const char*>(sig), 8);

  std::vector<std::uint8_t> ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(width));
  put_u32(ihdr, static_cast<std::uint32_t>(height));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // RGB
  ihdr.push_back(0);   // deflate
  ihdr.push_back(0);   // filter method
  ihdr.push_back(0);   // no interlace
  write_chunk(f, "IHDR", ihdr);

  // Filter byte 0 (None) per scanline.
  std::vector<std::uint8_t> raw;
  raw.reserve(static_cast<std::size_t>(height) * (width * 3 + 1));
  for (int y = 0; y < height; ++y) {
    raw.push_back(0);
    const std::uint8_t* row = pixels.data() + static_cast<std::size_t>(y) * width * 3;
    raw.insert(raw.end(), row, row + width * 3);
  }
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> comp(bound);
  if (compress2(comp.data(), &bound, raw.data(), static_cast<uLong>(raw.size()),
                6) != Z_OK)
    throw std::runtime_error("zlib compression failed");
  comp.resize(bound);
  write_chunk(f, "IDAT", comp);
  write_chunk(f, "IEND", {});
  if (!f) throw std::runtime_error("write failed: " + path);
}

Canvas::Canvas(int width, int height, std::uint8_t r, std::uint8_t g,
               std::uint8_t b)
    : w_(width), h_(height), px_(static_cast<std::size_t>(width) * height * 3) {
  for (std::size_t i = 0; i < px_.size(); i += 3) {
    px_[i] = r;
    px_[i + 1] = g;
    px_[i + 2] = b;
  }
}

void Canvas::set(int x, int y, std::uint8_t r, std::uint8_t g,
                 std::uint8_t b) {
  if (x < 0 || x >= w_ || y < 0 || y >= h_) return;
  std::size_t i = (static_cast<std::size_t>(y) * w_ + x) * 3;
  px_[i] = r;
  px_[i + 1] = g;
  px_[i + 2] = b;
}

void Canvas::fill_rect(int x0, int y0, int x1, int y1, std::uint8_t r,
                       std::uint8_t g, std::uint8_t b) {
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) set(x, y, r, g, b);
}

void Canvas::disc(int cx, int cy, int radius, std::uint8_t r, std::uint8_t g,
                  std::uint8_t b) {
  for (int y = cy - radius; y <= cy + radius; ++y)
    for (int x = cx - radius; x <= cx + radius; ++x)
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= radius * radius)
        set(x, y, r, g, b);
}

void Canvas::save(const std::string& path) const {
  write_png_rgb(path, w_, h_, px_);
}

}  // namespace blink
