#include "blink/episode.hpp"

#include <fstream>
#include <json.hpp>

namespace blink {

using nlohmann::json;

void Episode::validate() const {
  std::int32_t prev = 0;
  bool first = true;
  for (const Frame& f : frames) {
    if (f.obs.size() != obs_size())
      throw std::runtime_error("frame observation size mismatch in " + id);
    if (f.cum_kills < 0)
      throw std::runtime_error("negative cumulative kills in " + id);
    if (!first && f.cum_kills < prev)
      throw std::runtime_error("non-monotone cumulative kills in " + id);
    prev = f.cum_kills;
    first = false;
  }
}

void save_episode(const Episode& ep, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  json header = {{"id", ep.id},          {"T", ep.length()},
                 {"C", ep.channels},     {"H", ep.height},
                 {"W", ep.width},        {"format_version", kEpisodeFormatVersion}};
  std::string line = header.dump();
  line.push_back('\n');
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  for (const Frame& f : ep.frames)
    out.write(reinterpret_cast<const char*>(f.obs.data()),
              static_cast<std::streamsize>(f.obs.size() * 4));
  for (const Frame& f : ep.frames) {
    out.write(reinterpret_cast<const char*>(&f.dx), 4);
    out.write(reinterpret_cast<const char*>(&f.dy), 4);
  }
  for (const Frame& f : ep.frames)
    out.write(reinterpret_cast<const char*>(&f.cum_kills), 4);
  if (!out) throw std::runtime_error("write failed: " + path);
}

Episode load_episode(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw MalformedHeaderError("missing header line: " + path);
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.is_object())
    throw MalformedHeaderError("header is not valid JSON: " + path);
  for (const char* key : {"id", "T", "C", "H", "W", "format_version"})
    if (!header.contains(key))
      throw MalformedHeaderError(std::string("header missing key '") + key +
                                 "': " + path);
  if (header["format_version"].get<int>() != kEpisodeFormatVersion)
    throw VersionMismatchError(
        "unsupported format_version " +
        std::to_string(header["format_version"].get<int>()) + ": " + path);
  Episode ep;
  ep.id = header["id"].get<std::string>();
  int T = header["T"].get<int>();
  ep.channels = header["C"].get<int>();
  ep.height = header["H"].get<int>();
  ep.width = header["W"].get<int>();
  if (T < 0 || ep.channels <= 0 || ep.height <= 0 || ep.width <= 0)
    throw MalformedHeaderError("nonsensical dimensions in header: " + path);
  ep.frames.resize(T);
  for (Frame& f : ep.frames) {
    f.obs.resize(ep.obs_size());
    in.read(reinterpret_cast<char*>(f.obs.data()),
            static_cast<std::streamsize>(f.obs.size() * 4));
  }
  for (Frame& f : ep.frames) {
    in.read(reinterpret_cast<char*>(&f.dx), 4);
    in.read(reinterpret_cast<char*>(&f.dy), 4);
  }
  for (Frame& f : ep.frames)
    in.read(reinterpret_cast<char*>(&f.cum_kills), 4);
  if (!in) throw TruncatedPayloadError("truncated payload: " + path);
  char extra;
  if (in.read(&extra, 1))
    throw TruncatedPayloadError("trailing bytes after payload: " + path);
  return ep;
}

std::uint64_t file_fnv1a(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::uint64_t h = 0xCBF29CE484222325ull;
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001B3ull;
    }
    if (!in) break;
  }
  return h;
}

}  // namespace blink
