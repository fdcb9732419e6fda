#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ccf {

/// 8-bit image with 1 (gray) or 3 (RGB) interleaved channels.
struct Image8 {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 1;
  std::vector<std::uint8_t> pixels;
};

/// Encodes with fixed zlib settings, so equal images give equal bytes.
std::vector<std::uint8_t> encode_png(const Image8& image);

/// Decodes 8-bit gray or RGB PNGs. Throws LoadError on anything else.
Image8 decode_png(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace ccf
