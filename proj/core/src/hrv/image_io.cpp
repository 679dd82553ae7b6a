#include "ecgbench/hrv/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include <zlib.h>

#include "ecgbench/errors.hpp"

namespace ecgbench::hrv {
namespace {

std::uint8_t to_byte(double intensity) {
  const double clamped = std::clamp(intensity, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(clamped * 255.0));
}

void push_u32_be(std::vector<std::uint8_t>& out, std::uint32_t value) {
  out.push_back(static_cast<std::uint8_t>(value >> 24));
  out.push_back(static_cast<std::uint8_t>(value >> 16));
  out.push_back(static_cast<std::uint8_t>(value >> 8));
  out.push_back(static_cast<std::uint8_t>(value));
}

void push_chunk(std::vector<std::uint8_t>& out, const char* type,
                const std::vector<std::uint8_t>& data) {
  push_u32_be(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const auto crc = static_cast<std::uint32_t>(
      crc32(0L, out.data() + crc_start, static_cast<uInt>(4 + data.size())));
  push_u32_be(out, crc);
}

// zlib container around stored (BTYPE=00) deflate blocks; byte-for-byte
// deterministic because no compressor heuristics are involved.
std::vector<std::uint8_t> zlib_stored(const std::vector<std::uint8_t>& raw) {
  std::vector<std::uint8_t> out;
  out.push_back(0x78);
  out.push_back(0x01);
  std::size_t offset = 0;
  do {
    const std::size_t chunk = std::min<std::size_t>(raw.size() - offset, 65535);
    const bool final_block = offset + chunk == raw.size();
    out.push_back(final_block ? 0x01 : 0x00);
    out.push_back(static_cast<std::uint8_t>(chunk & 0xff));
    out.push_back(static_cast<std::uint8_t>(chunk >> 8));
    out.push_back(static_cast<std::uint8_t>(~chunk & 0xff));
    out.push_back(static_cast<std::uint8_t>((~chunk >> 8) & 0xff));
    out.insert(out.end(), raw.begin() + static_cast<std::ptrdiff_t>(offset),
               raw.begin() + static_cast<std::ptrdiff_t>(offset + chunk));
    offset += chunk;
  } while (offset < raw.size());
  const auto checksum = static_cast<std::uint32_t>(
      adler32(1L, raw.data(), static_cast<uInt>(raw.size())));
  push_u32_be(out, checksum);
  return out;
}

void write_file(const std::vector<std::uint8_t>& bytes,
                const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write image: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

std::vector<std::uint8_t> encode_pgm(const PoincareImage& image) {
  const std::string header = "P5\n" + std::to_string(PoincareImage::kSize) +
                             " " + std::to_string(PoincareImage::kSize) +
                             "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + image.pixels.size());
  for (double v : image.pixels) out.push_back(to_byte(v));
  return out;
}

std::vector<std::uint8_t> encode_png(const PoincareImage& image) {
  constexpr std::size_t kSize = PoincareImage::kSize;

  std::vector<std::uint8_t> raw;
  raw.reserve(kSize * (kSize + 1));
  for (std::size_t row = 0; row < kSize; ++row) {
    raw.push_back(0);  // filter: none
    for (std::size_t col = 0; col < kSize; ++col) {
      raw.push_back(to_byte(image.at(row, col)));
    }
  }

  std::vector<std::uint8_t> ihdr;
  push_u32_be(ihdr, kSize);
  push_u32_be(ihdr, kSize);
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(0);  // grayscale
  ihdr.push_back(0);  // deflate
  ihdr.push_back(0);  // adaptive filtering
  ihdr.push_back(0);  // no interlace

  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  push_chunk(out, "IHDR", ihdr);
  push_chunk(out, "IDAT", zlib_stored(raw));
  push_chunk(out, "IEND", {});
  return out;
}

void write_pgm(const PoincareImage& image,
               const std::filesystem::path& path) {
  write_file(encode_pgm(image), path);
}

void write_png(const PoincareImage& image,
               const std::filesystem::path& path) {
  write_file(encode_png(image), path);
}

}  // namespace ecgbench::hrv
