#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ecgbench/hrv/poincare.hpp"

namespace ecgbench::hrv {

// PGM P5, maxval 255, pixel = round(intensity * 255).
std::vector<std::uint8_t> encode_pgm(const PoincareImage& image);

// 8-bit grayscale PNG. The IDAT stream uses stored (uncompressed) deflate
// blocks so the bytes are identical regardless of zlib version.
std::vector<std::uint8_t> encode_png(const PoincareImage& image);

void write_pgm(const PoincareImage& image, const std::filesystem::path& path);
void write_png(const PoincareImage& image, const std::filesystem::path& path);

}  // namespace ecgbench::hrv
