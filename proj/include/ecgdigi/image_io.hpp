#pragma once

#include "ecgdigi/core.hpp"

#include <filesystem>

namespace ecgdigi {

/// Reads any 8/16-bit PNG into a gray or RGB raster. Alpha is composited over white.
RasterImage read_png(const std::filesystem::path& path);

/// Writes 8-bit gray or RGB.
void write_png(const std::filesystem::path& path, const RasterImage& image);

/// 1-bit PNG, foreground written black.
void write_mask_png(const std::filesystem::path& path, const BinaryImage& mask);

/// Any PNG; foreground iff luminance < 128.
BinaryImage read_mask_png(const std::filesystem::path& path);

}  // namespace ecgdigi
