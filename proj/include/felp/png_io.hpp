#pragma once

#include <felp/raster.hpp>

#include <filesystem>

namespace felp {

/// Decodes an 8-bit PNG. Gray/palette/alpha variants are expanded or stripped to 1 or 3 channels.
RasterImage read_png(const std::filesystem::path& path);

/// Reads only the header. Returns {width, height}.
std::pair<int, int> png_dimensions(const std::filesystem::path& path);

/// Writes an 8-bit gray or RGB PNG.
void write_png(const std::filesystem::path& path, const RasterImage& img);

} // namespace felp
