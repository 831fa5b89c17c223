#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace latentflow {

/// Writes 8-bit RGB pixels (row-major, 3 bytes per pixel) as PNG. A non-empty
/// comment is stored as a tEXt chunk.
void writePngRgb(const std::filesystem::path& path, int width, int height, const std::vector<std::uint8_t>& rgb,
                 const std::string& comment = {});

}  // namespace latentflow
