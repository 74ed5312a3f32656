#pragma once

#include <filesystem>

#include "diffuse/grid.hpp"

namespace diffuse {

// RFI ("raw float image") container: magic "RFI1", three little-endian
// uint32 (height, width, channels), then height*width*channels
// little-endian float32, row-major, channel-fastest.

void write_rfi(const std::filesystem::path& path, const Image& img);
Image read_rfi(const std::filesystem::path& path);

// Masks and gray maps travel as channels=1 RFI files.
void write_rfi(const std::filesystem::path& path, const GrayMap& map);
void write_rfi(const std::filesystem::path& path, const Mask& mask);
GrayMap read_rfi_graymap(const std::filesystem::path& path);

// 8-bit binary PGM (P5) with linear min-max scaling, for quick viewing.
// Multi-channel images are averaged over channels first.
void write_pgm(const std::filesystem::path& path, const Image& img);
void write_pgm(const std::filesystem::path& path, const GrayMap& map);

}  // namespace diffuse
