#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "noisewarp/flow.hpp"
#include "noisewarp/noise_grid.hpp"

namespace noisewarp {

inline constexpr float kFloMagic = 202021.25f;

// Middlebury .flo: float magic, int32 width, int32 height, then row-major
// float32 (dx, dy) pairs; all little-endian.
std::vector<std::uint8_t> encode_flo(const FlowField& flow);
FlowField decode_flo(std::span<const std::uint8_t> bytes);
void write_flo(const FlowField& flow, const std::filesystem::path& path);
FlowField read_flo(const std::filesystem::path& path);

// .grid container, see docs/file_formats.md.
inline constexpr char kGridMagic[8] = {'N', 'W', 'G', 'R', 'I', 'D', '\r', '\n'};
inline constexpr std::uint32_t kGridVersion = 1;

std::vector<std::uint8_t> encode_grid(const NoiseGrid& grid);
NoiseGrid decode_grid(std::span<const std::uint8_t> bytes);
void write_grid(const NoiseGrid& grid, const std::filesystem::path& path);
NoiseGrid read_grid(const std::filesystem::path& path);

/// NPY 1.0, '<f4', C order, shape (data_height, data_width, channels).
std::vector<std::uint8_t> encode_npy(const NoiseGrid& grid);
void write_npy(const NoiseGrid& grid, const std::filesystem::path& path);

/// clamp(round(128 + 48 v), 0, 255).
std::uint8_t preview_gray_level(float value) noexcept;

/// 8-bit preview of the stored lattice. Three channels render as RGB,
/// otherwise channel 0 as gray.
void write_png_preview(const NoiseGrid& grid, const std::filesystem::path& path);
void write_png(const Raster<std::uint8_t>& image, const std::filesystem::path& path);
/// 8-bit gray/RGB/RGBA PNG normalized to [0, 1].
Image read_png(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;
std::uint64_t file_checksum(const std::filesystem::path& path);
std::string hex64(std::uint64_t value);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(std::span<const std::uint8_t> bytes,
                      const std::filesystem::path& path);
void write_text_file(const std::string& text, const std::filesystem::path& path);

}  // namespace noisewarp
