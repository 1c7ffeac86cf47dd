#include "noisewarp/io_formats.hpp"

#include <png.h>

#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>

#include "noisewarp/error.hpp"

namespace noisewarp {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[at + static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

float get_f32(std::span<const std::uint8_t> b, std::size_t at) {
  return std::bit_cast<float>(get_u32(b, at));
}

constexpr std::size_t kGridHeaderSize = 32;
constexpr std::uint32_t kDtypeFloat32 = 1;

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  return f;
}

}  // namespace

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t seed) noexcept {
  std::uint64_t h = seed;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return bytes;
}

void write_file_bytes(std::span<const std::uint8_t> bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

void write_text_file(const std::string& text, const std::filesystem::path& path) {
  write_file_bytes(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()), path);
}

std::uint64_t file_checksum(const std::filesystem::path& path) {
  return fnv1a64(read_file_bytes(path));
}

// --- .flo -------------------------------------------------------------------

std::vector<std::uint8_t> encode_flo(const FlowField& flow) {
  std::vector<std::uint8_t> out;
  out.reserve(12 + flow.data().size() * 8);
  put_f32(out, kFloMagic);
  put_u32(out, static_cast<std::uint32_t>(flow.width()));
  put_u32(out, static_cast<std::uint32_t>(flow.height()));
  for (const Vec2& v : flow.data()) {
    put_f32(out, static_cast<float>(v.x));
    put_f32(out, static_cast<float>(v.y));
  }
  return out;
}

FlowField decode_flo(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) throw IoError(".flo file truncated before the header ends");
  if (get_f32(bytes, 0) != kFloMagic) throw FormatError(".flo magic mismatch");
  const auto w = static_cast<std::int32_t>(get_u32(bytes, 4));
  const auto h = static_cast<std::int32_t>(get_u32(bytes, 8));
  if (w < 1 || h < 1 || w > (1 << 16) || h > (1 << 16)) {
    throw FormatError(".flo has invalid dimensions " + std::to_string(w) + "x" + std::to_string(h));
  }
  const std::size_t expected = 12 + static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 8;
  if (bytes.size() < expected) throw IoError(".flo payload truncated");
  if (bytes.size() > expected) throw FormatError(".flo has trailing bytes");
  std::vector<Vec2> data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = {get_f32(bytes, 12 + 8 * i), get_f32(bytes, 16 + 8 * i)};
  }
  return FlowField(w, h, std::move(data));
}

void write_flo(const FlowField& flow, const std::filesystem::path& path) {
  write_file_bytes(encode_flo(flow), path);
}

FlowField read_flo(const std::filesystem::path& path) { return decode_flo(read_file_bytes(path)); }

// --- .grid ------------------------------------------------------------------

std::vector<std::uint8_t> encode_grid(const NoiseGrid& grid) {
  std::vector<std::uint8_t> out;
  out.reserve(kGridHeaderSize + grid.element_count() * 4 + 8);
  for (char ch : kGridMagic) out.push_back(static_cast<std::uint8_t>(ch));
  put_u32(out, kGridVersion);
  put_u32(out, kDtypeFloat32);
  put_u32(out, static_cast<std::uint32_t>(grid.height()));
  put_u32(out, static_cast<std::uint32_t>(grid.width()));
  put_u32(out, static_cast<std::uint32_t>(grid.channels()));
  put_u32(out, static_cast<std::uint32_t>(grid.level()));
  for (float v : grid.data()) put_f32(out, v);
  put_u64(out, fnv1a64(out));
  return out;
}

NoiseGrid decode_grid(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kGridHeaderSize + 8) throw IoError(".grid file truncated");
  if (std::memcmp(bytes.data(), kGridMagic, sizeof kGridMagic) != 0) {
    throw FormatError(".grid magic mismatch");
  }
  const std::size_t body = bytes.size() - 8;
  if (fnv1a64(bytes.first(body)) != get_u64(bytes, body)) {
    throw DataError(".grid checksum mismatch");
  }
  if (get_u32(bytes, 8) != kGridVersion) throw FormatError("unsupported .grid version");
  if (get_u32(bytes, 12) != kDtypeFloat32) throw FormatError("unsupported .grid dtype");
  const auto h = static_cast<int>(get_u32(bytes, 16));
  const auto w = static_cast<int>(get_u32(bytes, 20));
  const auto c = static_cast<int>(get_u32(bytes, 24));
  const auto level = static_cast<int>(get_u32(bytes, 28));
  if (w < 1 || h < 1 || c < 1 || level < 0 || level > 12 || w > (1 << 16) || h > (1 << 16) ||
      c > 4096) {
    throw FormatError(".grid has an invalid shape");
  }
  const std::size_t count = (static_cast<std::size_t>(h) << level) *
                            (static_cast<std::size_t>(w) << level) * static_cast<std::size_t>(c);
  if (body != kGridHeaderSize + count * 4) throw FormatError(".grid payload size does not match shape");
  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) data[i] = get_f32(bytes, kGridHeaderSize + 4 * i);
  return NoiseGrid(w, h, c, level, std::move(data));
}

void write_grid(const NoiseGrid& grid, const std::filesystem::path& path) {
  write_file_bytes(encode_grid(grid), path);
}

NoiseGrid read_grid(const std::filesystem::path& path) { return decode_grid(read_file_bytes(path)); }

// --- .npy -------------------------------------------------------------------

std::vector<std::uint8_t> encode_npy(const NoiseGrid& grid) {
  std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': (" +
                       std::to_string(grid.data_height()) + ", " +
                       std::to_string(grid.data_width()) + ", " +
                       std::to_string(grid.channels()) + "), }";
  const std::size_t preamble = 10;
  std::size_t total = preamble + header.size() + 1;
  header.append((64 - total % 64) % 64, ' ');
  header.push_back('\n');

  std::vector<std::uint8_t> out = {0x93, 'N', 'U', 'M', 'P', 'Y', 1, 0};
  out.push_back(static_cast<std::uint8_t>(header.size()));
  out.push_back(static_cast<std::uint8_t>(header.size() >> 8));
  out.insert(out.end(), header.begin(), header.end());
  for (float v : grid.data()) put_f32(out, v);
  return out;
}

void write_npy(const NoiseGrid& grid, const std::filesystem::path& path) {
  write_file_bytes(encode_npy(grid), path);
}

// --- .png -------------------------------------------------------------------

std::uint8_t preview_gray_level(float value) noexcept {
  const double level = std::round(128.0 + 48.0 * static_cast<double>(value));
  if (!(level > 0.0)) return 0;
  if (level >= 255.0) return 255;
  return static_cast<std::uint8_t>(level);
}

void write_png(const Raster<std::uint8_t>& image, const std::filesystem::path& path) {
  int color_type = 0;
  switch (image.channels) {
    case 1: color_type = PNG_COLOR_TYPE_GRAY; break;
    case 2: color_type = PNG_COLOR_TYPE_GRAY_ALPHA; break;
    case 3: color_type = PNG_COLOR_TYPE_RGB; break;
    case 4: color_type = PNG_COLOR_TYPE_RGBA; break;
    default: throw InvalidArgumentError("PNG supports 1-4 channels");
  }
  FilePtr file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, info ? &info : nullptr);
    throw IoError("error writing PNG '" + path.string() + "'");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.channels);
  for (int y = 0; y < image.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(image.data.data() + static_cast<std::size_t>(y) * stride));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_png_preview(const NoiseGrid& grid, const std::filesystem::path& path) {
  const int channels = grid.channels() == 3 ? 3 : 1;
  Raster<std::uint8_t> img(grid.data_width(), grid.data_height(), channels);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < channels; ++c) img.at(x, y, c) = preview_gray_level(grid.at(x, y, c));
    }
  }
  write_png(img, path);
}

Image read_png(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  png_byte signature[8];
  if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    throw FormatError("'" + path.string() + "' is not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  Image image;
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    throw DataError("corrupt PNG '" + path.string() + "'");
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_packing(png);
  png_read_update_info(png, info);
  const auto w = static_cast<int>(png_get_image_width(png, info));
  const auto h = static_cast<int>(png_get_image_height(png, info));
  const int channels = png_get_channels(png, info);
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) *
                                static_cast<std::size_t>(channels));
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) {
    rows[static_cast<std::size_t>(y)] =
        raw.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(w) * static_cast<std::size_t>(channels);
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  image = Image(w, h, channels);
  for (std::size_t i = 0; i < raw.size(); ++i) image.data[i] = static_cast<float>(raw[i]) / 255.0f;
  return image;
}

}  // namespace noisewarp
