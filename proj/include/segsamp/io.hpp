#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "segsamp/array2.hpp"

namespace segsamp::io {

inline constexpr std::string_view kVersion = "1.0.0";

// Writes to a sibling temporary file and renames it over the target.
void write_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

// 64-bit FNV-1a as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

// "# segsamp <version> config=<hash>"
std::string csv_comment(std::string_view config_hash);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string format_double(double v);
void write_csv(const std::filesystem::path& path, const CsvTable& table, std::string_view config_hash);
// Skips '#' comment lines; first remaining line is the header.
CsvTable read_csv(const std::filesystem::path& path);

// Long format: one (ky, kz, value) row per cell, row-major.
void write_grid_csv(const std::filesystem::path& path, const RealImage& values, std::string_view value_name,
                    std::string_view config_hash);
void write_mask_csv(const std::filesystem::path& path, const Mask& mask, std::string_view config_hash);
Mask read_mask_csv(const std::filesystem::path& path, const GridSpec& grid);

// Binary P5 greymap, maxval 255.
void write_pgm(const std::filesystem::path& path, const Array2<std::uint8_t>& img);
Array2<std::uint8_t> read_pgm(const std::filesystem::path& path);

// Mask as 0/255.
void write_mask_pgm(const std::filesystem::path& path, const Mask& mask);
Mask read_mask_pgm(const std::filesystem::path& path);

// Values scaled by 255/max_value, rounded and clamped.
void write_real_pgm(const std::filesystem::path& path, const RealImage& img, double max_value);

// Little-endian float32 interleaved (re, im), row-major, plus `<path>.json`
// sidecar. The sidecar receives "dims" in addition to the given fields.
void write_complex_raw(const std::filesystem::path& path, const ComplexImage& img, const std::string& sidecar_json);
ComplexImage read_complex_raw(const std::filesystem::path& path, std::string* sidecar_json = nullptr);

} // namespace segsamp::io
