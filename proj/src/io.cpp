#include "segsamp/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace segsamp::io {

namespace fs = std::filesystem;

void write_atomic(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

std::string csv_comment(std::string_view config_hash) {
  return "# segsamp " + std::string(kVersion) + " config=" + std::string(config_hash);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream ss;
  ss << std::setprecision(10) << v;
  return ss.str();
}

void write_csv(const fs::path& path, const CsvTable& table, std::string_view config_hash) {
  std::ostringstream ss;
  ss << csv_comment(config_hash) << '\n';
  for (std::size_t i = 0; i < table.header.size(); ++i) ss << (i ? "," : "") << table.header[i];
  ss << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) ss << (i ? "," : "") << row[i];
    ss << '\n';
  }
  write_atomic(path, ss.str());
}

CsvTable read_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  if (!have_header) throw IoError("csv has no header: " + path.string());
  return t;
}

void write_grid_csv(const fs::path& path, const RealImage& values, std::string_view value_name,
                    std::string_view config_hash) {
  std::ostringstream ss;
  ss << csv_comment(config_hash) << "\nky,kz," << value_name << '\n';
  for (int y = 0; y < values.rows(); ++y) {
    for (int z = 0; z < values.cols(); ++z) ss << y << ',' << z << ',' << format_double(values(y, z)) << '\n';
  }
  write_atomic(path, ss.str());
}

void write_mask_csv(const fs::path& path, const Mask& mask, std::string_view config_hash) {
  std::ostringstream ss;
  ss << csv_comment(config_hash) << "\nky,kz,sampled\n";
  for (int y = 0; y < mask.rows(); ++y) {
    for (int z = 0; z < mask.cols(); ++z) ss << y << ',' << z << ',' << int(mask(y, z) != 0) << '\n';
  }
  write_atomic(path, ss.str());
}

Mask read_mask_csv(const fs::path& path, const GridSpec& grid) {
  const CsvTable t = read_csv(path);
  Mask m(grid, 0);
  for (const auto& row : t.rows) {
    if (row.size() < 3) throw IoError("mask csv: short row in " + path.string());
    const int y = std::stoi(row[0]), z = std::stoi(row[1]);
    if (!grid.contains(y, z)) throw ValidationError("mask csv: location off grid");
    m(y, z) = std::stoi(row[2]) != 0;
  }
  return m;
}

void write_pgm(const fs::path& path, const Array2<std::uint8_t>& img) {
  std::string s = "P5\n" + std::to_string(img.cols()) + " " + std::to_string(img.rows()) + "\n255\n";
  s.append(reinterpret_cast<const char*>(img.data()), img.size());
  write_atomic(path, s);
}

Array2<std::uint8_t> read_pgm(const fs::path& path) {
  const std::string s = read_file(path);
  std::istringstream in(s);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5" || w <= 0 || h <= 0 || maxval != 255) throw IoError("unsupported PGM: " + path.string());
  in.get();
  const auto off = static_cast<std::size_t>(in.tellg());
  Array2<std::uint8_t> img(h, w, 0);
  if (s.size() < off + img.size()) throw IoError("truncated PGM: " + path.string());
  std::memcpy(img.data(), s.data() + off, img.size());
  return img;
}

void write_mask_pgm(const fs::path& path, const Mask& mask) {
  Array2<std::uint8_t> img(mask.grid(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i) img[i] = mask[i] ? 255 : 0;
  write_pgm(path, img);
}

Mask read_mask_pgm(const fs::path& path) {
  Mask m = read_pgm(path);
  for (auto& v : m) v = v >= 128;
  return m;
}

void write_real_pgm(const fs::path& path, const RealImage& img, double max_value) {
  Array2<std::uint8_t> out(img.grid(), 0);
  const double s = max_value > 0.0 ? 255.0 / max_value : 0.0;
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = static_cast<std::uint8_t>(std::clamp(std::round(img[i] * s), 0.0, 255.0));
  write_pgm(path, out);
}

void write_complex_raw(const fs::path& path, const ComplexImage& img, const std::string& sidecar_json) {
  std::string raw(img.size() * 8, '\0');
  for (std::size_t i = 0; i < img.size(); ++i) {
    const float re = static_cast<float>(img[i].real());
    const float im = static_cast<float>(img[i].imag());
    std::uint32_t a = std::bit_cast<std::uint32_t>(re), b = std::bit_cast<std::uint32_t>(im);
    for (int k = 0; k < 4; ++k) {
      raw[i * 8 + k] = static_cast<char>((a >> (8 * k)) & 0xFF);
      raw[i * 8 + 4 + k] = static_cast<char>((b >> (8 * k)) & 0xFF);
    }
  }
  nlohmann::ordered_json side = sidecar_json.empty() ? nlohmann::ordered_json::object()
                                                     : nlohmann::ordered_json::parse(sidecar_json);
  side["dims"] = {img.rows(), img.cols()};
  side["format"] = "float32le_interleaved_complex";
  write_atomic(path, raw);
  write_atomic(path.string() + ".json", side.dump(2) + "\n");
}

ComplexImage read_complex_raw(const fs::path& path, std::string* sidecar_json) {
  nlohmann::json side;
  try {
    side = nlohmann::json::parse(read_file(path.string() + ".json"));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("complex sidecar: ") + e.what());
  }
  if (!side.contains("dims") || side["dims"].size() != 2) throw IoError("complex sidecar: missing dims");
  const int ny = side["dims"][0].get<int>(), nz = side["dims"][1].get<int>();
  const std::string raw = read_file(path);
  ComplexImage img(ny, nz, cd{});
  if (raw.size() != img.size() * 8) throw IoError("complex raw: size does not match sidecar dims");
  auto word = [&](std::size_t off) {
    std::uint32_t w = 0;
    for (int k = 0; k < 4; ++k) w |= static_cast<std::uint32_t>(static_cast<unsigned char>(raw[off + k])) << (8 * k);
    return std::bit_cast<float>(w);
  };
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = cd(word(i * 8), word(i * 8 + 4));
  if (sidecar_json) *sidecar_json = side.dump();
  return img;
}

} // namespace segsamp::io
