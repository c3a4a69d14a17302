#include <doctest.h>

#include <filesystem>
#include <limits>
#include <random>

#include "segsamp/io.hpp"

using namespace segsamp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "segsamp_test_io" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

} // namespace

TEST_SUITE("io") {

TEST_CASE("FNV-1a reference vectors") {
  CHECK(io::fnv1a_hex("") == "cbf29ce484222325");
  CHECK(io::fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(io::fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("atomic write and read") {
  const fs::path dir = scratch("atomic");
  const fs::path f = dir / "nested" / "x.txt";
  io::write_atomic(f, "first");
  io::write_atomic(f, std::string("second\0bytes", 12));
  CHECK(io::read_file(f) == std::string("second\0bytes", 12));
  CHECK_FALSE(fs::exists(f.string() + ".tmp"));
  CHECK_THROWS_AS(io::read_file(dir / "missing.txt"), IoError);
}

TEST_CASE("CSV round trip with provenance comment") {
  const fs::path f = scratch("csv") / "t.csv";
  io::CsvTable t{{"a", "b"}, {{"1", "x"}, {io::format_double(0.1), "y"}}};
  io::write_csv(f, t, "abc");
  CHECK(io::read_file(f).rfind("# segsamp 1.0.0 config=abc\n", 0) == 0);
  const auto back = io::read_csv(f);
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK(std::stod(io::format_double(1.0 / 3.0)) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  CHECK(io::format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("mask round trips through CSV and PGM") {
  const fs::path dir = scratch("mask");
  std::mt19937_64 gen(3);
  std::bernoulli_distribution b(0.3);
  Mask m(17, 23, 0);
  for (auto& v : m) v = b(gen);
  io::write_mask_csv(dir / "m.csv", m, "h");
  io::write_mask_pgm(dir / "m.pgm", m);
  CHECK(io::read_mask_csv(dir / "m.csv", {17, 23}) == m);
  CHECK(io::read_mask_pgm(dir / "m.pgm") == m);
  CHECK_THROWS_AS(io::read_mask_csv(dir / "m.csv", {8, 8}), ValidationError);

  std::string bytes = io::read_file(dir / "m.pgm");
  bytes.resize(bytes.size() - 5);
  io::write_atomic(dir / "cut.pgm", bytes);
  CHECK_THROWS_AS(io::read_pgm(dir / "cut.pgm"), IoError);
}

TEST_CASE("complex raw round trip at float precision") {
  const fs::path dir = scratch("raw");
  std::mt19937_64 gen(4);
  std::normal_distribution<double> nd;
  ComplexImage img(12, 20);
  for (auto& v : img) v = {nd(gen), nd(gen)};
  io::write_complex_raw(dir / "a.raw", img, R"({"acquisition": 2})");
  CHECK(fs::file_size(dir / "a.raw") == img.size() * 8);
  std::string side;
  const auto back = io::read_complex_raw(dir / "a.raw", &side);
  REQUIRE(back.grid() == img.grid());
  for (std::size_t i = 0; i < img.size(); ++i) {
    CHECK(back[i].real() == static_cast<double>(static_cast<float>(img[i].real())));
    CHECK(back[i].imag() == static_cast<double>(static_cast<float>(img[i].imag())));
  }
  CHECK(side.find("\"acquisition\":2") != std::string::npos);
  CHECK(side.find("\"dims\":[12,20]") != std::string::npos);

  io::write_atomic(dir / "a.raw", "short");
  CHECK_THROWS_AS(io::read_complex_raw(dir / "a.raw"), IoError);
  CHECK_THROWS_AS(io::read_complex_raw(dir / "none.raw"), IoError);
}

TEST_CASE("real images scale to 8 bits") {
  const fs::path f = scratch("pgm") / "r.pgm";
  RealImage img(2, 3, 0.0);
  img(0, 1) = 0.5;
  img(1, 2) = 2.0;
  img(1, 0) = -1.0;
  io::write_real_pgm(f, img, 1.0);
  const auto back = io::read_pgm(f);
  CHECK(back(0, 0) == 0);
  CHECK(back(0, 1) == 128);
  CHECK(back(1, 2) == 255);
  CHECK(back(1, 0) == 0);
}

} // TEST_SUITE
