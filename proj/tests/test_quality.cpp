#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "segsamp/quality.hpp"

using namespace segsamp;

namespace {

// Separable window, two-pass moments about the local means.
double ssim_oracle(const RealImage& x, const RealImage& y) {
  const int n = 11;
  std::vector<double> g(n);
  double s = 0;
  for (int i = 0; i < n; ++i) {
    g[i] = std::exp(-(i - 5) * (i - 5) / 4.5);
    s += g[i];
  }
  for (double& v : g) v /= s;
  double L = 0;
  for (double v : y) L = std::max(L, std::abs(v));
  const double c1 = 1e-4 * L * L, c2 = 9e-4 * L * L;
  double total = 0;
  int count = 0;
  for (int r = 0; r + n <= y.rows(); ++r) {
    for (int c = 0; c + n <= y.cols(); ++c) {
      double mx = 0, my = 0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          mx += g[i] * g[j] * x(r + i, c + j);
          my += g[i] * g[j] * y(r + i, c + j);
        }
      }
      double vx = 0, vy = 0, cxy = 0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const double a = x(r + i, c + j) - mx, b = y(r + i, c + j) - my;
          vx += g[i] * g[j] * a * a;
          vy += g[i] * g[j] * b * b;
          cxy += g[i] * g[j] * a * b;
        }
      }
      total += (2 * mx * my + c1) * (2 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  }
  return 100.0 * total / count;
}

RealImage checkerboard(int n, int shift) {
  RealImage img(n, n, 0.0);
  for (int y = 0; y < n; ++y) {
    for (int z = 0; z < n; ++z) img(y, z) = ((((z + shift) / 4) + (y / 4)) % 2) ? 1.0 : 0.2;
  }
  return img;
}

} // namespace

TEST_SUITE("quality") {

TEST_CASE("p-norm combination") {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  ComplexImage a(16, 16), b(16, 16);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = {nd(gen), nd(gen)};
    b[i] = {nd(gen), nd(gen)};
  }
  CHECK(pnorm_combine({a}, 2.0) == magnitude(a));
  const auto two = pnorm_combine({a, a}, 2.0);
  const auto sum = pnorm_combine({a, b}, 1.0);
  const auto mx = pnorm_combine({a, b}, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(two[i] == doctest::Approx(std::sqrt(2.0) * std::abs(a[i])).epsilon(1e-14));
    CHECK(sum[i] == doctest::Approx(std::abs(a[i]) + std::abs(b[i])).epsilon(1e-14));
    CHECK(mx[i] == std::max(std::abs(a[i]), std::abs(b[i])));
  }
  CHECK_THROWS_AS(pnorm_combine({}, 2.0), ValidationError);
  CHECK_THROWS_AS(pnorm_combine({a}, 0.5), ValidationError);
  CHECK_THROWS_AS(pnorm_combine({a, ComplexImage(8, 8)}, 2.0), ValidationError);
}

TEST_CASE("PSNR: cap, constant offset and scale invariance") {
  const RealImage ref = checkerboard(32, 0);
  CHECK(psnr(ref, ref) == kPsnrCap);
  RealImage off = ref;
  for (auto& v : off) v += 0.01;
  // peak 1, MSE 1e-4
  CHECK(psnr(off, ref) == doctest::Approx(40.0).epsilon(1e-12));
  RealImage s_ref = ref, s_off = off;
  for (auto& v : s_ref) v *= 7.5;
  for (auto& v : s_off) v *= 7.5;
  CHECK(psnr(s_off, s_ref) == doctest::Approx(40.0).epsilon(1e-12));
  CHECK_THROWS_AS(psnr(ref, RealImage(32, 32, 0.0)), ValidationError);
  CHECK_THROWS_AS(psnr(ref, RealImage(16, 16, 1.0)), ValidationError);
}

TEST_CASE("SSIM: identity, contrast inversion and an independent implementation") {
  const RealImage ref = checkerboard(40, 0);
  CHECK(ssim(ref, ref) == doctest::Approx(100.0).epsilon(1e-14));
  // Inverted contrast: same local means, negated covariance.
  RealImage inv = ref;
  for (auto& v : inv) v = 1.2 - v;
  CHECK(ssim(inv, ref) < 0.0);
  CHECK(std::abs(ssim(inv, ref) - ssim_oracle(inv, ref)) <= 1e-9);
  const RealImage shifted = checkerboard(40, 1);
  const double got = ssim(shifted, ref);
  CHECK(got < 100.0);
  CHECK(std::abs(got - ssim_oracle(shifted, ref)) <= 1e-9);

  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  RealImage a(24, 30), b(24, 30);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = u(gen);
    b[i] = a[i] + 0.3 * u(gen);
  }
  CHECK(std::abs(ssim(b, a) - ssim_oracle(b, a)) <= 1e-9);
  CHECK_THROWS_AS(ssim(RealImage(10, 20, 1.0), RealImage(10, 20, 1.0)), ValidationError);
}

TEST_CASE("evaluate and error maps") {
  const RealImage ref = checkerboard(32, 0), test = checkerboard(32, 2);
  const auto m = mse_map(test, ref);
  double s = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    CHECK(m[i] == (test[i] - ref[i]) * (test[i] - ref[i]));
    s += m[i];
  }
  const auto r = evaluate(test, ref, false, 3);
  CHECK(r.mse == doctest::Approx(s / m.size()).epsilon(1e-14));
  CHECK(r.psnr_db == psnr(test, ref));
  CHECK(r.ssim_pct == ssim(test, ref));
  CHECK(r.acquisition_index == 3);
  CHECK_FALSE(r.combined);
  const auto c = evaluate(test, ref, true, 3);
  CHECK(c.combined);
  CHECK(c.acquisition_index == -1);
  CHECK(quality_metadata_json().find("\"sigma\":1.5") != std::string::npos);
}

} // TEST_SUITE
