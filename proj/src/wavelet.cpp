#include "segsamp/wavelet.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace segsamp {

namespace {

struct Filters {
  std::array<double, 4> h;
  std::array<double, 4> g;
};

const Filters& d4() {
  static const Filters f = [] {
    const double s3 = std::sqrt(3.0);
    const double n = 4.0 * std::sqrt(2.0);
    Filters f{{(1 + s3) / n, (3 + s3) / n, (3 - s3) / n, (1 - s3) / n}, {}};
    for (int k = 0; k < 4; ++k) f.g[k] = (k % 2 ? -1.0 : 1.0) * f.h[3 - k];
    return f;
  }();
  return f;
}

// x has stride `stride` and length n (even); result goes back in place.
void analyze(cd* x, int n, std::size_t stride, std::vector<cd>& tmp) {
  const auto& f = d4();
  const int half = n / 2;
  tmp.assign(static_cast<std::size_t>(n), cd{});
  for (int k = 0; k < half; ++k) {
    cd a{}, d{};
    for (int j = 0; j < 4; ++j) {
      const cd v = x[static_cast<std::size_t>((2 * k + j) % n) * stride];
      a += f.h[j] * v;
      d += f.g[j] * v;
    }
    tmp[k] = a;
    tmp[half + k] = d;
  }
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i) * stride] = tmp[i];
}

void synthesize(cd* x, int n, std::size_t stride, std::vector<cd>& tmp) {
  const auto& f = d4();
  const int half = n / 2;
  tmp.assign(static_cast<std::size_t>(n), cd{});
  for (int k = 0; k < half; ++k) {
    const cd a = x[static_cast<std::size_t>(k) * stride];
    const cd d = x[static_cast<std::size_t>(half + k) * stride];
    for (int j = 0; j < 4; ++j) tmp[(2 * k + j) % n] += f.h[j] * a + f.g[j] * d;
  }
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i) * stride] = tmp[i];
}

void check_levels(int levels) {
  if (levels < 1 || levels > 12) throw ValidationError("wavelet: levels must lie in [1, 12]");
}

} // namespace

GridSpec wavelet_padded_grid(const GridSpec& g, int levels) {
  check_levels(levels);
  const int m = 1 << levels;
  auto up = [m](int n) { return std::max(2 * m, (n + m - 1) / m * m); };
  return {up(g.ny), up(g.nz)};
}

ComplexImage wavelet_fwd(const ComplexImage& img, int levels) {
  const GridSpec p = wavelet_padded_grid(img.grid(), levels);
  ComplexImage c(p, cd{});
  for (int y = 0; y < img.rows(); ++y) {
    for (int z = 0; z < img.cols(); ++z) c(y, z) = img(y, z);
  }
  std::vector<cd> tmp;
  int ny = p.ny, nz = p.nz;
  for (int l = 0; l < levels; ++l) {
    for (int y = 0; y < ny; ++y) analyze(&c(y, 0), nz, 1, tmp);
    for (int z = 0; z < nz; ++z) analyze(&c(0, z), ny, static_cast<std::size_t>(p.nz), tmp);
    ny /= 2;
    nz /= 2;
  }
  return c;
}

ComplexImage wavelet_inv(const ComplexImage& coeffs, const GridSpec& original, int levels) {
  const GridSpec p = wavelet_padded_grid(original, levels);
  require_same_grid(p, coeffs.grid(), "wavelet_inv");
  ComplexImage c = coeffs;
  std::vector<cd> tmp;
  for (int l = levels - 1; l >= 0; --l) {
    const int ny = p.ny >> l, nz = p.nz >> l;
    for (int z = 0; z < nz; ++z) synthesize(&c(0, z), ny, static_cast<std::size_t>(p.nz), tmp);
    for (int y = 0; y < ny; ++y) synthesize(&c(y, 0), nz, 1, tmp);
  }
  ComplexImage out(original, cd{});
  for (int y = 0; y < original.ny; ++y) {
    for (int z = 0; z < original.nz; ++z) out(y, z) = c(y, z);
  }
  return out;
}

} // namespace segsamp
