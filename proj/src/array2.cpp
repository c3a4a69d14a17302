#include "segsamp/array2.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace segsamp {

void GridSpec::validate(int min_side) const {
  if (ny < min_side || nz < min_side) {
    throw ValidationError("grid " + std::to_string(ny) + "x" + std::to_string(nz) +
                          " is smaller than the minimum side " + std::to_string(min_side));
  }
}

double normalized_radius(const GridSpec& g, int ky, int kz) {
  const double u = 2.0 * (ky - g.ny / 2) / g.ny;
  const double v = 2.0 * (kz - g.nz / 2) / g.nz;
  return std::sqrt(u * u + v * v) / std::numbers::sqrt2;
}

double pairwise_sum(std::span<const double> v) {
  constexpr std::size_t block = 64;
  if (v.size() <= block) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

} // namespace segsamp
