#include "segsamp/density.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace segsamp {

namespace {

constexpr int kBisectionIters = 60;

struct DegreeEntry {
  double R;
  int degree;
};
constexpr std::array<DegreeEntry, 5> kDegreeTable{{{2, 2}, {3, 3}, {4, 4}, {6, 5}, {8, 6}}};

double grid_mean(const RealImage& v) { return pairwise_sum(v.flat()) / static_cast<double>(v.size()); }

} // namespace

double SamplingDensity::mean() const { return grid_mean(values); }

int default_degree(double R) {
  const DegreeEntry* best = &kDegreeTable.front();
  for (const auto& e : kDegreeTable) {
    if (std::abs(e.R - R) < std::abs(best->R - R)) best = &e;
  }
  return best->degree;
}

double default_center_fraction(double R) {
  const double f = 0.18 + (R - 2.0) * (0.04 - 0.18) / 6.0;
  return std::clamp(f, 0.04, 0.18);
}

SamplingDensity design_density(const GridSpec& grid, double R, std::optional<int> degree,
                               std::optional<double> center_fraction) {
  grid.validate();
  if (!(R >= 1.0)) {
    std::ostringstream msg;
    msg << "infeasible-R: R=" << R << " is below 1; the best achievable is R=1 (full sampling)";
    throw InfeasibleDensity(msg.str(), 1.0);
  }
  if (R > 16.0) throw ValidationError("design_density: R must lie in [1, 16]");

  SamplingDensity d;
  d.grid = grid;
  d.target_R = R;
  d.degree = degree.value_or(default_degree(R));
  d.center_fraction = center_fraction.value_or(default_center_fraction(R));
  if (d.degree < 1) throw ValidationError("design_density: degree must be >= 1");
  if (!(d.center_fraction > 0.0 && d.center_fraction <= 1.0)) {
    throw ValidationError("design_density: center_fraction must lie in (0, 1]");
  }

  RealImage base(grid);
  Array2<std::uint8_t> disk(grid);
  std::size_t disk_cells = 0;
  for (int y = 0; y < grid.ny; ++y) {
    for (int z = 0; z < grid.nz; ++z) {
      const double kr = normalized_radius(grid, y, z);
      base(y, z) = std::pow(1.0 - kr, d.degree);
      disk(y, z) = kr < d.center_fraction;
      disk_cells += disk(y, z);
    }
  }

  d.values = RealImage(grid, 1.0);
  if (R == 1.0) {
    d.offset = 1.0;
    return d;
  }

  const double budget = 1.0 / R;
  const double disk_fraction = static_cast<double>(disk_cells) / static_cast<double>(grid.total());
  if (disk_fraction > budget) {
    std::ostringstream msg;
    msg << "infeasible-R: central disk alone samples " << disk_fraction << " of the grid; R=" << R
        << " needs " << budget << "; achievable R <= " << 1.0 / disk_fraction;
    throw InfeasibleDensity(msg.str(), 1.0 / disk_fraction);
  }

  auto build = [&](double offset, RealImage& out) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = disk[i] ? 1.0 : std::clamp(base[i] + offset, 0.0, 1.0);
    }
    return grid_mean(out);
  };

  // mean(offset) is non-decreasing: offset -1 leaves only the disk, +1 saturates.
  double lo = -1.0;
  double hi = 1.0;
  RealImage trial(grid);
  for (int it = 0; it < kBisectionIters; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (build(mid, trial) < budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  d.offset = hi;
  build(hi, d.values);
  return d;
}

SamplingDensity uniform_density(const GridSpec& grid, double p) {
  grid.validate();
  if (!(p > 0.0 && p <= 1.0)) throw ValidationError("uniform_density: p must lie in (0, 1]");
  SamplingDensity d;
  d.grid = grid;
  d.values = RealImage(grid, p);
  d.center_fraction = 0.0;
  d.target_R = 1.0 / p;
  d.degree = 0;
  d.offset = p;
  return d;
}

double density_at(const SamplingDensity& d, int ky, int kz) {
  if (!d.grid.contains(ky, kz)) {
    throw ValidationError("density_at: (" + std::to_string(ky) + "," + std::to_string(kz) + ") is off the grid");
  }
  return d.values(ky, kz);
}

std::vector<ProfileBin> radial_profile(const SamplingDensity& d, int n_bins) {
  if (n_bins < 4) throw ValidationError("radial_profile: n_bins must be >= 4");
  std::vector<double> sum(n_bins, 0.0);
  std::vector<std::size_t> cells(n_bins, 0);
  for (int y = 0; y < d.grid.ny; ++y) {
    for (int z = 0; z < d.grid.nz; ++z) {
      const double kr = normalized_radius(d.grid, y, z);
      const int b = std::min(n_bins - 1, static_cast<int>(kr * n_bins));
      sum[b] += d.values(y, z);
      ++cells[b];
    }
  }
  std::vector<ProfileBin> out;
  for (int b = 0; b < n_bins; ++b) {
    if (cells[b] == 0) continue;
    out.push_back({(b + 0.5) / n_bins, sum[b] / static_cast<double>(cells[b]), cells[b]});
  }
  return out;
}

} // namespace segsamp
