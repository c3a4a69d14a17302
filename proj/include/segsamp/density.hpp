#pragma once

#include <optional>
#include <vector>

#include "segsamp/array2.hpp"

namespace segsamp {

// Per-location sampling probability over the phase-encode grid.
//
// Designed densities follow p_o(k_r) = clamp((1 - k_r)^degree + offset, 0, 1)
// outside a fully sampled central disk (k_r < center_fraction) and equal 1
// inside it. Values are immutable once built.
struct SamplingDensity {
  GridSpec grid;
  RealImage values;
  double center_fraction = 0.0;  // 0 means no forced disk
  double target_R = 1.0;
  int degree = 1;
  double offset = 0.0;

  double at(int ky, int kz) const { return values(ky, kz); }
  bool in_nyquist_disk(int ky, int kz) const {
    return normalized_radius(grid, ky, kz) < center_fraction;
  }
  double mean() const;
};

// Polynomial degree for R from the (R, degree) table {2:2, 3:3, 4:4, 6:5, 8:6};
// nearest table entry for other R.
int default_degree(double R);

// Disk radius fraction: 0.18 at R=2 falling linearly to 0.04 at R=8, clamped.
double default_center_fraction(double R);

// Solves the offset by bisection so the grid mean equals 1/R.
// Throws InfeasibleDensity when R < 1 or the disk alone exceeds the budget.
SamplingDensity design_density(const GridSpec& grid, double R, std::optional<int> degree = std::nullopt,
                               std::optional<double> center_fraction = std::nullopt);

// Constant probability p everywhere, no forced disk. Used for analytic checks.
SamplingDensity uniform_density(const GridSpec& grid, double p);

double density_at(const SamplingDensity& d, int ky, int kz);

struct ProfileBin {
  double kr_center = 0.0;
  double mean = 0.0;
  std::size_t cells = 0;
};

// Mean density over equal-width annuli of normalized radius in [0,1].
// Empty annuli are omitted.
std::vector<ProfileBin> radial_profile(const SamplingDensity& d, int n_bins);

} // namespace segsamp
