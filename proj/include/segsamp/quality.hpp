#pragma once

#include <string>
#include <vector>

#include "segsamp/array2.hpp"

namespace segsamp {

inline constexpr double kPsnrCap = 300.0;

// Per voxel (sum_n |m_n|^p)^(1/p); p >= 1e6 is treated as the maximum.
RealImage pnorm_combine(const std::vector<ComplexImage>& images, double p = 2.0);

RealImage magnitude(const ComplexImage& img);

// 10 log10(peak^2 / MSE) with peak = max |ref|; kPsnrCap when identical.
double psnr(const RealImage& test, const RealImage& ref);

// Mean SSIM over valid 11x11 Gaussian windows (sigma 1.5), K1 0.01, K2 0.03,
// dynamic range max |ref|, as a percentage.
double ssim(const RealImage& test, const RealImage& ref);

RealImage mse_map(const RealImage& test, const RealImage& ref);

struct QualityReport {
  double psnr_db = 0.0;
  double ssim_pct = 0.0;
  double mse = 0.0;
  RealImage mse_map;
  bool combined = false;
  int acquisition_index = -1; // -1 for combined
};

QualityReport evaluate(const RealImage& test, const RealImage& ref, bool combined, int acquisition_index = -1);

// Metric parameterization recorded with reports.
std::string quality_metadata_json();

} // namespace segsamp
