#pragma once

#include "segsamp/array2.hpp"

namespace segsamp {

inline constexpr int kWaveletLevels = 4;

// Grid zero-padded up to multiples of 2^levels.
GridSpec wavelet_padded_grid(const GridSpec& g, int levels = kWaveletLevels);

// Orthonormal separable 2D Daubechies wavelet with 4 taps (two vanishing
// moments), periodic boundary, Mallat layout: the coarsest approximation band
// occupies the top-left (ny >> levels) x (nz >> levels) block.
// Inputs are zero-padded to wavelet_padded_grid; coefficients have padded size.
ComplexImage wavelet_fwd(const ComplexImage& img, int levels = kWaveletLevels);

// Inverse of wavelet_fwd, cropped back to `original`.
ComplexImage wavelet_inv(const ComplexImage& coeffs, const GridSpec& original, int levels = kWaveletLevels);

} // namespace segsamp
