#pragma once

#include "segsamp/array2.hpp"

namespace segsamp {

// Centered, orthonormal 2D DFT: DC of both domains at index (ny/2, nz/2).
// forward(x)(k) = T^{-1/2} sum_r x(r) exp(-2 pi i k.r / n) with k, r measured
// from the centre index. Plans are cached per grid size; calls are thread-safe.
void fft2_centered(ComplexImage& data);
void ifft2_centered(ComplexImage& data);

ComplexImage fft2_centered_copy(const ComplexImage& data);
ComplexImage ifft2_centered_copy(const ComplexImage& data);

// Uncentered orthonormal transforms (DC at index 0).
void fft2_unitary(ComplexImage& data);
void ifft2_unitary(ComplexImage& data);

// Circular shifts moving index 0 to n/2 (fftshift) and back (ifftshift).
ComplexImage fftshift(const ComplexImage& x);
ComplexImage ifftshift(const ComplexImage& x);

} // namespace segsamp
