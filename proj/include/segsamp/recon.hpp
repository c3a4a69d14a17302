#pragma once

#include <string>
#include <vector>

#include "segsamp/array2.hpp"
#include "segsamp/density.hpp"
#include "segsamp/patterns.hpp"
#include "segsamp/phantom.hpp"

namespace segsamp {

struct PEConfig {
  int kernel_size = 11;
  int calib_size = 96;
  double tikhonov_alpha = 0.01;
  double lambda0 = 1e-6;
  double lambda1 = 0.0;
  int outer_iters = 30;
  int inner_cg_iters = 1;
  double split_param = 1.0;
  double cg_residual_floor = 1e-10;
  // Neighbourhoods with a smaller fraction of acquired taps are not used for calibration.
  double min_tap_fraction = 0.8;

  void validate() const;

  // lambda0 1e-6, lambda1 0, 1 CG iteration.
  static PEConfig phantom();
  // lambda0 1e-6, lambda1 5e-4, 10 CG iterations.
  static PEConfig bssfp_invivo();
  // lambda0 1e-6, lambda1 5e-4, 1 CG iteration.
  static PEConfig multicontrast();
  static PEConfig preset(const std::string& name);

  std::string to_json() const;
  // Missing keys keep the defaults of `base`.
  static PEConfig from_json(const std::string& json, const PEConfig& base);
  static PEConfig from_json(const std::string& json);
};

// weights[n] predicts acquisition n at k from all acquisitions m at k + d:
// x_n(k) ~ sum_{m,d} weights[n][index(m, d)] x_m(k + d), with the self tap zero.
struct InterpKernel {
  int N = 0;
  int kernel_size = 0;
  std::vector<std::vector<cd>> weights;
  std::vector<double> residual;      // ||A w - b|| / ||b|| per target
  std::vector<std::size_t> rows;     // calibration rows per target

  std::size_t index(int m, int dy, int dz) const;
  cd at(int n, int m, int dy, int dz) const { return weights[n][index(m, dy, dz)]; }
};

// Per-voxel N x N operator G(r) with G_nm(r) = sum_d w_nmd e^{-2 pi i d.r / n},
// the image-domain form of circular k-space convolution with the kernel.
struct ImageKernel {
  GridSpec grid;
  int N = 0;
  std::vector<ComplexImage> g; // g[n * N + m]
};

struct ReconResult {
  std::vector<ComplexImage> images;
  std::vector<double> objective_trace;
  PEConfig config;
  double scale = 1.0;
  InterpKernel kernel;
};

struct NormalizedData {
  std::vector<KSpaceData> data;
  double scale = 1.0;
};

// Zeroes samples outside the mask and records the mask.
KSpaceData undersample(const KSpaceData& k, const SamplingPattern& p);

// Density-compensated inverse DFT of the acquired samples.
ComplexImage zf_recon(const KSpaceData& k, const SamplingDensity& d);

// Divides by s = ||density-compensated data|| / sqrt(N).
NormalizedData normalize_dataset(const std::vector<KSpaceData>& data, const SamplingDensity& d);

// Regularized least squares per target over the central calibration region:
// (A^H A + alpha trace(A^H A)/rows I) w = A^H b.
InterpKernel calibrate_kernels(const std::vector<KSpaceData>& data, const PEConfig& cfg);

ImageKernel image_domain_kernel(const InterpKernel& k, const GridSpec& grid);

// (G m)_n = sum_m G_nm * m_m, voxelwise.
std::vector<ComplexImage> apply_image_kernel(const ImageKernel& k, const std::vector<ComplexImage>& m);

// Each coefficient scaled by max(0, 1 - tau / sqrt(sum_n |c_n|^2)).
std::vector<ComplexImage> joint_soft_threshold(const std::vector<ComplexImage>& c, double tau);

// Measurement operator mask . F and its adjoint F^H . mask.
ComplexImage measure(const ComplexImage& m, const Mask& mask);
ComplexImage measure_adjoint(const ComplexImage& y, const Mask& mask);

// Quadratic subproblem
//   f(m) = sum_n ||y_n - P_n m_n||^2 + lambda0 ||(G_n - I) m||^2 + split ||m_n - z_n||^2
// with normal operator A = P^H P + lambda0 (G - I)^H (G - I) + split I.
class QuadraticSubproblem {
public:
  QuadraticSubproblem(std::vector<ComplexImage> y, std::vector<Mask> masks, const ImageKernel& kernel,
                      double lambda0, double split);

  std::vector<ComplexImage> apply_normal(const std::vector<ComplexImage>& m) const;
  std::vector<ComplexImage> rhs(const std::vector<ComplexImage>& z) const;
  double value(const std::vector<ComplexImage>& m, const std::vector<ComplexImage>& z) const;
  // Gradient with respect to (Re m, Im m), packed as complex: 2 (A m - b).
  std::vector<ComplexImage> gradient(const std::vector<ComplexImage>& m, const std::vector<ComplexImage>& z) const;
  // Data plus calibration terms only.
  double fidelity(const std::vector<ComplexImage>& m) const;
  // Runs up to `iters` CG steps on A m = b starting from m.
  void cg(std::vector<ComplexImage>& m, const std::vector<ComplexImage>& b, int iters, double floor) const;

  int N() const { return static_cast<int>(y_.size()); }

private:
  std::vector<ComplexImage> y_;
  std::vector<Mask> masks_;
  GridSpec grid_;
  double lambda0_;
  double split_;
  std::vector<cd> q_; // (G - I)^H (G - I) per voxel, row-major N x N
  std::vector<cd> h_; // G - I per voxel
};

// Pattern masks override any mask stored with the data.
ReconResult pe_reconstruct(const std::vector<KSpaceData>& data, const std::vector<SamplingPattern>& patterns,
                           const SamplingDensity& d, const PEConfig& cfg);

// Complex inner product sum conj(a) b with pairwise summation.
cd inner(const std::vector<ComplexImage>& a, const std::vector<ComplexImage>& b);

} // namespace segsamp
