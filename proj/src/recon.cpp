#include "segsamp/recon.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <json.hpp>

#include "segsamp/fft.hpp"
#include "segsamp/parallel.hpp"
#include "segsamp/wavelet.hpp"

namespace segsamp {

namespace {

using ImageSet = std::vector<ComplexImage>;

bool acquired(const KSpaceData& k, std::size_t i) { return k.mask.empty() || k.mask[i] != 0; }

void check_grids(const std::vector<KSpaceData>& data) {
  if (data.empty()) throw ValidationError("reconstruction: no datasets");
  for (const auto& k : data) {
    require_same_grid(data.front().grid, k.grid, "reconstruction datasets");
    require_same_grid(k.grid, k.samples.grid(), "dataset samples");
    if (!k.mask.empty()) require_same_grid(k.grid, k.mask.grid(), "dataset mask");
  }
}

double norm2(const ImageSet& a) { return inner(a, a).real(); }

void axpy(ImageSet& y, cd a, const ImageSet& x) {
  for (std::size_t n = 0; n < y.size(); ++n) {
    for (std::size_t i = 0; i < y[n].size(); ++i) y[n][i] += a * x[n][i];
  }
}

} // namespace

void PEConfig::validate() const {
  if (kernel_size < 3 || kernel_size % 2 == 0) throw ValidationError("PEConfig: kernel_size must be odd and >= 3");
  if (calib_size < kernel_size) throw ValidationError("PEConfig: calib_size must be >= kernel_size");
  if (!(tikhonov_alpha >= 0.0 && lambda0 >= 0.0 && lambda1 >= 0.0 && split_param >= 0.0)) {
    throw ValidationError("PEConfig: weights must be non-negative");
  }
  if (lambda1 > 0.0 && !(split_param > 0.0)) throw ValidationError("PEConfig: lambda1 > 0 needs split_param > 0");
  if (outer_iters < 1 || inner_cg_iters < 1) throw ValidationError("PEConfig: iteration counts must be >= 1");
  if (!(min_tap_fraction >= 0.0 && min_tap_fraction <= 1.0)) {
    throw ValidationError("PEConfig: min_tap_fraction must lie in [0, 1]");
  }
}

PEConfig PEConfig::phantom() { return PEConfig{}; }

PEConfig PEConfig::bssfp_invivo() {
  PEConfig c;
  c.lambda1 = 5e-4;
  c.inner_cg_iters = 10;
  return c;
}

PEConfig PEConfig::multicontrast() {
  PEConfig c;
  c.lambda1 = 5e-4;
  c.inner_cg_iters = 1;
  return c;
}

PEConfig PEConfig::preset(const std::string& name) {
  if (name == "phantom") return phantom();
  if (name == "bssfp_invivo") return bssfp_invivo();
  if (name == "multicontrast") return multicontrast();
  throw ValidationError("unknown PE preset '" + name + "'");
}

std::string PEConfig::to_json() const {
  nlohmann::ordered_json j;
  j["kernel_size"] = kernel_size;
  j["calib_size"] = calib_size;
  j["tikhonov_alpha"] = tikhonov_alpha;
  j["lambda0"] = lambda0;
  j["lambda1"] = lambda1;
  j["outer_iters"] = outer_iters;
  j["inner_cg_iters"] = inner_cg_iters;
  j["split_param"] = split_param;
  j["cg_residual_floor"] = cg_residual_floor;
  j["min_tap_fraction"] = min_tap_fraction;
  return j.dump();
}

PEConfig PEConfig::from_json(const std::string& json, const PEConfig& base) {
  PEConfig c = base;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
    if (!j.is_object()) throw ValidationError("PEConfig: expected a JSON object");
    for (const auto& [key, v] : j.items()) {
      if (key == "kernel_size") c.kernel_size = v.get<int>();
      else if (key == "calib_size") c.calib_size = v.get<int>();
      else if (key == "tikhonov_alpha") c.tikhonov_alpha = v.get<double>();
      else if (key == "lambda0") c.lambda0 = v.get<double>();
      else if (key == "lambda1") c.lambda1 = v.get<double>();
      else if (key == "outer_iters") c.outer_iters = v.get<int>();
      else if (key == "inner_cg_iters") c.inner_cg_iters = v.get<int>();
      else if (key == "split_param") c.split_param = v.get<double>();
      else if (key == "cg_residual_floor") c.cg_residual_floor = v.get<double>();
      else if (key == "min_tap_fraction") c.min_tap_fraction = v.get<double>();
      else throw ValidationError("PEConfig: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("PEConfig: ") + e.what());
  }
  c.validate();
  return c;
}

PEConfig PEConfig::from_json(const std::string& json) { return from_json(json, PEConfig{}); }

std::size_t InterpKernel::index(int m, int dy, int dz) const {
  const int h = kernel_size / 2;
  return static_cast<std::size_t>((m * kernel_size + dy + h) * kernel_size + dz + h);
}

KSpaceData undersample(const KSpaceData& k, const SamplingPattern& p) {
  require_same_grid(k.grid, p.grid, "undersample");
  KSpaceData out = k;
  out.mask = p.mask;
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    if (!p.mask[i]) out.samples[i] = cd{};
  }
  return out;
}

ComplexImage zf_recon(const KSpaceData& k, const SamplingDensity& d) {
  require_same_grid(k.grid, d.grid, "zf_recon");
  ComplexImage c(k.grid, cd{});
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!acquired(k, i)) continue;
    if (!(d.values[i] > 0.0)) throw ValidationError("zf_recon: zero density at a sampled location");
    c[i] = k.samples[i] / d.values[i];
  }
  ifft2_centered(c);
  return c;
}

NormalizedData normalize_dataset(const std::vector<KSpaceData>& data, const SamplingDensity& d) {
  check_grids(data);
  require_same_grid(data.front().grid, d.grid, "normalize_dataset");
  std::vector<double> e;
  e.reserve(data.size() * d.grid.total());
  for (const auto& k : data) {
    for (std::size_t i = 0; i < k.samples.size(); ++i) {
      if (!acquired(k, i)) continue;
      if (!(d.values[i] > 0.0)) throw ValidationError("normalize_dataset: zero density at a sampled location");
      e.push_back(std::norm(k.samples[i] / d.values[i]));
    }
  }
  const double s = std::sqrt(pairwise_sum(e)) / std::sqrt(static_cast<double>(data.size()));
  if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("normalize_dataset: data have zero norm");
  NormalizedData out{data, s};
  for (auto& k : out.data) {
    for (auto& v : k.samples) v /= s;
  }
  return out;
}

InterpKernel calibrate_kernels(const std::vector<KSpaceData>& data, const PEConfig& cfg) {
  cfg.validate();
  check_grids(data);
  const GridSpec g = data.front().grid;
  const int N = static_cast<int>(data.size());
  const int ks = cfg.kernel_size;
  const int h = ks / 2;
  const int cy = std::min(cfg.calib_size, g.ny);
  const int cz = std::min(cfg.calib_size, g.nz);
  if (cy < ks || cz < ks) throw ValidationError("calibrate_kernels: calibration region smaller than kernel");
  const int y0 = g.ny / 2 - cy / 2;
  const int z0 = g.nz / 2 - cz / 2;
  const int cols = N * ks * ks;

  InterpKernel K;
  K.N = N;
  K.kernel_size = ks;

  // Calibration rows: kernel footprints fully inside the region with enough acquired taps.
  std::vector<std::pair<int, int>> pos;
  for (int y = y0 + h; y <= y0 + cy - 1 - h; ++y) {
    for (int z = z0 + h; z <= z0 + cz - 1 - h; ++z) {
      int got = 0;
      for (int m = 0; m < N; ++m) {
        for (int dy = -h; dy <= h; ++dy) {
          for (int dz = -h; dz <= h; ++dz) got += acquired(data[m], g.index(y + dy, z + dz));
        }
      }
      if (got >= cfg.min_tap_fraction * cols) pos.emplace_back(y, z);
    }
  }

  Eigen::MatrixXcd A(static_cast<Eigen::Index>(pos.size()), cols);
  for (std::size_t r = 0; r < pos.size(); ++r) {
    const auto [y, z] = pos[r];
    for (int m = 0; m < N; ++m) {
      for (int dy = -h; dy <= h; ++dy) {
        for (int dz = -h; dz <= h; ++dz) {
          const std::size_t i = g.index(y + dy, z + dz);
          A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(K.index(m, dy, dz))) =
              acquired(data[m], i) ? data[m].samples[i] : cd{};
        }
      }
    }
  }
  Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(cols, cols);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(A.adjoint());
  gram.triangularView<Eigen::StrictlyUpper>() = gram.adjoint();

  K.weights.assign(static_cast<std::size_t>(N), std::vector<cd>(static_cast<std::size_t>(cols), cd{}));
  K.residual.assign(static_cast<std::size_t>(N), 0.0);
  K.rows.assign(static_cast<std::size_t>(N), 0);

  for (int n = 0; n < N; ++n) {
    const auto self = static_cast<Eigen::Index>(K.index(n, 0, 0));
    std::vector<Eigen::Index> skip;
    for (std::size_t r = 0; r < pos.size(); ++r) {
      if (!acquired(data[n], g.index(pos[r].first, pos[r].second))) skip.push_back(static_cast<Eigen::Index>(r));
    }
    Eigen::MatrixXcd Gn = gram;
    if (!skip.empty()) {
      Eigen::MatrixXcd S(static_cast<Eigen::Index>(skip.size()), cols);
      for (std::size_t s = 0; s < skip.size(); ++s) S.row(static_cast<Eigen::Index>(s)) = A.row(skip[s]);
      Eigen::MatrixXcd down = Eigen::MatrixXcd::Zero(cols, cols);
      down.selfadjointView<Eigen::Lower>().rankUpdate(S.adjoint());
      down.triangularView<Eigen::StrictlyUpper>() = down.adjoint();
      Gn -= down;
    }
    const std::size_t used = pos.size() - skip.size();
    K.rows[static_cast<std::size_t>(n)] = used;
    if (used == 0) throw ValidationError("calibrate_kernels: no usable calibration rows");

    std::vector<Eigen::Index> keep;
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (c != self) keep.push_back(c);
    }
    const auto P = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXcd M(P, P);
    Eigen::VectorXcd rhs(P);
    for (Eigen::Index a = 0; a < P; ++a) {
      rhs(a) = Gn(keep[static_cast<std::size_t>(a)], self);
      for (Eigen::Index b = 0; b < P; ++b) M(a, b) = Gn(keep[static_cast<std::size_t>(a)], keep[static_cast<std::size_t>(b)]);
    }
    const double tr = M.diagonal().real().sum();
    M.diagonal().array() += cfg.tikhonov_alpha * tr / static_cast<double>(used);
    const Eigen::VectorXcd w = M.ldlt().solve(rhs);
    if (!w.allFinite()) throw NumericalError("calibrate_kernels: non-finite kernel weights");
    for (Eigen::Index a = 0; a < P; ++a) K.weights[n][static_cast<std::size_t>(keep[static_cast<std::size_t>(a)])] = w(a);

    double res = 0.0, nb = 0.0;
    for (std::size_t r = 0; r < pos.size(); ++r) {
      if (!acquired(data[n], g.index(pos[r].first, pos[r].second))) continue;
      cd pred{};
      for (Eigen::Index a = 0; a < P; ++a) pred += A(static_cast<Eigen::Index>(r), keep[static_cast<std::size_t>(a)]) * w(a);
      const cd b = A(static_cast<Eigen::Index>(r), self);
      res += std::norm(pred - b);
      nb += std::norm(b);
    }
    K.residual[static_cast<std::size_t>(n)] = nb > 0.0 ? std::sqrt(res / nb) : 0.0;
  }
  return K;
}

ImageKernel image_domain_kernel(const InterpKernel& k, const GridSpec& grid) {
  const int N = k.N;
  const int h = k.kernel_size / 2;
  if (k.kernel_size > grid.ny || k.kernel_size > grid.nz) throw ValidationError("image_domain_kernel: grid smaller than kernel");
  ImageKernel ik;
  ik.grid = grid;
  ik.N = N;
  ik.g.assign(static_cast<std::size_t>(N * N), ComplexImage());
  const double rootT = std::sqrt(static_cast<double>(grid.total()));
  parallel_for(static_cast<std::size_t>(N * N), [&](std::size_t nm) {
    const int n = static_cast<int>(nm) / N, m = static_cast<int>(nm) % N;
    ComplexImage K(grid, cd{});
    for (int dy = -h; dy <= h; ++dy) {
      for (int dz = -h; dz <= h; ++dz) {
        K(((-dy) % grid.ny + grid.ny) % grid.ny, ((-dz) % grid.nz + grid.nz) % grid.nz) += k.at(n, m, dy, dz);
      }
    }
    ifft2_unitary(K);
    for (auto& v : K) v *= rootT;
    ik.g[nm] = fftshift(K);
  });
  return ik;
}

std::vector<ComplexImage> apply_image_kernel(const ImageKernel& k, const std::vector<ComplexImage>& m) {
  if (static_cast<int>(m.size()) != k.N) throw ValidationError("apply_image_kernel: acquisition count mismatch");
  std::vector<ComplexImage> out(m.size(), ComplexImage(k.grid, cd{}));
  for (int n = 0; n < k.N; ++n) {
    for (int j = 0; j < k.N; ++j) {
      const ComplexImage& g = k.g[static_cast<std::size_t>(n * k.N + j)];
      for (std::size_t i = 0; i < g.size(); ++i) out[n][i] += g[i] * m[j][i];
    }
  }
  return out;
}

std::vector<ComplexImage> joint_soft_threshold(const std::vector<ComplexImage>& c, double tau) {
  if (!(tau >= 0.0)) throw ValidationError("joint_soft_threshold: tau must be non-negative");
  std::vector<ComplexImage> out = c;
  if (c.empty() || tau == 0.0) return out;
  for (std::size_t i = 0; i < c.front().size(); ++i) {
    double s = 0.0;
    for (const auto& img : c) s += std::norm(img[i]);
    const double gnorm = std::sqrt(s);
    const double f = gnorm > 0.0 ? std::max(0.0, 1.0 - tau / gnorm) : 0.0;
    for (auto& img : out) img[i] *= f;
  }
  return out;
}

ComplexImage measure(const ComplexImage& m, const Mask& mask) {
  require_same_grid(m.grid(), mask.grid(), "measure");
  ComplexImage k = fft2_centered_copy(m);
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (!mask[i]) k[i] = cd{};
  }
  return k;
}

ComplexImage measure_adjoint(const ComplexImage& y, const Mask& mask) {
  require_same_grid(y.grid(), mask.grid(), "measure_adjoint");
  ComplexImage k = y;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (!mask[i]) k[i] = cd{};
  }
  ifft2_centered(k);
  return k;
}

cd inner(const std::vector<ComplexImage>& a, const std::vector<ComplexImage>& b) {
  if (a.size() != b.size()) throw ValidationError("inner: size mismatch");
  std::vector<double> re, im;
  for (std::size_t n = 0; n < a.size(); ++n) {
    require_same_grid(a[n].grid(), b[n].grid(), "inner");
    for (std::size_t i = 0; i < a[n].size(); ++i) {
      const cd p = std::conj(a[n][i]) * b[n][i];
      re.push_back(p.real());
      im.push_back(p.imag());
    }
  }
  return {pairwise_sum(re), pairwise_sum(im)};
}

QuadraticSubproblem::QuadraticSubproblem(std::vector<ComplexImage> y, std::vector<Mask> masks,
                                         const ImageKernel& kernel, double lambda0, double split)
    : y_(std::move(y)), masks_(std::move(masks)), grid_(kernel.grid), lambda0_(lambda0), split_(split) {
  const int N = kernel.N;
  if (static_cast<int>(y_.size()) != N || masks_.size() != y_.size()) {
    throw ValidationError("QuadraticSubproblem: acquisition count mismatch");
  }
  const std::size_t T = grid_.total();
  const std::size_t NN = static_cast<std::size_t>(N * N);
  h_.assign(T * NN, cd{});
  q_.assign(T * NN, cd{});
  for (std::size_t i = 0; i < T; ++i) {
    cd* H = &h_[i * NN];
    for (int n = 0; n < N; ++n) {
      for (int m = 0; m < N; ++m) H[n * N + m] = kernel.g[static_cast<std::size_t>(n * N + m)][i] - (n == m ? 1.0 : 0.0);
    }
    cd* Q = &q_[i * NN];
    for (int a = 0; a < N; ++a) {
      for (int b = 0; b < N; ++b) {
        cd s{};
        for (int n = 0; n < N; ++n) s += std::conj(H[n * N + a]) * H[n * N + b];
        Q[a * N + b] = s;
      }
    }
  }
}

std::vector<ComplexImage> QuadraticSubproblem::apply_normal(const std::vector<ComplexImage>& m) const {
  const int N = this->N();
  std::vector<ComplexImage> out(m.size());
  parallel_for(m.size(), [&](std::size_t n) {
    out[n] = measure_adjoint(measure(m[n], masks_[n]), masks_[n]);
  });
  const std::size_t NN = static_cast<std::size_t>(N * N);
  for (std::size_t i = 0; i < grid_.total(); ++i) {
    const cd* Q = &q_[i * NN];
    for (int a = 0; a < N; ++a) {
      cd s{};
      for (int b = 0; b < N; ++b) s += Q[a * N + b] * m[b][i];
      out[a][i] += lambda0_ * s + split_ * m[a][i];
    }
  }
  return out;
}

std::vector<ComplexImage> QuadraticSubproblem::rhs(const std::vector<ComplexImage>& z) const {
  std::vector<ComplexImage> b(y_.size());
  parallel_for(y_.size(), [&](std::size_t n) { b[n] = measure_adjoint(y_[n], masks_[n]); });
  for (std::size_t n = 0; n < b.size(); ++n) {
    for (std::size_t i = 0; i < b[n].size(); ++i) b[n][i] += split_ * z[n][i];
  }
  return b;
}

double QuadraticSubproblem::fidelity(const std::vector<ComplexImage>& m) const {
  const int N = this->N();
  std::vector<ComplexImage> r(m.size());
  parallel_for(m.size(), [&](std::size_t n) {
    r[n] = measure(m[n], masks_[n]);
    for (std::size_t i = 0; i < r[n].size(); ++i) r[n][i] = masks_[n][i] ? y_[n][i] - r[n][i] : cd{};
  });
  double data = norm2(r);
  const std::size_t NN = static_cast<std::size_t>(N * N);
  std::vector<ComplexImage> c(m.size(), ComplexImage(grid_, cd{}));
  for (std::size_t i = 0; i < grid_.total(); ++i) {
    const cd* H = &h_[i * NN];
    for (int a = 0; a < N; ++a) {
      cd s{};
      for (int b = 0; b < N; ++b) s += H[a * N + b] * m[b][i];
      c[a][i] = s;
    }
  }
  return data + lambda0_ * norm2(c);
}

double QuadraticSubproblem::value(const std::vector<ComplexImage>& m, const std::vector<ComplexImage>& z) const {
  std::vector<ComplexImage> d = m;
  axpy(d, -1.0, z);
  return fidelity(m) + split_ * norm2(d);
}

std::vector<ComplexImage> QuadraticSubproblem::gradient(const std::vector<ComplexImage>& m,
                                                        const std::vector<ComplexImage>& z) const {
  std::vector<ComplexImage> g = apply_normal(m);
  axpy(g, -1.0, rhs(z));
  for (auto& img : g) {
    for (auto& v : img) v *= 2.0;
  }
  return g;
}

void QuadraticSubproblem::cg(std::vector<ComplexImage>& m, const std::vector<ComplexImage>& b, int iters,
                             double floor) const {
  std::vector<ComplexImage> r = b;
  axpy(r, -1.0, apply_normal(m));
  std::vector<ComplexImage> p = r;
  double rs = norm2(r);
  const double stop = floor * std::sqrt(norm2(b));
  for (int it = 0; it < iters; ++it) {
    if (std::sqrt(rs) <= stop) break;
    const std::vector<ComplexImage> Ap = apply_normal(p);
    const double pAp = inner(p, Ap).real();
    if (!(pAp > 0.0)) break;
    const double alpha = rs / pAp;
    axpy(m, alpha, p);
    axpy(r, -alpha, Ap);
    const double rs_new = norm2(r);
    const double beta = rs_new / rs;
    for (std::size_t n = 0; n < p.size(); ++n) {
      for (std::size_t i = 0; i < p[n].size(); ++i) p[n][i] = r[n][i] + beta * p[n][i];
    }
    rs = rs_new;
  }
}

ReconResult pe_reconstruct(const std::vector<KSpaceData>& data, const std::vector<SamplingPattern>& patterns,
                           const SamplingDensity& d, const PEConfig& cfg) {
  cfg.validate();
  check_grids(data);
  if (patterns.size() != data.size()) throw ValidationError("pe_reconstruct: need one pattern per dataset");
  const GridSpec g = data.front().grid;
  std::vector<KSpaceData> masked;
  for (std::size_t n = 0; n < data.size(); ++n) masked.push_back(undersample(data[n], patterns[n]));

  NormalizedData nd = normalize_dataset(masked, d);
  ReconResult res;
  res.config = cfg;
  res.scale = nd.scale;
  res.kernel = calibrate_kernels(nd.data, cfg);
  const ImageKernel ik = image_domain_kernel(res.kernel, g);

  std::vector<ComplexImage> y;
  std::vector<Mask> masks;
  for (const auto& k : nd.data) {
    y.push_back(k.samples);
    masks.push_back(k.mask);
  }
  const QuadraticSubproblem qp(y, masks, ik, cfg.lambda0, cfg.split_param);

  std::vector<ComplexImage> m(y.size());
  for (std::size_t n = 0; n < y.size(); ++n) m[n] = measure_adjoint(y[n], masks[n]);
  std::vector<ComplexImage> z = m;
  const double tau = cfg.lambda1 > 0.0 ? cfg.lambda1 / cfg.split_param : 0.0;

  for (int it = 0; it < cfg.outer_iters; ++it) {
    qp.cg(m, qp.rhs(z), cfg.inner_cg_iters, cfg.cg_residual_floor);
    std::vector<ComplexImage> w(m.size());
    if (tau == 0.0) {
      z = m;
    } else {
      parallel_for(m.size(), [&](std::size_t n) { w[n] = wavelet_fwd(m[n]); });
      w = joint_soft_threshold(w, tau);
      parallel_for(m.size(), [&](std::size_t n) { z[n] = wavelet_inv(w[n], g); });
    }
    double obj = qp.fidelity(m);
    if (cfg.lambda1 > 0.0) {
      parallel_for(m.size(), [&](std::size_t n) { w[n] = wavelet_fwd(m[n]); });
      std::vector<double> l21(w.front().size());
      for (std::size_t i = 0; i < l21.size(); ++i) {
        double s = 0.0;
        for (const auto& c : w) s += std::norm(c[i]);
        l21[i] = std::sqrt(s);
      }
      obj += cfg.lambda1 * pairwise_sum(l21);
    }
    if (!std::isfinite(obj)) {
      throw NumericalError("pe_reconstruct: objective became non-finite at outer iteration " + std::to_string(it + 1));
    }
    res.objective_trace.push_back(obj);
  }
  for (auto& img : m) {
    for (auto& v : img) v *= nd.scale;
  }
  res.images = std::move(m);
  return res;
}

} // namespace segsamp
