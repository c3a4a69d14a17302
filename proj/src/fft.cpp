#include "segsamp/fft.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include <fftw3.h>

namespace segsamp {

namespace {

struct PlanCache {
  std::mutex mutex;
  std::map<std::tuple<int, int, int>, fftw_plan> plans;

  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }

  // In-place plan usable with any alignment through fftw_execute_dft.
  fftw_plan get(int ny, int nz, int sign) {
    std::lock_guard lock(mutex);
    auto key = std::make_tuple(ny, nz, sign);
    if (auto it = plans.find(key); it != plans.end()) return it->second;
    fftw_complex* buf = fftw_alloc_complex(static_cast<std::size_t>(ny) * nz);
    fftw_plan p = fftw_plan_dft_2d(ny, nz, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (p == nullptr) throw NumericalError("fft: plan creation failed");
    plans.emplace(key, p);
    return p;
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

void execute(ComplexImage& data, int sign) {
  if (data.empty()) return;
  fftw_plan p = cache().get(data.rows(), data.cols(), sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(p, ptr, ptr);
  const double scale = 1.0 / std::sqrt(static_cast<double>(data.size()));
  for (auto& v : data) v *= scale;
}

ComplexImage circshift(const ComplexImage& x, int sy, int sz) {
  ComplexImage out(x.rows(), x.cols());
  const int ny = x.rows();
  const int nz = x.cols();
  for (int y = 0; y < ny; ++y) {
    const int ty = (y + sy) % ny;
    for (int z = 0; z < nz; ++z) out(ty, (z + sz) % nz) = x(y, z);
  }
  return out;
}

} // namespace

void fft2_unitary(ComplexImage& data) { execute(data, FFTW_FORWARD); }
void ifft2_unitary(ComplexImage& data) { execute(data, FFTW_BACKWARD); }

ComplexImage fftshift(const ComplexImage& x) { return circshift(x, x.rows() / 2, x.cols() / 2); }

ComplexImage ifftshift(const ComplexImage& x) {
  return circshift(x, x.rows() - x.rows() / 2, x.cols() - x.cols() / 2);
}

void fft2_centered(ComplexImage& data) {
  data = ifftshift(data);
  fft2_unitary(data);
  data = fftshift(data);
}

void ifft2_centered(ComplexImage& data) {
  data = ifftshift(data);
  ifft2_unitary(data);
  data = fftshift(data);
}

ComplexImage fft2_centered_copy(const ComplexImage& data) {
  ComplexImage out = data;
  fft2_centered(out);
  return out;
}

ComplexImage ifft2_centered_copy(const ComplexImage& data) {
  ComplexImage out = data;
  ifft2_centered(out);
  return out;
}

} // namespace segsamp
