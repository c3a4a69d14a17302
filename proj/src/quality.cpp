#include "segsamp/quality.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace segsamp {

namespace {

constexpr int kWin = 11;
constexpr double kSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;

void check_pair(const RealImage& a, const RealImage& b, const char* what) {
  require_same_grid(a.grid(), b.grid(), what);
  if (a.empty()) throw ValidationError(std::string(what) + ": empty image");
}

double max_abs(const RealImage& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> gaussian_window() {
  std::vector<double> w(kWin * kWin);
  const int h = kWin / 2;
  double s = 0.0;
  for (int i = 0; i < kWin; ++i) {
    for (int j = 0; j < kWin; ++j) {
      const double r2 = (i - h) * (i - h) + (j - h) * (j - h);
      w[i * kWin + j] = std::exp(-r2 / (2.0 * kSigma * kSigma));
      s += w[i * kWin + j];
    }
  }
  for (double& v : w) v /= s;
  return w;
}

} // namespace

RealImage pnorm_combine(const std::vector<ComplexImage>& images, double p) {
  if (images.empty()) throw ValidationError("pnorm_combine: no images");
  if (!(p >= 1.0)) throw ValidationError("pnorm_combine: p must be >= 1");
  for (const auto& img : images) require_same_grid(images.front().grid(), img.grid(), "pnorm_combine");
  RealImage out(images.front().grid(), 0.0);
  const bool inf = p >= 1e6;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double acc = 0.0;
    for (const auto& img : images) {
      const double a = std::abs(img[i]);
      acc = inf ? std::max(acc, a) : acc + std::pow(a, p);
    }
    out[i] = inf ? acc : std::pow(acc, 1.0 / p);
  }
  return out;
}

RealImage magnitude(const ComplexImage& img) {
  RealImage out(img.grid(), 0.0);
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = std::abs(img[i]);
  return out;
}

RealImage mse_map(const RealImage& test, const RealImage& ref) {
  check_pair(test, ref, "mse_map");
  RealImage out(ref.grid(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = test[i] - ref[i];
    out[i] = d * d;
  }
  return out;
}

double psnr(const RealImage& test, const RealImage& ref) {
  check_pair(test, ref, "psnr");
  const double peak = max_abs(ref);
  if (!(peak > 0.0)) throw ValidationError("psnr: reference image is zero");
  const RealImage e = mse_map(test, ref);
  const double mse = pairwise_sum(e.flat()) / static_cast<double>(e.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

double ssim(const RealImage& test, const RealImage& ref) {
  check_pair(test, ref, "ssim");
  const int ny = ref.rows(), nz = ref.cols();
  if (ny < kWin || nz < kWin) throw ValidationError("ssim: images must be at least 11x11");
  const double L = max_abs(ref);
  const double C1 = (kK1 * L) * (kK1 * L);
  const double C2 = (kK2 * L) * (kK2 * L);
  const std::vector<double> w = gaussian_window();
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(ny - kWin + 1) * (nz - kWin + 1));
  for (int y = 0; y + kWin <= ny; ++y) {
    for (int z = 0; z + kWin <= nz; ++z) {
      double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
      for (int i = 0; i < kWin; ++i) {
        for (int j = 0; j < kWin; ++j) {
          const double wt = w[i * kWin + j];
          const double a = test(y + i, z + j), b = ref(y + i, z + j);
          mx += wt * a;
          my += wt * b;
          xx += wt * a * a;
          yy += wt * b * b;
          xy += wt * a * b;
        }
      }
      const double vx = xx - mx * mx, vy = yy - my * my, cxy = xy - mx * my;
      const double num = (2 * mx * my + C1) * (2 * cxy + C2);
      const double den = (mx * mx + my * my + C1) * (vx + vy + C2);
      vals.push_back(den > 0.0 ? num / den : 1.0);
    }
  }
  return 100.0 * pairwise_sum(vals) / static_cast<double>(vals.size());
}

QualityReport evaluate(const RealImage& test, const RealImage& ref, bool combined, int acquisition_index) {
  QualityReport r;
  r.mse_map = mse_map(test, ref);
  r.mse = pairwise_sum(r.mse_map.flat()) / static_cast<double>(r.mse_map.size());
  r.psnr_db = psnr(test, ref);
  r.ssim_pct = ssim(test, ref);
  r.combined = combined;
  r.acquisition_index = combined ? -1 : acquisition_index;
  return r;
}

std::string quality_metadata_json() {
  nlohmann::ordered_json j;
  j["psnr"] = {{"peak", "max|ref|"}, {"cap_db", kPsnrCap}};
  j["ssim"] = {{"window", "gaussian"}, {"size", kWin}, {"sigma", kSigma}, {"K1", kK1}, {"K2", kK2},
               {"dynamic_range", "max|ref|"}, {"windows", "valid"}, {"scale", "percent"}};
  return j.dump();
}

} // namespace segsamp
