#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <set>

#include "segsamp/phantom.hpp"

using namespace segsamp;

namespace {

constexpr double kPi = std::numbers::pi;

const TissueParams& tissue(const std::vector<TissueParams>& t, const std::string& name) {
  for (const auto& x : t) {
    if (x.name == name) return x;
  }
  throw std::runtime_error("no tissue " + name);
}

std::filesystem::path temp_dir(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() / ("segsamp_test_" + tag);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

} // namespace

TEST_SUITE("phantom") {

TEST_CASE("tissue tables") {
  const auto b = tissue_table(TissuePreset::bssfp_set);
  REQUIRE(b.size() == 6);
  CHECK(tissue(b, "gray_matter").T1 == 1300);
  CHECK(tissue(b, "gray_matter").T2 == 110);
  CHECK(tissue(b, "gray_matter").PD == 0.86);
  CHECK(tissue(b, "csf").T1 == 3000);
  CHECK(tissue(b, "csf").T2 == 1000);
  const auto t = tissue_table(TissuePreset::t1_set);
  CHECK(tissue(t, "white_matter").T1 == 500);
  CHECK(tissue(t, "white_matter").T2 == 70);
  CHECK(tissue(t, "csf").T1 == 2570);
  CHECK(tissue(t, "csf").T2 == 330);
  for (const auto& x : b) CHECK_NOTHROW(x.validate());
  for (const auto& x : t) CHECK_NOTHROW(x.validate());
  CHECK_THROWS_AS((TissueParams{"bad", 50, 80, 1.0}.validate()), ValidationError);
  CHECK_THROWS_AS((TissueParams{"bad", 500, 80, 1.5}.validate()), ValidationError);
  CHECK(parse_tissue_preset(to_string(TissuePreset::t1_set)) == TissuePreset::t1_set);
}

TEST_CASE("bSSFP signal: shift identity and magnitude periodicity") {
  const auto tissues = tissue_table(TissuePreset::bssfp_set);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> ang(-4 * kPi, 4 * kPi);
  std::uniform_int_distribution<int> pick(0, 5);
  for (int k = 0; k < 10000; ++k) {
    const auto& t = tissues[pick(gen)];
    const double phi = ang(gen), dphi = ang(gen);
    const cd a = bssfp_signal(t, 45, 5, phi, dphi);
    const cd b = bssfp_signal(t, 45, 5, phi + dphi, 0.0);
    REQUIRE(a == b);
    REQUIRE(std::abs(std::abs(bssfp_signal(t, 45, 5, phi, 0)) - std::abs(bssfp_signal(t, 45, 5, phi + 2 * kPi, 0))) <=
            1e-12);
  }
}

TEST_CASE("bSSFP signal: white-matter band profile regression") {
  const TissueParams wm{"white_matter", 1000, 80, 0.77};
  double lo = 1e300, hi = 0.0, at_lo = 0.0, at_hi = 0.0;
  for (int i = 0; i < 4096; ++i) {
    const double phi = 2 * kPi * i / 4096.0;
    const double m = std::abs(bssfp_signal(wm, 45, 5, phi, 0));
    if (m < lo) {
      lo = m;
      at_lo = phi;
    }
    if (m > hi) {
      hi = m;
      at_hi = phi;
    }
  }
  // Regression values: null at phi = 0, pass band peak at phi = pi.
  CHECK(at_lo == 0.0);
  CHECK(at_hi == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(hi / lo == doctest::Approx(21.838817310002412).epsilon(1e-9));
}

TEST_CASE("spin-echo signal closed forms and monotonicity") {
  const TissueParams csf{"csf", 2570, 330, 1.0};
  CHECK(se_signal(csf, 575, 0) == cd(0.0, 1.0 - std::exp(-575.0 / 2570.0)));
  CHECK(std::abs(std::abs(se_signal(csf, 1e9, 40)) - std::exp(-40.0 / 330.0)) <= 1e-9);
  CHECK(std::abs(se_signal(csf, 575, 14)) ==
        doctest::Approx((1 - std::exp(-575.0 / 2570)) * std::exp(-14.0 / 330)).epsilon(1e-14));
  for (const auto& t : tissue_table(TissuePreset::t1_set)) {
    CHECK(std::abs(se_signal(t, 2800, 60)) > std::abs(se_signal(t, 2800, 100)));
    CHECK(std::abs(se_signal(t, 2800, 100)) > std::abs(se_signal(t, 2800, 140)));
    CHECK(std::abs(se_signal(t, 1000, 60)) < std::abs(se_signal(t, 2000, 60)));
  }
}

TEST_CASE("protocol presets and validation") {
  const auto b = Protocol::bssfp(4);
  CHECK(b.N() == 4);
  CHECK(b.TE == 2.5);
  CHECK(b.phase_cycles[1] == doctest::Approx(kPi / 2));
  CHECK(b.validate().empty());
  const auto t2 = Protocol::t2_se();
  CHECK(t2.N() == 3);
  CHECK(t2.TE_list == std::vector<double>{60, 100, 140});
  CHECK(Protocol::t1_se().N() == 1);
  CHECK(Protocol::t1_se().TR == 575);
  Protocol short_tr = t2;
  short_tr.TR = 300;
  CHECK(short_tr.validate().size() == 1);
  Protocol bad = b;
  bad.TE = 1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK_THROWS_AS(Protocol::preset("flash", 2), ValidationError);
}

TEST_CASE("rendering: zero off-resonance and spin-echo contrasts") {
  PhantomSpec s = make_analytic_phantom({64, 64}, TissuePreset::bssfp_set);
  s.b0_map.fill(0.0);
  const auto proto = Protocol::bssfp(4);
  const auto imgs = render_acquisitions(s, proto);
  REQUIRE(imgs.size() == 4);
  for (int n = 0; n < 4; ++n) {
    for (std::size_t i = 0; i < imgs[n].size(); ++i) {
      const int l = s.labels[i];
      const cd want = l == 0 ? cd{} : bssfp_signal(s.tissues[l - 1], 45, 5, 0.0, proto.phase_cycles[n]);
      REQUIRE(imgs[n][i] == want);
    }
  }

  const PhantomSpec t = make_analytic_phantom({64, 64}, TissuePreset::bssfp_set);
  const auto se = render_acquisitions(t, Protocol::t2_se());
  for (std::size_t i = 0; i < se[0].size(); ++i) {
    if (t.labels[i] == 0) continue;
    REQUIRE(std::abs(se[0][i]) > std::abs(se[1][i]));
    REQUIRE(std::abs(se[1][i]) > std::abs(se[2][i]));
  }
}

TEST_CASE("analytic phantom: tissues, off-resonance statistics and band shifts") {
  const auto s = make_analytic_phantom({128, 128}, TissuePreset::bssfp_set);
  CHECK_NOTHROW(s.validate());
  std::set<int> labels(s.labels.begin(), s.labels.end());
  CHECK(labels == std::set<int>{0, 1, 2, 3, 4, 5, 6});
  double sum = 0, sq = 0;
  int n = 0;
  for (std::size_t i = 0; i < s.b0_map.size(); ++i) {
    if (!s.labels[i]) continue;
    sum += s.b0_map[i];
    sq += s.b0_map[i] * s.b0_map[i];
    ++n;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(mean) < 1e-6);
  CHECK(std::abs(sd - 62.0) <= 0.05 * 62.0);

  // The darkest phase cycle varies across the object: bands move with dphi.
  const auto imgs = render_acquisitions(s, Protocol::bssfp(4));
  std::set<int> darkest;
  for (std::size_t i = 0; i < imgs[0].size(); ++i) {
    if (!s.labels[i]) continue;
    int best = 0;
    for (int k = 1; k < 4; ++k) {
      if (std::abs(imgs[k][i]) < std::abs(imgs[best][i])) best = k;
    }
    darkest.insert(best);
  }
  CHECK(darkest.size() == 4);
  CHECK_THROWS_AS(make_analytic_phantom({16, 64}, TissuePreset::t1_set), ValidationError);
}

TEST_CASE("k-space transform: delta, Parseval and round trip") {
  ComplexImage delta({32, 32}, cd{});
  delta(16, 16) = 1.0;
  const auto k = forward_kspace(delta);
  for (const cd& v : k.samples) CHECK(std::abs(std::abs(v) - 1.0 / 32.0) <= 1e-12);

  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  ComplexImage img({48, 40}, cd{});
  for (auto& v : img) v = {nd(gen), nd(gen)};
  const auto ki = forward_kspace(img, 2);
  CHECK(ki.acquisition_index == 2);
  double e0 = 0, e1 = 0;
  for (const auto& v : img) e0 += std::norm(v);
  for (const auto& v : ki.samples) e1 += std::norm(v);
  CHECK(std::abs(std::sqrt(e0) - std::sqrt(e1)) <= 1e-10 * std::sqrt(e0));
  const auto back = inverse_kspace(ki);
  double err = 0;
  for (std::size_t i = 0; i < img.size(); ++i) err = std::max(err, std::abs(back[i] - img[i]));
  CHECK(err <= 1e-10);
}

TEST_CASE("noise: identity at zero, variance, determinism") {
  KSpaceData z{{1000, 1000}, ComplexImage({1000, 1000}, cd{}), 0, {}};
  CHECK(add_noise(z, 0.0, 5).samples == z.samples);
  const auto n = add_noise(z, 0.01, 5);
  double m2 = 0, re2 = 0;
  for (const auto& v : n.samples) {
    m2 += std::norm(v);
    re2 += v.real() * v.real();
  }
  m2 /= 1e6;
  re2 /= 1e6;
  CHECK(std::abs(m2 - 0.01) <= 0.01 * 0.01);
  CHECK(std::abs(re2 - 0.005) <= 0.02 * 0.005);
  CHECK(add_noise(z, 0.01, 5).samples == n.samples);
  CHECK(add_noise(z, 0.01, 6).samples != n.samples);
  CHECK_THROWS_AS(add_noise(z, -1.0, 5), ValidationError);
}

TEST_CASE("label volume: round trip, dims mismatch, background only") {
  const auto dir = temp_dir("labels");
  const auto s = make_analytic_phantom({64, 48}, TissuePreset::t1_set);
  save_label_volume(s, dir / "head.raw");
  const auto back = load_label_volume(dir / "head.raw", tissue_table(TissuePreset::t1_set));
  CHECK(back.labels == s.labels);
  CHECK(back.grid == s.grid);
  for (double b : back.b0_map) CHECK(b == 0.0);

  std::filesystem::resize_file(dir / "head.raw", 64 * 48 - 5);
  CHECK_THROWS_AS(load_label_volume(dir / "head.raw", tissue_table(TissuePreset::t1_set)), ValidationError);

  PhantomSpec empty = s;
  empty.labels.fill(0);
  save_label_volume(empty, dir / "empty.raw");
  const auto e = load_label_volume(dir / "empty.raw", tissue_table(TissuePreset::t1_set));
  for (const auto& img : render_acquisitions(e, Protocol::t1_se())) {
    for (const auto& v : img) CHECK(v == cd{});
  }
  std::filesystem::remove_all(dir);
}

} // TEST_SUITE
