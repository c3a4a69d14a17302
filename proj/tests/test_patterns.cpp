#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <set>

#include "segsamp/parallel.hpp"
#include "segsamp/patterns.hpp"
#include "segsamp/stats.hpp"

using namespace segsamp;

namespace {

// |sum_k mask(k) e^{2 pi i k.x / n}| for every shift x, by direct summation.
std::vector<double> brute_psf_magnitude(const Mask& m) {
  const int ny = m.rows(), nz = m.cols();
  std::vector<double> out(static_cast<std::size_t>(ny) * nz);
  for (int x = 0; x < ny; ++x) {
    for (int y = 0; y < nz; ++y) {
      std::complex<double> s{};
      for (int a = 0; a < ny; ++a) {
        for (int b = 0; b < nz; ++b) {
          if (!m(a, b)) continue;
          const double ph = 2.0 * std::numbers::pi * (double(a) * x / ny + double(b) * y / nz);
          s += std::polar(1.0, ph);
        }
      }
      out[static_cast<std::size_t>(x) * nz + y] = std::abs(s);
    }
  }
  return out;
}

double pearson(const Mask& a, const Mask& b) {
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0, sab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
    sab += a[i] * b[i];
  }
  const double ma = sa / n, mb = sb / n;
  const double cov = sab / n - ma * mb;
  const double va = ma - ma * ma, vb = mb - mb * mb;
  return cov / std::sqrt(va * vb);
}

SamplingDensity disk_only(const GridSpec& g, double frac) {
  SamplingDensity d = uniform_density(g, 1.0);
  d.center_fraction = frac;
  for (int y = 0; y < g.ny; ++y) {
    for (int z = 0; z < g.nz; ++z) d.values(y, z) = d.in_nyquist_disk(y, z) ? 1.0 : 0.0;
  }
  return d;
}

} // namespace

TEST_SUITE("patterns") {

TEST_CASE("strategy names round trip") {
  for (Strategy s : {Strategy::random, Strategy::low_corr, Strategy::segregated}) CHECK(parse_strategy(to_string(s)) == s);
  CHECK(parse_strategy("lowcorr") == Strategy::low_corr);
  CHECK_THROWS_AS(parse_strategy("poisson"), ValidationError);
}

TEST_CASE("draw_pattern: full and disk-only densities") {
  const auto one = uniform_density({32, 40}, 1.0);
  for (std::uint64_t s : {1ULL, 99ULL, 123456789ULL}) CHECK(draw_pattern(one, s).count() == 32u * 40u);

  const auto d = disk_only({64, 64}, 0.2);
  const auto p = draw_pattern(d, 7);
  for (int y = 0; y < 64; ++y) {
    for (int z = 0; z < 64; ++z) REQUIRE(p.mask(y, z) == (d.in_nyquist_disk(y, z) ? 1 : 0));
  }
}

TEST_CASE("draw_pattern: sample count within 3 sigma of the density mass") {
  const auto d = design_density({256, 256}, 4.0);
  double var = 0.0;
  for (double p : d.values) var += p * (1.0 - p);
  const double sigma = std::sqrt(var);
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const double c = static_cast<double>(draw_pattern(d, s).count());
    CHECK(std::abs(c - 16384.0) <= 3.0 * sigma);
  }
}

TEST_CASE("draw_pattern: deterministic per seed, distinct across seeds") {
  const auto d = design_density({64, 64}, 3.0);
  CHECK(draw_pattern(d, 5).mask == draw_pattern(d, 5).mask);
  CHECK(draw_pattern(d, 5).mask != draw_pattern(d, 6).mask);
}

TEST_CASE("psf_metrics: special masks") {
  SamplingPattern full{{16, 16}, Mask({16, 16}, 1), 0};
  const auto f = psf_metrics(full);
  CHECK(f.r_psf == kRpsfCap);
  CHECK(f.aliasing_energy == doctest::Approx(0.0).epsilon(1e-12));

  SamplingPattern dec{{32, 32}, Mask({32, 32}, 0), 0};
  for (int y = 0; y < 32; y += 2) {
    for (int z = 0; z < 32; ++z) dec.mask(y, z) = 1;
  }
  CHECK(std::abs(psf_metrics(dec).r_psf - 1.0) <= 1e-9);

  SamplingPattern empty{{16, 16}, Mask({16, 16}, 0), 0};
  CHECK_THROWS_AS(psf_metrics(empty), ValidationError);
}

TEST_CASE("psf_metrics matches a direct DFT on a 64x64 random mask") {
  const auto d = design_density({64, 64}, 4.0);
  for (std::uint64_t seed : {3ULL, 17ULL}) {
    const auto p = draw_pattern(d, seed);
    const auto mag = brute_psf_magnitude(p.mask);
    const double peak = mag[0];
    double side = 0.0, energy = 0.0;
    for (std::size_t i = 1; i < mag.size(); ++i) {
      side = std::max(side, mag[i]);
      energy += mag[i] * mag[i];
    }
    const auto m = psf_metrics(p);
    CHECK(std::abs(m.r_psf - peak / side) <= 1e-9 * (peak / side));
    CHECK(std::abs(m.aliasing_energy - energy / (peak * peak)) <= 1e-9 * (energy / (peak * peak)));
    // Parseval closed form used for candidate ranking.
    CHECK(std::abs(m.aliasing_energy - aliasing_energy_from_count(p.count(), 4096)) <= 1e-9);
  }
}

TEST_CASE("random set: single candidate equals independent draws") {
  const auto d = design_density({64, 64}, 4.0);
  const auto set = generate_random_set(d, 4, 11, 1);
  REQUIRE(set.size() == 4);
  for (int n = 0; n < 4; ++n) {
    CHECK(set.patterns[n].mask == draw_pattern(d, candidate_seed(11, n, 0)).mask);
  }
}

TEST_CASE("random set: selected aliasing energy is at most the candidate median") {
  const auto d = design_density({128, 128}, 4.0);
  const int C = 101;
  const auto set = generate_random_set(d, 3, 5, C);
  for (int n = 0; n < 3; ++n) {
    auto e = candidate_aliasing_energies(d, 5, n, C);
    const double chosen = psf_metrics(set.patterns[n]).aliasing_energy;
    std::nth_element(e.begin(), e.begin() + C / 2, e.end());
    CHECK(chosen <= e[C / 2] + 1e-12);
    CHECK(chosen == doctest::Approx(*std::min_element(e.begin(), e.end())).epsilon(1e-12));
  }
}

TEST_CASE("low correlation: N=1 keeps the least-aliased candidate") {
  const auto d = design_density({64, 64}, 4.0);
  const auto all = generate_lowcorr_set(d, 8, 21, 8, 8);
  std::size_t best = 0;
  for (const auto& p : all.patterns) best = std::max(best, p.count());
  const auto one = generate_lowcorr_set(d, 1, 21, 8, 8);
  REQUIRE(one.size() == 1);
  CHECK(one.patterns[0].count() == best);
}

TEST_CASE("low correlation: N=2 greedy equals exhaustive pair search over the shortlist") {
  const auto d = design_density({64, 64}, 4.0);
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    CAPTURE(seed);
    // With n_total = n_shortlist = N = 8 the set is the whole shortlist.
    const auto pool = generate_lowcorr_set(d, 8, seed, 8, 8);
    double best = 1e300;
    std::set<std::uint64_t> want;
    for (int i = 0; i < 8; ++i) {
      for (int j = i + 1; j < 8; ++j) {
        const double c = pearson(pool.patterns[i].mask, pool.patterns[j].mask);
        if (c < best) {
          best = c;
          want = {pool.patterns[i].seed, pool.patterns[j].seed};
        }
      }
    }
    const auto pair = generate_lowcorr_set(d, 2, seed, 8, 8);
    const std::set<std::uint64_t> got{pair.patterns[0].seed, pair.patterns[1].seed};
    CHECK(got == want);
    CHECK(mask_correlation(pair.patterns[0], pair.patterns[1]) == doctest::Approx(best).epsilon(1e-12));
  }
  CHECK_THROWS_AS(generate_lowcorr_set(d, 5, 1, 8, 4), ValidationError);
}

TEST_CASE("conditional density: hand-evaluated annuli") {
  const GridSpec g{64, 64};
  const auto d = uniform_density(g, 0.25);
  const auto bins = AnnulusBins::for_grid(g);
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(bins.n_bins));
  for (std::size_t i = 0; i < g.total(); ++i) members[static_cast<std::size_t>(bins.bin_of[i])].push_back(i);

  SUBCASE("K = 0.5, mu = 0: covered 0, uncovered 0.5") {
    CoverageCount cov(g);
    cov.accumulated = 1;
    std::vector<int> used;
    for (int b = 0; b < bins.n_bins; ++b) {
      const auto& m = members[static_cast<std::size_t>(b)];
      if (m.size() < 8 || m.size() % 2) continue;
      for (std::size_t k = 0; k < m.size() / 2; ++k) cov.counts[m[k]] = 1;
      used.push_back(b);
    }
    REQUIRE(!used.empty());
    const auto u = update_conditional_density(d, cov, 0.0);
    for (int b : used) {
      double mass = 0.0;
      for (std::size_t i : members[static_cast<std::size_t>(b)]) {
        CHECK(u.values[i] == doctest::Approx(cov.counts[i] ? 0.0 : 0.5).epsilon(1e-12));
        mass += u.values[i];
      }
      CHECK(mass / members[static_cast<std::size_t>(b)].size() == doctest::Approx(0.25).epsilon(1e-12));
    }
  }

  SUBCASE("K = 0.9, mu = 0: corrected rule gives 1 and 1/6") {
    CoverageCount cov(g);
    cov.accumulated = 1;
    std::vector<int> used;
    for (int b = 0; b < bins.n_bins; ++b) {
      const auto& m = members[static_cast<std::size_t>(b)];
      if (m.size() < 10 || m.size() % 10) continue;
      for (std::size_t k = 0; k < m.size() * 9 / 10; ++k) cov.counts[m[k]] = 1;
      used.push_back(b);
    }
    REQUIRE(!used.empty());
    const auto u = update_conditional_density(d, cov, 0.0);
    const double covered = (0.9 - 1.0 + 0.25) / 0.9;
    for (int b : used) {
      double mass = 0.0;
      for (std::size_t i : members[static_cast<std::size_t>(b)]) {
        CHECK(u.values[i] == doctest::Approx(cov.counts[i] ? covered : 1.0).epsilon(1e-12));
        mass += u.values[i];
      }
      CHECK(mass / members[static_cast<std::size_t>(b)].size() == doctest::Approx(0.25).epsilon(1e-12));
    }
  }

  SUBCASE("fully covered annulus reverts to the base density") {
    CoverageCount cov(g);
    cov.accumulated = 2;
    for (auto& c : cov.counts) c = 1;
    const auto u = update_conditional_density(d, cov, 0.0);
    for (double v : u.values) CHECK(v == 0.25);
  }
}

TEST_CASE("conditional density: mu = 1 is the identity and mu outside [0,1] is rejected") {
  const auto d = design_density({64, 64}, 4.0);
  CoverageCount cov(d.grid);
  cov.add(draw_pattern(d, 3));
  CHECK(update_conditional_density(d, cov, 1.0).values == d.values);
  CHECK_THROWS_AS(update_conditional_density(d, cov, 1.5), ValidationError);
  CHECK_THROWS_AS(update_conditional_density(d, cov, -0.1), ValidationError);
}

TEST_CASE("property: annulus mass is preserved by the update") {
  const auto d = design_density({128, 128}, 4.0);
  const auto bins = AnnulusBins::for_grid(d.grid);
  for (double mu : {0.0, 0.3, 0.7}) {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
      CoverageCount cov(d.grid);
      for (int n = 0; n < 3; ++n) {
        cov.add(draw_pattern(d, seed * 10 + n));
        const auto u = update_conditional_density(d, cov, mu);
        std::vector<double> m0(bins.n_bins), m1(bins.n_bins);
        std::vector<char> zero_cov(bins.n_bins, 0), partial_uncov(bins.n_bins, 0);
        for (std::size_t i = 0; i < d.grid.total(); ++i) {
          const int b = bins.bin_of[i];
          m0[b] += d.values[i];
          m1[b] += u.values[i];
          REQUIRE(u.values[i] >= 0.0);
          REQUIRE(u.values[i] <= 1.0);
          if (cov.counts[i] > 0 && u.values[i] == 0.0 && d.values[i] > 0.0) zero_cov[b] = 1;
          if (cov.counts[i] == 0 && u.values[i] < 1.0) partial_uncov[b] = 1;
        }
        for (int b = 0; b < bins.n_bins; ++b) {
          CAPTURE(b);
          // Corrected rule with the covered value clipped at 0 adds mass.
          if (zero_cov[b] && !partial_uncov[b]) {
            CHECK(m1[b] >= m0[b] - 1e-9);
          } else {
            CHECK(std::abs(m1[b] - m0[b]) <= 1e-9 * std::max(1.0, m0[b]));
          }
        }
        for (int y = 0; y < d.grid.ny; ++y) {
          for (int z = 0; z < d.grid.nz; ++z) {
            if (d.in_nyquist_disk(y, z)) REQUIRE(u.values(y, z) == 1.0);
          }
        }
      }
    }
  }
}

TEST_CASE("segregated with mu = 1 reproduces the random set") {
  const auto d = design_density({64, 64}, 4.0);
  const auto r = generate_random_set(d, 5, 42, 30);
  const auto s = generate_segregated_set(d, 5, 1.0, 42, 30);
  for (int n = 0; n < 5; ++n) CHECK(r.patterns[n].mask == s.patterns[n].mask);
  CHECK(s.mu.has_value());
  CHECK(*s.mu == 1.0);
}

TEST_CASE("segregated R=4 N=8 mu=0 on 256x256 covers every location") {
  const auto d = design_density({256, 256}, 4.0);
  const auto s = generate_segregated_set(d, 8, 0.0, 1);
  CHECK(empirical_coverage(s).aggregate_pct == 100.0);
  for (const auto& p : s.patterns) {
    for (int y = 0; y < 256; ++y) {
      for (int z = 0; z < 256; ++z) {
        if (d.in_nyquist_disk(y, z)) REQUIRE(p.mask(y, z) == 1);
      }
    }
  }
}

TEST_CASE("property: coverage grows with N and shrinks with mu") {
  const auto d = design_density({64, 64}, 4.0);
  std::vector<double> by_mu;
  for (double mu : {0.0, 0.5, 1.0}) {
    double acc = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto s = generate_segregated_set(d, 6, mu, seed, 20);
      double prev = 0.0;
      for (int n = 1; n <= 6; ++n) {
        PatternSet sub = s;
        sub.patterns.resize(n);
        const double a = empirical_coverage(sub).aggregate_pct;
        REQUIRE(a >= prev);
        prev = a;
      }
      PatternSet four = s;
      four.patterns.resize(4);
      acc += empirical_coverage(four).aggregate_pct;
    }
    by_mu.push_back(acc / 10.0);
  }
  CHECK(by_mu[0] >= by_mu[1]);
  CHECK(by_mu[1] >= by_mu[2]);
}

TEST_CASE("determinism: pattern sets do not depend on the worker count") {
  const auto d = design_density({96, 96}, 4.0);
  set_worker_count(1);
  const auto s1 = generate_segregated_set(d, 4, 0.0, 9, 64);
  const auto l1 = generate_lowcorr_set(d, 3, 9, 200, 40);
  set_worker_count(4);
  const auto s4 = generate_segregated_set(d, 4, 0.0, 9, 64);
  const auto l4 = generate_lowcorr_set(d, 3, 9, 200, 40);
  set_worker_count(0);
  for (int n = 0; n < 4; ++n) CHECK(s1.patterns[n].mask == s4.patterns[n].mask);
  for (int n = 0; n < 3; ++n) CHECK(l1.patterns[n].mask == l4.patterns[n].mask);
}

TEST_CASE("argument validation") {
  const auto d = design_density({64, 64}, 4.0);
  CHECK_THROWS_AS(generate_random_set(d, 0, 1), ValidationError);
  CHECK_THROWS_AS(generate_random_set(d, 2, 1, 0), ValidationError);
  CHECK_THROWS_AS(generate_segregated_set(d, 2, 1.5, 1), ValidationError);
}

} // TEST_SUITE
