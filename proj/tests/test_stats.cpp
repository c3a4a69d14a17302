#include <doctest.h>

#include <cmath>
#include <random>

#include "segsamp/patterns.hpp"
#include "segsamp/stats.hpp"

using namespace segsamp;

namespace {

PatternSet set_of(const GridSpec& g, std::vector<Mask> masks, double R = 2.0) {
  PatternSet s;
  s.density = uniform_density(g, 1.0 / R);
  s.density.target_R = R;
  for (auto& m : masks) s.patterns.push_back({g, std::move(m), 0});
  return s;
}

} // namespace

TEST_SUITE("stats") {

TEST_CASE("binomial occupancy: closed forms and normalization") {
  const auto one = binomial_occupancy(1.0, 5);
  for (int t = 0; t < 5; ++t) CHECK(one.probs[t] == 0.0);
  CHECK(one.probs[5] == 1.0);

  const auto q = binomial_occupancy(0.25, 4);
  CHECK(q.probs[0] == 0.31640625);
  CHECK(q.probs[1] == doctest::Approx(4 * 0.25 * 0.421875).epsilon(1e-15));

  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> up(0.0, 1.0);
  std::uniform_int_distribution<int> un(1, 40);
  for (int k = 0; k < 100; ++k) {
    const double p = up(gen);
    const int N = un(gen);
    const auto o = binomial_occupancy(p, N);
    double s = 0.0;
    for (double v : o.probs) {
      CHECK(v >= 0.0);
      s += v;
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
    CHECK(o.probs[0] == std::pow(1.0 - p, N));
    CHECK(o.probs[1] == N * p * std::pow(1.0 - p, N - 1));
  }
  CHECK_THROWS_AS(binomial_occupancy(1.5, 3), ValidationError);
  CHECK_THROWS_AS(binomial_occupancy(0.5, 0), ValidationError);
}

TEST_CASE("theoretical coverage: saturated, empty and uniform densities") {
  const auto full = theoretical_coverage(uniform_density({32, 32}, 1.0), 4);
  CHECK(full.aggregate_pct == doctest::Approx(100.0));
  CHECK(full.overlap_pct == doctest::Approx(100.0));

  SamplingDensity zero = uniform_density({32, 32}, 1.0);
  zero.values.fill(0.0);
  const auto z = theoretical_coverage(zero, 4);
  CHECK(z.aggregate_pct == 0.0);
  CHECK(z.differential_mean == 0.0);
  CHECK(z.overlap_pct == 0.0);

  const auto u = theoretical_coverage(uniform_density({64, 64}, 0.25), 4);
  CHECK(u.aggregate_pct == doctest::Approx(100.0 * (1.0 - 0.31640625)).epsilon(1e-12));
  CHECK(u.differential_mean == doctest::Approx(100.0 * 0.25 * 0.421875).epsilon(1e-12));
  CHECK(theoretical_coverage(uniform_density({64, 64}, 0.25), 1).overlap_pct == 0.0);
}

TEST_CASE("empirical coverage: identical and disjoint patterns") {
  const GridSpec g{16, 16};
  Mask a(g, 0), b(g, 0);
  for (int y = 0; y < 8; ++y) {
    for (int z = 0; z < 16; ++z) a(y, z) = 1;
  }
  for (int y = 8; y < 12; ++y) {
    for (int z = 0; z < 16; ++z) b(y, z) = 1;
  }
  const auto same = empirical_coverage(set_of(g, {a, a}));
  CHECK(same.differential_pct[0] == 0.0);
  CHECK(same.differential_pct[1] == 0.0);
  CHECK(same.overlap_pct == doctest::Approx(50.0));
  CHECK(same.aggregate_pct == doctest::Approx(50.0));

  const auto dis = empirical_coverage(set_of(g, {a, b}));
  CHECK(dis.overlap_pct == 0.0);
  CHECK(dis.aggregate_pct == doctest::Approx(75.0));
  CHECK(dis.differential_pct[0] == doctest::Approx(50.0));
  CHECK(dis.differential_pct[1] == doctest::Approx(25.0));
  CHECK(dis.differential_total_pct == doctest::Approx(75.0));

  const auto norm = empirical_coverage(set_of(g, {a, b}, 4.0), true);
  CHECK(norm.aggregate_pct == doctest::Approx(75.0));
  CHECK(norm.differential_pct[1] == doctest::Approx(100.0));
}

TEST_CASE("empirical coverage rejects mixed grids and empty sets") {
  PatternSet s = set_of({16, 16}, {Mask({16, 16}, 1)});
  s.patterns.push_back({{8, 8}, Mask({8, 8}, 1), 0});
  CHECK_THROWS_AS(empirical_coverage(s), ValidationError);
  CHECK_THROWS_AS(empirical_coverage(PatternSet{}), ValidationError);
}

TEST_CASE("property: random sets agree with theory within 3 sigma") {
  const auto d = design_density({128, 128}, 4.0);
  const int N = 4, seeds = 10;
  const auto th = theoretical_coverage(d, N);
  double var = 0.0;
  for (double p : d.values) {
    const double a = 1.0 - std::pow(1.0 - p, N);
    var += a * (1.0 - a);
  }
  const double T = static_cast<double>(d.grid.total());
  const double sigma = 100.0 * std::sqrt(var) / T / std::sqrt(double(seeds));
  double mean = 0.0;
  for (int s = 1; s <= seeds; ++s) mean += empirical_coverage(generate_random_set(d, N, s, 1)).aggregate_pct;
  mean /= seeds;
  CHECK(std::abs(mean - th.aggregate_pct) <= 3.0 * sigma);
}

TEST_CASE("expected coverage: closed form, recursion and limits") {
  for (double p : {0.05, 0.1, 0.25, 0.5, 0.9, 1.0}) {
    for (double mu : {0.0, 0.2, 0.5, 1.0}) {
      const auto c = expected_coverage_curve(p, mu, 12);
      const auto r = expected_coverage_recursion(p, mu, 12);
      REQUIRE(c.size() == 12);
      CHECK(c[0] == doctest::Approx(p).epsilon(1e-15));
      for (int n = 1; n <= 12; ++n) {
        const double closed = expected_coverage_unclipped(p, mu, n);
        CHECK(std::abs(closed - r[n - 1]) <= 1e-12);
        CHECK(c[n - 1] == std::min(1.0, closed));
        if (mu == 1.0) CHECK(std::abs(c[n - 1] - (1.0 - std::pow(1.0 - p, n))) <= 1e-12);
        if (mu == 0.0) CHECK(closed == doctest::Approx(n * p).epsilon(1e-14));
      }
    }
  }
  CHECK(expected_coverage_curve(0.25, 0.0, 4)[3] == 1.0);
  // mu = 1 matches the occupancy aggregate.
  CHECK(expected_coverage_curve(0.3, 1.0, 5)[4] == doctest::Approx(1.0 - binomial_occupancy(0.3, 5).probs[0]));
}

} // TEST_SUITE
