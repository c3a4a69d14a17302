#include "segsamp/stats.hpp"

#include <algorithm>
#include <cmath>

namespace segsamp {

namespace {

void check_p(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p_o must lie in [0, 1]");
}

void check_mu(double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw ValidationError("mu must lie in [0, 1]");
}

double pct(double num, double den) { return den > 0.0 ? 100.0 * num / den : 0.0; }

// Per-location accumulators, summed per annulus and over the grid.
struct Sums {
  std::vector<double> agg, uniq, over;
};

void summarize(CoverageReport& r, const GridSpec& g, const Sums& s, double scale) {
  const AnnulusBins bins = AnnulusBins::for_grid(g);
  const std::size_t B = static_cast<std::size_t>(bins.n_bins);
  const double over_den = r.N > 1 ? static_cast<double>(r.N - 1) : 0.0;

  r.aggregate_pct = pct(pairwise_sum(s.agg), static_cast<double>(g.total()));
  r.differential_total_pct = pct(pairwise_sum(s.uniq), static_cast<double>(g.total())) * scale;
  r.overlap_pct = over_den > 0.0 ? pct(pairwise_sum(s.over), static_cast<double>(g.total()) * over_den) * scale : 0.0;

  std::vector<std::vector<double>> a(B), u(B), o(B);
  for (std::size_t i = 0; i < g.total(); ++i) {
    const auto b = static_cast<std::size_t>(bins.bin_of[i]);
    a[b].push_back(s.agg[i]);
    u[b].push_back(s.uniq[i]);
    o[b].push_back(s.over[i]);
  }
  for (std::size_t b = 0; b < B; ++b) {
    if (bins.cells[b] == 0) continue;
    AnnulusCoverage ac;
    ac.kr_center = bins.center(static_cast<int>(b));
    ac.cells = bins.cells[b];
    const double n = static_cast<double>(ac.cells);
    ac.aggregate_pct = pct(pairwise_sum(a[b]), n);
    ac.differential_pct = pct(pairwise_sum(u[b]), n) * scale;
    ac.overlap_pct = over_den > 0.0 ? pct(pairwise_sum(o[b]), n * over_den) * scale : 0.0;
    r.annuli.push_back(ac);
  }
}

void finish_differential(CoverageReport& r) {
  const double n = static_cast<double>(r.differential_pct.size());
  double m = 0.0;
  for (double v : r.differential_pct) m += v;
  m /= n;
  double var = 0.0;
  for (double v : r.differential_pct) var += (v - m) * (v - m);
  r.differential_mean = m;
  r.differential_std = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
}

} // namespace

OccupancyDistribution binomial_occupancy(double p_o, int N) {
  check_p(p_o);
  if (N < 1) throw ValidationError("binomial_occupancy: N must be >= 1");
  OccupancyDistribution o;
  o.p_o = p_o;
  o.N = N;
  o.probs.resize(static_cast<std::size_t>(N) + 1);
  for (int t = 0; t <= N; ++t) {
    const double log_c = std::lgamma(N + 1.0) - std::lgamma(t + 1.0) - std::lgamma(N - t + 1.0);
    o.probs[static_cast<std::size_t>(t)] = std::exp(log_c) * std::pow(p_o, t) * std::pow(1.0 - p_o, N - t);
  }
  // Exact small binomial coefficients keep P_0 and P_1 in closed form.
  o.probs[0] = std::pow(1.0 - p_o, N);
  o.probs[1] = N * p_o * std::pow(1.0 - p_o, N - 1);
  return o;
}

CoverageReport theoretical_coverage(const SamplingDensity& d, int N, bool normalize_by_single) {
  if (N < 1) throw ValidationError("theoretical_coverage: N must be >= 1");
  CoverageReport r;
  r.N = N;
  r.R = d.target_R;
  r.normalized = normalize_by_single;
  const double scale = normalize_by_single ? d.target_R : 1.0;
  const std::size_t T = d.grid.total();
  Sums s{std::vector<double>(T), std::vector<double>(T), std::vector<double>(T)};
  std::vector<double> single(T);
  for (std::size_t i = 0; i < T; ++i) {
    const double p = std::clamp(d.values[i], 0.0, 1.0);
    const double p0 = std::pow(1.0 - p, N);
    s.agg[i] = 1.0 - p0;
    s.uniq[i] = N * p * std::pow(1.0 - p, N - 1);
    // Sum over t >= 2 of (t - 1) P_t = E[t] - 1 + P_0.
    s.over[i] = N * p - 1.0 + p0;
    single[i] = p * std::pow(1.0 - p, N - 1);
  }
  const double per_pattern = pct(pairwise_sum(single), static_cast<double>(T)) * scale;
  r.differential_pct.assign(static_cast<std::size_t>(N), per_pattern);
  finish_differential(r);
  summarize(r, d.grid, s, scale);
  return r;
}

CoverageReport empirical_coverage(const PatternSet& set, bool normalize_by_single) {
  if (set.patterns.empty()) throw ValidationError("empirical_coverage: empty pattern set");
  const GridSpec g = set.patterns.front().grid;
  CoverageCount cov(g);
  for (const auto& p : set.patterns) cov.add(p);

  CoverageReport r;
  r.N = set.size();
  r.R = set.density.target_R;
  r.normalized = normalize_by_single;
  const double scale = normalize_by_single ? r.R : 1.0;
  const std::size_t T = g.total();
  Sums s{std::vector<double>(T), std::vector<double>(T), std::vector<double>(T)};
  for (std::size_t i = 0; i < T; ++i) {
    const int c = cov.counts[i];
    s.agg[i] = c >= 1;
    s.uniq[i] = c == 1;
    s.over[i] = c >= 2 ? c - 1 : 0;
  }
  for (const auto& p : set.patterns) {
    std::size_t alone = 0;
    for (std::size_t i = 0; i < T; ++i) alone += p.mask[i] && cov.counts[i] == 1;
    r.differential_pct.push_back(pct(static_cast<double>(alone), static_cast<double>(T)) * scale);
  }
  finish_differential(r);
  summarize(r, g, s, scale);
  return r;
}

double expected_coverage_unclipped(double p_o, double mu, int n) {
  check_p(p_o);
  check_mu(mu);
  if (n < 1) throw ValidationError("expected coverage: n must be >= 1");
  if (mu == 0.0) return n * p_o;
  return (1.0 - std::pow(1.0 - mu * p_o, n)) / mu;
}

std::vector<double> expected_coverage_curve(double p_o, double mu, int n_max) {
  if (n_max < 1) throw ValidationError("expected_coverage_curve: n_max must be >= 1");
  std::vector<double> e;
  for (int n = 1; n <= n_max; ++n) e.push_back(std::min(1.0, expected_coverage_unclipped(p_o, mu, n)));
  return e;
}

std::vector<double> expected_coverage_recursion(double p_o, double mu, int n_max) {
  check_p(p_o);
  check_mu(mu);
  if (n_max < 1) throw ValidationError("expected_coverage_recursion: n_max must be >= 1");
  std::vector<double> e{p_o};
  for (int n = 2; n <= n_max; ++n) e.push_back(e.back() * (1.0 - mu * p_o) + p_o);
  return e;
}

} // namespace segsamp
