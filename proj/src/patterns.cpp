#include "segsamp/patterns.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "segsamp/fft.hpp"
#include "segsamp/parallel.hpp"
#include "segsamp/rng.hpp"
#include "segsamp/stats.hpp"

namespace segsamp {

namespace {

// Stream index reserved for the low-correlation candidate pool.
constexpr std::uint64_t kLowCorrStream = 0xC0442E1A7E5ULL;

// Density flattened for repeated Bernoulli draws: cells with p >= 1 are
// counted once, cells with 0 < p < 1 keep their index and 32-bit threshold.
struct CompiledDensity {
  std::size_t total = 0;
  std::size_t forced = 0;
  std::vector<std::uint32_t> cell;
  std::vector<std::uint32_t> threshold;

  explicit CompiledDensity(const SamplingDensity& d) : total(d.grid.total()) {
    const auto v = d.values.flat();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::uint64_t t = rng::bernoulli_threshold(v[i]);
      if (t == 0x100000000ULL) {
        ++forced;
      } else if (t > 0) {
        cell.push_back(static_cast<std::uint32_t>(i));
        threshold.push_back(static_cast<std::uint32_t>(t));
      }
    }
  }

  std::size_t count(std::uint64_t seed) const {
    const rng::CellStream s(seed);
    const std::size_t m = cell.size();
    const std::uint32_t* c = cell.data();
    const std::uint32_t* t = threshold.data();
    std::uint32_t n = 0;
    for (std::size_t i = 0; i < m; ++i) n += s(c[i]) < t[i] ? 1U : 0U;
    return forced + n;
  }
};

Mask draw_mask(const SamplingDensity& d, std::uint64_t seed) {
  const rng::CellStream s(seed);
  Mask m(d.grid, 0);
  const auto v = d.values.flat();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::uint64_t t = rng::bernoulli_threshold(v[i]);
    m[i] = static_cast<std::uint64_t>(s(static_cast<std::uint32_t>(i))) < t ? 1 : 0;
  }
  return m;
}

void check_N(int N) {
  if (N < 1) throw ValidationError("pattern set: N must be >= 1");
}

void check_mu(double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw ValidationError("mu must lie in [0, 1]");
}

void check_candidates(int n) {
  if (n < 1) throw ValidationError("n_candidates must be >= 1");
}

// Index of the largest count, lowest index on ties.
std::size_t argmax_count(const std::vector<std::size_t>& counts) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i] > counts[best]) best = i;
  }
  return best;
}

std::vector<std::size_t> candidate_counts(const CompiledDensity& cd, std::uint64_t seed, std::uint64_t acquisition,
                                          int n_candidates) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_candidates));
  constexpr std::size_t kChunk = 16;
  const std::size_t chunks = (counts.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t ch) {
    const std::size_t end = std::min(counts.size(), (ch + 1) * kChunk);
    for (std::size_t c = ch * kChunk; c < end; ++c) counts[c] = cd.count(candidate_seed(seed, acquisition, c));
  });
  return counts;
}

struct BitMask {
  std::vector<std::uint64_t> words;
  std::size_t ones = 0;
};

BitMask to_bits(const Mask& m) {
  BitMask b;
  b.words.assign((m.size() + 63) / 64, 0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i]) {
      b.words[i / 64] |= std::uint64_t{1} << (i % 64);
      ++b.ones;
    }
  }
  return b;
}

double pearson_from_counts(std::size_t T, std::size_t n1, std::size_t n2, std::size_t n11) {
  const double t = static_cast<double>(T);
  const double a = static_cast<double>(n1);
  const double b = static_cast<double>(n2);
  const double den = a * (t - a) * b * (t - b);
  if (!(den > 0.0)) return 0.0;
  return (t * static_cast<double>(n11) - a * b) / std::sqrt(den);
}

double bit_correlation(const BitMask& x, const BitMask& y, std::size_t T) {
  std::size_t n11 = 0;
  for (std::size_t w = 0; w < x.words.size(); ++w) n11 += std::popcount(x.words[w] & y.words[w]);
  return pearson_from_counts(T, x.ones, y.ones, n11);
}

} // namespace

std::string to_string(Strategy s) {
  switch (s) {
  case Strategy::random: return "random";
  case Strategy::low_corr: return "low_corr";
  case Strategy::segregated: return "segregated";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "random") return Strategy::random;
  if (name == "low_corr" || name == "lowcorr" || name == "low-corr") return Strategy::low_corr;
  if (name == "segregated") return Strategy::segregated;
  throw ValidationError("unknown strategy '" + std::string(name) + "'");
}

std::size_t SamplingPattern::count() const {
  std::size_t n = 0;
  for (auto v : mask) n += v != 0;
  return n;
}

void CoverageCount::add(const SamplingPattern& p) {
  require_same_grid(grid, p.grid, "CoverageCount::add");
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += p.mask[i] != 0;
  ++accumulated;
}

std::size_t CoverageCount::covered() const {
  std::size_t n = 0;
  for (int c : counts) n += c > 0;
  return n;
}

AnnulusBins AnnulusBins::for_grid(const GridSpec& g) {
  AnnulusBins a;
  a.grid = g;
  const int half = std::min(g.ny, g.nz) / 2;
  a.n_bins = half + 1;
  a.bin_of.resize(g.total());
  a.cells.assign(static_cast<std::size_t>(a.n_bins), 0);
  for (int y = 0; y < g.ny; ++y) {
    for (int z = 0; z < g.nz; ++z) {
      const int b = std::min(a.n_bins - 1, static_cast<int>(std::floor(normalized_radius(g, y, z) * half)));
      a.bin_of[g.index(y, z)] = b;
      ++a.cells[static_cast<std::size_t>(b)];
    }
  }
  return a;
}

double AnnulusBins::center(int bin) const {
  const int half = std::min(grid.ny, grid.nz) / 2;
  return std::min(1.0, (bin + 0.5) / half);
}

SamplingPattern draw_pattern(const SamplingDensity& d, std::uint64_t seed) {
  return SamplingPattern{d.grid, draw_mask(d, seed), seed};
}

PsfMetrics psf_metrics(const SamplingPattern& p) {
  const std::size_t T = p.grid.total();
  const std::size_t M = p.count();
  if (M == 0) throw ValidationError("psf_metrics: empty mask");
  if (M == T) return {kRpsfCap, 0.0};

  ComplexImage psf(p.grid);
  for (std::size_t i = 0; i < T; ++i) psf[i] = p.mask[i] ? 1.0 : 0.0;
  ifft2_centered(psf);
  const std::size_t c = p.grid.index(p.grid.ny / 2, p.grid.nz / 2);
  const double peak = std::abs(psf[c]);
  double side = 0.0;
  std::vector<double> energy(T, 0.0);
  for (std::size_t i = 0; i < T; ++i) {
    if (i == c) continue;
    const double a = std::abs(psf[i]);
    side = std::max(side, a);
    energy[i] = a * a;
  }
  PsfMetrics m;
  m.r_psf = side > 0.0 ? std::min(kRpsfCap, peak / side) : kRpsfCap;
  m.aliasing_energy = pairwise_sum(energy) / (peak * peak);
  return m;
}

double aliasing_energy_from_count(std::size_t sampled, std::size_t total) {
  if (sampled == 0) throw ValidationError("aliasing energy: empty mask");
  return static_cast<double>(total) / static_cast<double>(sampled) - 1.0;
}

std::uint64_t candidate_seed(std::uint64_t seed, std::uint64_t acquisition, std::uint64_t candidate) {
  return rng::derive(seed, {acquisition, candidate});
}

std::vector<double> candidate_aliasing_energies(const SamplingDensity& d, std::uint64_t seed,
                                                std::uint64_t acquisition, int n_candidates) {
  check_candidates(n_candidates);
  const CompiledDensity cd(d);
  const auto counts = candidate_counts(cd, seed, acquisition, n_candidates);
  std::vector<double> e(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) e[i] = aliasing_energy_from_count(counts[i], cd.total);
  return e;
}

SamplingPattern select_min_aliasing(const SamplingDensity& d, std::uint64_t seed, std::uint64_t acquisition,
                                    int n_candidates) {
  check_candidates(n_candidates);
  const CompiledDensity cd(d);
  const auto counts = candidate_counts(cd, seed, acquisition, n_candidates);
  return draw_pattern(d, candidate_seed(seed, acquisition, argmax_count(counts)));
}

PatternSet generate_random_set(const SamplingDensity& d, int N, std::uint64_t seed, int n_candidates) {
  check_N(N);
  check_candidates(n_candidates);
  PatternSet set;
  set.strategy = Strategy::random;
  set.density = d;
  set.seed = seed;
  const CompiledDensity cd(d);
  for (int n = 0; n < N; ++n) {
    const auto counts = candidate_counts(cd, seed, static_cast<std::uint64_t>(n), n_candidates);
    set.patterns.push_back(
        draw_pattern(d, candidate_seed(seed, static_cast<std::uint64_t>(n), argmax_count(counts))));
  }
  return set;
}

double mask_correlation(const SamplingPattern& a, const SamplingPattern& b) {
  require_same_grid(a.grid, b.grid, "mask_correlation");
  return bit_correlation(to_bits(a.mask), to_bits(b.mask), a.grid.total());
}

PatternSet generate_lowcorr_set(const SamplingDensity& d, int N, std::uint64_t seed, int n_total, int n_shortlist) {
  check_N(N);
  if (n_shortlist < N) throw ValidationError("generate_lowcorr_set: n_shortlist must be >= N");
  if (n_total < n_shortlist) throw ValidationError("generate_lowcorr_set: n_total must be >= n_shortlist");

  const CompiledDensity cd(d);
  const auto counts = candidate_counts(cd, seed, kLowCorrStream, n_total);
  std::vector<std::size_t> order(counts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
  order.resize(static_cast<std::size_t>(n_shortlist));

  PatternSet set;
  set.strategy = Strategy::low_corr;
  set.density = d;
  set.seed = seed;
  auto seed_of = [&](std::size_t k) { return candidate_seed(seed, kLowCorrStream, order[k]); };

  if (N == 1) {
    set.patterns.push_back(draw_pattern(d, seed_of(0)));
    return set;
  }

  const std::size_t S = order.size();
  const std::size_t T = d.grid.total();
  std::vector<BitMask> bits(S);
  parallel_for(S, [&](std::size_t k) { bits[k] = to_bits(draw_mask(d, seed_of(k))); });

  // Row k holds correlations with candidates j > k.
  std::vector<std::vector<double>> corr(S);
  parallel_for(S, [&](std::size_t k) {
    corr[k].assign(S, 0.0);
    for (std::size_t j = k + 1; j < S; ++j) corr[k][j] = bit_correlation(bits[k], bits[j], T);
  });
  auto C = [&](std::size_t a, std::size_t b) { return a < b ? corr[a][b] : corr[b][a]; };

  std::size_t bi = 0, bj = 1;
  for (std::size_t i = 0; i < S; ++i) {
    for (std::size_t j = i + 1; j < S; ++j) {
      if (corr[i][j] < corr[bi][bj]) {
        bi = i;
        bj = j;
      }
    }
  }
  std::vector<std::size_t> chosen{bi, bj};
  std::vector<char> used(S, 0);
  used[bi] = used[bj] = 1;
  std::vector<double> acc(S, 0.0);
  for (std::size_t k = 0; k < S; ++k) acc[k] = C(k, bi) + C(k, bj);
  while (chosen.size() < static_cast<std::size_t>(N)) {
    std::size_t best = S;
    for (std::size_t k = 0; k < S; ++k) {
      if (used[k]) continue;
      if (best == S || acc[k] < acc[best]) best = k;
    }
    chosen.push_back(best);
    used[best] = 1;
    for (std::size_t k = 0; k < S; ++k) acc[k] += C(k, best);
  }
  for (std::size_t k : chosen) set.patterns.push_back(draw_pattern(d, seed_of(k)));
  return set;
}

SamplingDensity update_conditional_density(const SamplingDensity& d, const CoverageCount& cov, double mu) {
  check_mu(mu);
  require_same_grid(d.grid, cov.grid, "update_conditional_density");
  if (mu == 1.0) return d;

  const AnnulusBins bins = AnnulusBins::for_grid(d.grid);
  const std::size_t B = static_cast<std::size_t>(bins.n_bins);
  const std::size_t T = d.grid.total();

  std::vector<char> in_disk(T, 0);
  for (int y = 0; y < d.grid.ny; ++y) {
    for (int z = 0; z < d.grid.nz; ++z) in_disk[d.grid.index(y, z)] = d.in_nyquist_disk(y, z);
  }

  struct Acc {
    double mass = 0.0, cov_mass = 0.0, unc_mass = 0.0, unc_deficit = 0.0, max_unc = 0.0;
    std::size_t cells = 0, covered = 0;
  };
  std::vector<Acc> acc(B);
  for (std::size_t i = 0; i < T; ++i) {
    if (in_disk[i]) continue;
    Acc& a = acc[static_cast<std::size_t>(bins.bin_of[i])];
    const double p = d.values[i];
    a.mass += p;
    ++a.cells;
    if (cov.counts[i] > 0) {
      a.cov_mass += p;
      ++a.covered;
    } else {
      a.unc_mass += p;
      a.unc_deficit += 1.0 - p;
      a.max_unc = std::max(a.max_unc, p);
    }
  }

  enum class Rule { base, naive, corrected };
  struct BinRule {
    Rule rule = Rule::base;
    double beta = 1.0;
    double scale = 0.0;
  };
  const int n = cov.accumulated + 1;
  std::vector<BinRule> rule(B);
  for (std::size_t b = 0; b < B; ++b) {
    const Acc& a = acc[b];
    BinRule& r = rule[b];
    if (a.cells == 0 || a.covered == a.cells) continue;
    r.beta = a.unc_mass > 0.0 ? (a.mass - mu * a.cov_mass) / a.unc_mass : 1.0;
    const double p_mean = a.mass / static_cast<double>(a.cells);
    const bool exhausted = p_mean > 0.0 && expected_coverage_unclipped(p_mean, mu, n) >= 1.0 - 1e-12;
    if (exhausted || a.max_unc * r.beta > 1.0) {
      r.rule = Rule::corrected;
      r.scale = a.cov_mass > 0.0 ? std::max(0.0, 1.0 - a.unc_deficit / a.cov_mass) : 0.0;
    } else {
      r.rule = Rule::naive;
    }
  }

  SamplingDensity out = d;
  for (std::size_t i = 0; i < T; ++i) {
    if (in_disk[i]) continue;
    const BinRule& r = rule[static_cast<std::size_t>(bins.bin_of[i])];
    const double p = d.values[i];
    const bool covered = cov.counts[i] > 0;
    double v = p;
    switch (r.rule) {
    case Rule::base: break;
    case Rule::naive: v = covered ? p * mu : p * r.beta; break;
    case Rule::corrected: v = covered ? p * r.scale : 1.0; break;
    }
    out.values[i] = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

PatternSet generate_segregated_set(const SamplingDensity& d, int N, double mu, std::uint64_t seed, int n_candidates) {
  check_N(N);
  check_mu(mu);
  check_candidates(n_candidates);
  PatternSet set;
  set.strategy = Strategy::segregated;
  set.mu = mu;
  set.density = d;
  set.seed = seed;
  CoverageCount cov(d.grid);
  for (int n = 0; n < N; ++n) {
    const SamplingDensity dn = n == 0 ? d : update_conditional_density(d, cov, mu);
    const CompiledDensity cd(dn);
    const auto counts = candidate_counts(cd, seed, static_cast<std::uint64_t>(n), n_candidates);
    set.patterns.push_back(
        draw_pattern(dn, candidate_seed(seed, static_cast<std::uint64_t>(n), argmax_count(counts))));
    cov.add(set.patterns.back());
  }
  return set;
}

PatternSet generate_set(Strategy s, const SamplingDensity& d, int N, double mu, std::uint64_t seed,
                        const GenerationOptions& opts) {
  switch (s) {
  case Strategy::random: return generate_random_set(d, N, seed, opts.n_candidates);
  case Strategy::low_corr: return generate_lowcorr_set(d, N, seed, opts.lowcorr_total, opts.lowcorr_shortlist);
  case Strategy::segregated: return generate_segregated_set(d, N, mu, seed, opts.n_candidates);
  }
  throw ValidationError("unknown strategy");
}

} // namespace segsamp
