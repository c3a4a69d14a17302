#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "segsamp/array2.hpp"
#include "segsamp/density.hpp"

namespace segsamp {

enum class Strategy { random, low_corr, segregated };

std::string to_string(Strategy s);
Strategy parse_strategy(std::string_view name);

struct SamplingPattern {
  GridSpec grid;
  Mask mask;
  std::uint64_t seed = 0;

  std::size_t count() const;
};

// r_psf is the PSF peak over its largest sidelobe; aliasing_energy is the
// sidelobe energy over the squared peak.
struct PsfMetrics {
  double r_psf = 0.0;
  double aliasing_energy = 0.0;
};

// Reported in place of an infinite r_psf (no sidelobes).
inline constexpr double kRpsfCap = 1e12;

struct PatternSet {
  Strategy strategy = Strategy::random;
  std::optional<double> mu;
  SamplingDensity density;
  std::uint64_t seed = 0;
  std::vector<SamplingPattern> patterns;

  GridSpec grid() const { return density.grid; }
  int size() const { return static_cast<int>(patterns.size()); }
};

// Number of accumulated patterns sampling each location.
struct CoverageCount {
  GridSpec grid;
  Array2<int> counts;
  int accumulated = 0;

  CoverageCount() = default;
  explicit CoverageCount(const GridSpec& g) : grid(g), counts(g, 0) {}
  void add(const SamplingPattern& p);
  std::size_t covered() const;
};

// Radial annuli used for the coverage ratio K and the density boost beta:
// bin = floor(k_r * min(ny, nz) / 2), i.e. width 2/min(ny,nz) in normalized
// radius, with the grid corner folded into the last bin.
struct AnnulusBins {
  GridSpec grid;
  int n_bins = 0;
  std::vector<int> bin_of;        // per flat grid index
  std::vector<std::size_t> cells; // per bin

  static AnnulusBins for_grid(const GridSpec& g);
  double center(int bin) const;
};

// Independent Bernoulli(p) trial per location from a counter-based stream
// keyed on (seed, ky, kz). Locations with p >= 1 are always included.
SamplingPattern draw_pattern(const SamplingDensity& d, std::uint64_t seed);

// PSF through the centred inverse DFT of the {0,1} mask.
PsfMetrics psf_metrics(const SamplingPattern& p);

// Parseval identity for {0,1} masks: aliasing energy = T/M - 1.
double aliasing_energy_from_count(std::size_t sampled, std::size_t total);

// Seed for candidate c of acquisition n under master seed.
std::uint64_t candidate_seed(std::uint64_t seed, std::uint64_t acquisition, std::uint64_t candidate);

// Aliasing energy of each candidate draw, evaluated without building masks.
std::vector<double> candidate_aliasing_energies(const SamplingDensity& d, std::uint64_t seed,
                                                std::uint64_t acquisition, int n_candidates);

// Draws n_candidates patterns for acquisition n and keeps the one with the
// least aliasing energy (lowest candidate index on ties).
SamplingPattern select_min_aliasing(const SamplingDensity& d, std::uint64_t seed, std::uint64_t acquisition,
                                    int n_candidates);

PatternSet generate_random_set(const SamplingDensity& d, int N, std::uint64_t seed, int n_candidates = 1000);

// Pearson correlation between two flattened {0,1} masks (0 if either is constant).
double mask_correlation(const SamplingPattern& a, const SamplingPattern& b);

// Shortlists the n_shortlist least-aliased of n_total draws, then selects N of
// them with small summed pairwise correlation: the best pair is found
// exhaustively and further patterns are added greedily.
PatternSet generate_lowcorr_set(const SamplingDensity& d, int N, std::uint64_t seed, int n_total = 10000,
                                int n_shortlist = 500);

// Density for the next pattern given coverage by the previous ones.
//
// Per annulus, covered locations are scaled by mu and uncovered ones boosted by
// beta so the annulus mass is unchanged. When the boost would exceed 1, or the
// expected coverage after this pattern reaches 1, uncovered locations are set
// to 1 and covered ones absorb the difference (clipped at 0). Fully covered
// annuli revert to the base density; the Nyquist disk stays at 1.
SamplingDensity update_conditional_density(const SamplingDensity& d, const CoverageCount& cov, double mu);

PatternSet generate_segregated_set(const SamplingDensity& d, int N, double mu, std::uint64_t seed,
                                   int n_candidates = 1000);

// Dispatch on strategy; mu is ignored unless segregated.
struct GenerationOptions {
  int n_candidates = 1000;
  int lowcorr_total = 10000;
  int lowcorr_shortlist = 500;
};
PatternSet generate_set(Strategy s, const SamplingDensity& d, int N, double mu, std::uint64_t seed,
                        const GenerationOptions& opts = {});

} // namespace segsamp
