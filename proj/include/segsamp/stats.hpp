#pragma once

#include <vector>

#include "segsamp/density.hpp"
#include "segsamp/patterns.hpp"

namespace segsamp {

// Probability that a location is sampled exactly t times in N independent
// Bernoulli(p_o) acquisitions, t = 0..N.
struct OccupancyDistribution {
  std::vector<double> probs;
  double p_o = 0.0;
  int N = 0;
};

OccupancyDistribution binomial_occupancy(double p_o, int N);

struct AnnulusCoverage {
  double kr_center = 0.0;
  std::size_t cells = 0;
  double aggregate_pct = 0.0;
  double differential_pct = 0.0; // sampled by exactly one pattern
  double overlap_pct = 0.0;
};

// Percentages of grid locations. differential_pct[n] is the share sampled by
// pattern n alone; differential_total_pct the share sampled by exactly one
// pattern. When normalized, differential and overlap values are divided by
// the single-pattern budget 1/R.
struct CoverageReport {
  int N = 0;
  double R = 1.0;
  bool normalized = false;
  double aggregate_pct = 0.0;
  std::vector<double> differential_pct;
  double differential_mean = 0.0;
  double differential_std = 0.0;
  double differential_total_pct = 0.0;
  double overlap_pct = 0.0;
  std::vector<AnnulusCoverage> annuli;
};

// Expected metrics for N independent draws from d.
CoverageReport theoretical_coverage(const SamplingDensity& d, int N, bool normalize_by_single = false);

// Metrics measured on the masks of a pattern set.
CoverageReport empirical_coverage(const PatternSet& set, bool normalize_by_single = false);

// Expected covered fraction after n segregated patterns at fixed p_o, without
// clipping at 1. e_1 = p_o.
double expected_coverage_unclipped(double p_o, double mu, int n);

// e_1..e_{n_max} from the closed form, clipped at 1.
std::vector<double> expected_coverage_curve(double p_o, double mu, int n_max);

// e_1..e_{n_max} from the recursion e_n = e_{n-1}(1 - mu p_o) + p_o, unclipped.
std::vector<double> expected_coverage_recursion(double p_o, double mu, int n_max);

} // namespace segsamp
