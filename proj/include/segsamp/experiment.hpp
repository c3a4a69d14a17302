#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "segsamp/density.hpp"
#include "segsamp/patterns.hpp"
#include "segsamp/phantom.hpp"
#include "segsamp/quality.hpp"
#include "segsamp/recon.hpp"

namespace segsamp {

enum class EvalMode { combined, per_contrast, average };

std::string to_string(EvalMode m);
EvalMode parse_eval_mode(const std::string& s);

struct ExperimentConfig {
  std::string name = "experiment";
  GridSpec grid{128, 128};
  int N = 4;
  double R = 0.0; // 0 means R = N
  std::vector<Strategy> strategies{Strategy::random, Strategy::segregated};
  double mu = 0.0;
  int seed_count = 3;
  std::uint64_t master_seed = 1;
  std::string protocol = "bssfp"; // bssfp | t1_se | t2_se
  std::string tissues;            // empty: t1_set for t1_se, else bssfp_set
  std::vector<double> noise_variance{0.0};
  std::string recon = "pe";       // pe | zf
  std::string pe_preset = "phantom";
  PEConfig pe = PEConfig::phantom();
  std::string evaluation;         // empty: by protocol
  GenerationOptions generation;
  std::string output_dir;         // empty: nothing written

  double effective_R() const { return R > 0.0 ? R : static_cast<double>(N); }
  TissuePreset tissue_preset() const;
  EvalMode eval_mode() const;
  void validate() const;
  // Canonical serialization; also the input of hash().
  std::string to_json() const;
  std::string hash() const;
  // Unknown keys and wrongly typed values are validation errors.
  static ExperimentConfig from_json(const std::string& json);
};

// Rendered phantom and fully sampled data shared by all replicas.
struct PreparedData {
  SamplingDensity density;
  std::vector<ComplexImage> reference;
  std::vector<KSpaceData> kspace;
  Protocol protocol;
};

PreparedData prepare_data(const ExperimentConfig& cfg);

struct ReplicaResult {
  Strategy strategy = Strategy::random;
  double mu = 0.0;
  int seed_index = 0;
  std::uint64_t seed = 0;
  double noise_variance = 0.0;
  double aggregate_pct = 0.0;
  double psnr_db = 0.0;   // mean over contrasts in per-contrast mode
  double ssim_pct = 0.0;
  std::vector<double> contrast_psnr;
  std::vector<double> contrast_ssim;
  std::vector<double> objective_trace;
};

struct ReplicaArtifacts {
  PatternSet patterns;
  std::vector<ComplexImage> images;
  RealImage evaluated;
};

std::uint64_t replica_seed(std::uint64_t master, int seed_index);

ReplicaResult run_replica(const ExperimentConfig& cfg, const PreparedData& data, Strategy s, double mu,
                          int seed_index, double noise_variance, ReplicaArtifacts* artifacts = nullptr);

struct StrategySummary {
  Strategy strategy = Strategy::random;
  double mu = 0.0;
  double noise_variance = 0.0;
  int replicas = 0;
  double psnr_mean = 0.0, psnr_std = 0.0;
  double ssim_mean = 0.0, ssim_std = 0.0;
  double aggregate_mean = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ReplicaResult> replicas;
  std::vector<StrategySummary> summary;
  std::string summary_json;
};

// Runs every (strategy, seed, noise) replica; writes artifacts when output_dir is set.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

std::vector<StrategySummary> summarize(const std::vector<ReplicaResult>& r);

// Segregated replicas at each mu; one summary row per (mu, noise).
std::vector<StrategySummary> mu_sweep(const ExperimentConfig& cfg, const std::vector<double>& mus);

struct Table1Row {
  double R = 0.0;
  int N = 0;
  double random_agg = 0.0, random_diff = 0.0, random_over = 0.0;
  double segregated_agg = 0.0, segregated_diff = 0.0, segregated_over = 0.0;
  double delta_agg = 0.0, delta_diff = 0.0, delta_over = 0.0;
};

// Mean over seeds of coverage metrics for random and segregated (mu) sets.
// delta_agg is a plain difference; delta_diff (per-pattern mean) and
// delta_over are divided by the single-pattern budget 1/R.
std::vector<Table1Row> sweep_table1(const GridSpec& grid, const std::vector<double>& Rs, const std::vector<int>& Ns,
                                    int seed_count, std::uint64_t master_seed, double mu = 0.0,
                                    const GenerationOptions& opts = {});

double mean_of(const std::vector<double>& v);
double stddev_of(const std::vector<double>& v);

} // namespace segsamp
