#include "segsamp/experiment.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <set>

#include <json.hpp>

#include "segsamp/io.hpp"
#include "segsamp/parallel.hpp"
#include "segsamp/rng.hpp"
#include "segsamp/stats.hpp"

namespace segsamp {

namespace {

using ojson = nlohmann::ordered_json;

constexpr std::uint64_t kNoiseStream = 0x6E6F697365ULL;

const std::set<std::string> kProtocols{"bssfp", "t1_se", "t2_se"};

template <typename T>
T get_as(const nlohmann::json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("experiment config: wrong type for '" + key + "'");
  }
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError("experiment config: " + msg);
}

double max_of(const RealImage& img) {
  double m = 0.0;
  for (double v : img) m = std::max(m, v);
  return m;
}

RealImage evaluated_image(EvalMode mode, const std::vector<ComplexImage>& images) {
  if (mode == EvalMode::combined) return pnorm_combine(images, 2.0);
  ComplexImage avg(images.front().grid(), cd{});
  for (const auto& img : images) {
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += img[i];
  }
  for (cd& v : avg) v /= static_cast<double>(images.size());
  return magnitude(avg);
}

struct Job {
  Strategy strategy;
  double mu;
  int seed_index;
  int noise_index;
};

std::vector<ReplicaResult> run_jobs(const ExperimentConfig& cfg, const PreparedData& data, const std::vector<Job>& jobs,
                                    std::vector<ReplicaArtifacts>* artifacts) {
  std::vector<ReplicaResult> out(jobs.size());
  if (artifacts) artifacts->assign(jobs.size(), {});
  auto body = [&](std::size_t i) {
    const Job& j = jobs[i];
    ReplicaArtifacts* a = (artifacts && j.seed_index == 0 && j.noise_index == 0) ? &(*artifacts)[i] : nullptr;
    out[i] = run_replica(cfg, data, j.strategy, j.mu, j.seed_index, cfg.noise_variance[j.noise_index], a);
  };
  // Few jobs: keep them sequential so each replica can use the whole pool.
  if (jobs.size() >= worker_count()) {
    parallel_for(jobs.size(), body);
  } else {
    for (std::size_t i = 0; i < jobs.size(); ++i) body(i);
  }
  return out;
}

ojson summary_to_json(const StrategySummary& s) {
  ojson j;
  j["strategy"] = to_string(s.strategy);
  j["mu"] = s.mu;
  j["noise_variance"] = s.noise_variance;
  j["replicas"] = s.replicas;
  j["psnr_mean"] = s.psnr_mean;
  j["psnr_std"] = s.psnr_std;
  j["ssim_mean"] = s.ssim_mean;
  j["ssim_std"] = s.ssim_std;
  j["aggregate_mean"] = s.aggregate_mean;
  return j;
}

void write_artifacts(const ExperimentConfig& cfg, const PreparedData& data, const std::vector<Job>& jobs,
                     const std::vector<ReplicaResult>& results, const std::vector<ReplicaArtifacts>& arts) {
  namespace fs = std::filesystem;
  const fs::path dir = cfg.output_dir;
  const std::string h = cfg.hash();
  ExperimentConfig stored = cfg;
  stored.output_dir.clear();
  io::write_atomic(dir / "config.json", stored.to_json() + "\n");
  io::write_grid_csv(dir / "density.csv", data.density.values, "p", h);
  io::write_real_pgm(dir / "density.pgm", data.density.values, 1.0);

  const RealImage ref = evaluated_image(cfg.eval_mode() == EvalMode::combined ? EvalMode::combined : EvalMode::average,
                                        data.reference);
  const double peak = max_of(ref);
  io::write_real_pgm(dir / "reference.pgm", ref, peak);

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (jobs[i].seed_index != 0 || jobs[i].noise_index != 0) continue;
    const std::string tag = to_string(jobs[i].strategy);
    const ReplicaArtifacts& a = arts[i];
    for (int n = 0; n < a.patterns.size(); ++n) {
      io::write_mask_pgm(dir / "masks" / (tag + "_n" + std::to_string(n) + ".pgm"), a.patterns.patterns[n].mask);
    }
    io::write_real_pgm(dir / "recon" / (tag + ".pgm"), a.evaluated, peak);
    io::write_grid_csv(dir / "recon" / (tag + "_mse.csv"), mse_map(a.evaluated, ref), "mse", h);
    for (std::size_t n = 0; n < a.images.size(); ++n) {
      ojson side;
      side["strategy"] = tag;
      side["acquisition"] = n;
      io::write_complex_raw(dir / "recon" / (tag + "_acq" + std::to_string(n) + ".raw"), a.images[n], side.dump());
    }
    if (!results[i].objective_trace.empty()) {
      io::CsvTable t{{"iteration", "objective"}, {}};
      for (std::size_t k = 0; k < results[i].objective_trace.size(); ++k) {
        t.rows.push_back({std::to_string(k), io::format_double(results[i].objective_trace[k])});
      }
      io::write_csv(dir / "recon" / (tag + "_objective.csv"), t, h);
    }
  }

  io::CsvTable t{{"strategy", "mu", "seed_index", "seed", "noise_variance", "aggregate_pct", "psnr_db", "ssim_pct"},
                 {}};
  for (const auto& r : results) {
    t.rows.push_back({to_string(r.strategy), io::format_double(r.mu), std::to_string(r.seed_index),
                      std::to_string(r.seed), io::format_double(r.noise_variance), io::format_double(r.aggregate_pct),
                      io::format_double(r.psnr_db), io::format_double(r.ssim_pct)});
  }
  io::write_csv(dir / "replicas.csv", t, h);

  if (cfg.eval_mode() == EvalMode::per_contrast) {
    io::CsvTable c{{"strategy", "seed_index", "noise_variance", "contrast", "psnr_db", "ssim_pct"}, {}};
    for (const auto& r : results) {
      for (std::size_t k = 0; k < r.contrast_psnr.size(); ++k) {
        c.rows.push_back({to_string(r.strategy), std::to_string(r.seed_index), io::format_double(r.noise_variance),
                          std::to_string(k), io::format_double(r.contrast_psnr[k]),
                          io::format_double(r.contrast_ssim[k])});
      }
    }
    io::write_csv(dir / "contrasts.csv", c, h);
  }
}

} // namespace

std::string to_string(EvalMode m) {
  switch (m) {
  case EvalMode::combined: return "combined";
  case EvalMode::per_contrast: return "per_contrast";
  case EvalMode::average: return "average";
  }
  return "combined";
}

EvalMode parse_eval_mode(const std::string& s) {
  if (s == "combined") return EvalMode::combined;
  if (s == "per_contrast") return EvalMode::per_contrast;
  if (s == "average") return EvalMode::average;
  throw ValidationError("unknown evaluation mode '" + s + "'");
}

TissuePreset ExperimentConfig::tissue_preset() const {
  if (!tissues.empty()) return parse_tissue_preset(tissues);
  return protocol == "t1_se" ? TissuePreset::t1_set : TissuePreset::bssfp_set;
}

EvalMode ExperimentConfig::eval_mode() const {
  if (!evaluation.empty()) return parse_eval_mode(evaluation);
  if (protocol == "t2_se") return EvalMode::per_contrast;
  if (protocol == "t1_se") return EvalMode::average;
  return EvalMode::combined;
}

void ExperimentConfig::validate() const {
  grid.validate(32);
  require(N >= 1 && N <= 64, "N must lie in [1, 64]");
  require(R == 0.0 || (R >= 1.0 && R <= 16.0), "R must lie in [1, 16]");
  require(!strategies.empty(), "strategies must not be empty");
  require(mu >= 0.0 && mu <= 1.0, "mu must lie in [0, 1]");
  require(seed_count >= 1, "seeds.count must be >= 1");
  require(kProtocols.count(protocol) > 0, "unknown protocol '" + protocol + "'");
  tissue_preset();
  const EvalMode mode = eval_mode();
  require(!noise_variance.empty(), "noise_variance must not be empty");
  for (double v : noise_variance) require(v >= 0.0 && std::isfinite(v), "noise_variance entries must be >= 0");
  require(recon == "pe" || recon == "zf", "recon.method must be 'pe' or 'zf'");
  PEConfig::preset(pe_preset);
  pe.validate();
  require(generation.n_candidates >= 1, "candidates.n_candidates must be >= 1");
  require(generation.lowcorr_shortlist >= 2 && generation.lowcorr_shortlist <= generation.lowcorr_total,
          "candidates: need 2 <= lowcorr_shortlist <= lowcorr_total");
  const int proto_n = Protocol::preset(protocol, N).N();
  if (protocol != "t1_se") {
    require(proto_n == N, "protocol '" + protocol + "' has " + std::to_string(proto_n) + " acquisitions, N is " +
                              std::to_string(N));
  } else {
    require(mode != EvalMode::per_contrast, "per_contrast evaluation needs distinct contrasts");
  }
  if (std::count(strategies.begin(), strategies.end(), Strategy::low_corr) > 0) {
    require(N <= generation.lowcorr_shortlist, "low_corr needs N <= lowcorr_shortlist");
  }
}

std::string ExperimentConfig::to_json() const {
  ojson j;
  j["name"] = name;
  j["grid"] = {grid.ny, grid.nz};
  j["N"] = N;
  j["R"] = effective_R();
  ojson s = ojson::array();
  for (Strategy st : strategies) s.push_back(to_string(st));
  j["strategies"] = s;
  j["mu"] = mu;
  j["seeds"] = {{"count", seed_count}, {"master", master_seed}};
  j["protocol"] = protocol;
  j["tissues"] = to_string(tissue_preset());
  j["noise_variance"] = noise_variance;
  j["recon"] = {{"method", recon}, {"preset", pe_preset}, {"overrides", ojson::parse(pe.to_json())}};
  j["evaluation"] = to_string(eval_mode());
  j["candidates"] = {{"n_candidates", generation.n_candidates},
                     {"lowcorr_total", generation.lowcorr_total},
                     {"lowcorr_shortlist", generation.lowcorr_shortlist}};
  j["output_dir"] = output_dir;
  return j.dump(2);
}

std::string ExperimentConfig::hash() const {
  ExperimentConfig c = *this;
  c.output_dir.clear();
  return io::fnv1a_hex(c.to_json());
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("experiment config: ") + e.what());
  }
  require(j.is_object(), "expected a JSON object");
  ExperimentConfig c;
  nlohmann::json overrides;
  for (const auto& [key, v] : j.items()) {
    if (key == "name") {
      c.name = get_as<std::string>(v, key);
    } else if (key == "grid") {
      require(v.is_array() && v.size() == 2, "grid must be [ny, nz]");
      c.grid = {get_as<int>(v[0], key), get_as<int>(v[1], key)};
    } else if (key == "N") {
      require(v.is_number_integer(), "N must be an integer");
      c.N = v.get<int>();
    } else if (key == "R") {
      require(v.is_number(), "R must be a number");
      c.R = v.get<double>();
    } else if (key == "strategies") {
      require(v.is_array(), "strategies must be an array");
      c.strategies.clear();
      for (const auto& s : v) {
        try {
          c.strategies.push_back(parse_strategy(get_as<std::string>(s, key)));
        } catch (const ValidationError& e) {
          throw ValidationError(std::string("experiment config: ") + e.what());
        }
      }
    } else if (key == "mu") {
      require(v.is_number(), "mu must be a number");
      c.mu = v.get<double>();
    } else if (key == "seeds") {
      require(v.is_object(), "seeds must be an object");
      for (const auto& [k2, v2] : v.items()) {
        if (k2 == "count") {
          require(v2.is_number_integer(), "seeds.count must be an integer");
          c.seed_count = v2.get<int>();
        } else if (k2 == "master") {
          require(v2.is_number_unsigned(), "seeds.master must be a non-negative integer");
          c.master_seed = v2.get<std::uint64_t>();
        } else {
          require(false, "unknown key 'seeds." + k2 + "'");
        }
      }
    } else if (key == "protocol") {
      c.protocol = get_as<std::string>(v, key);
    } else if (key == "tissues") {
      c.tissues = get_as<std::string>(v, key);
    } else if (key == "noise_variance") {
      require(v.is_array(), "noise_variance must be an array");
      c.noise_variance.clear();
      for (const auto& x : v) {
        require(x.is_number(), "noise_variance entries must be numbers");
        c.noise_variance.push_back(x.get<double>());
      }
    } else if (key == "recon") {
      require(v.is_object(), "recon must be an object");
      for (const auto& [k2, v2] : v.items()) {
        if (k2 == "method") c.recon = get_as<std::string>(v2, "recon.method");
        else if (k2 == "preset") c.pe_preset = get_as<std::string>(v2, "recon.preset");
        else if (k2 == "overrides") {
          require(v2.is_object(), "recon.overrides must be an object");
          overrides = v2;
        } else {
          require(false, "unknown key 'recon." + k2 + "'");
        }
      }
    } else if (key == "evaluation") {
      c.evaluation = get_as<std::string>(v, key);
    } else if (key == "candidates") {
      require(v.is_object(), "candidates must be an object");
      for (const auto& [k2, v2] : v.items()) {
        require(v2.is_number_integer(), "candidates." + k2 + " must be an integer");
        if (k2 == "n_candidates") c.generation.n_candidates = v2.get<int>();
        else if (k2 == "lowcorr_total") c.generation.lowcorr_total = v2.get<int>();
        else if (k2 == "lowcorr_shortlist") c.generation.lowcorr_shortlist = v2.get<int>();
        else require(false, "unknown key 'candidates." + k2 + "'");
      }
    } else if (key == "output_dir") {
      c.output_dir = get_as<std::string>(v, key);
    } else if (key == "$schema") {
      continue;
    } else {
      require(false, "unknown key '" + key + "'");
    }
  }
  c.pe = PEConfig::preset(c.pe_preset);
  if (!overrides.is_null()) c.pe = PEConfig::from_json(overrides.dump(), c.pe);
  c.validate();
  return c;
}

PreparedData prepare_data(const ExperimentConfig& cfg) {
  cfg.validate();
  PreparedData d;
  d.density = design_density(cfg.grid, cfg.effective_R());
  d.protocol = Protocol::preset(cfg.protocol, cfg.N);
  const PhantomSpec spec = make_analytic_phantom(cfg.grid, cfg.tissue_preset());
  std::vector<ComplexImage> imgs = render_acquisitions(spec, d.protocol);
  // A single-contrast protocol is acquired N times.
  while (static_cast<int>(imgs.size()) < cfg.N) imgs.push_back(imgs.front());
  d.reference = imgs;
  for (int n = 0; n < cfg.N; ++n) d.kspace.push_back(forward_kspace(imgs[n], n));
  return d;
}

std::uint64_t replica_seed(std::uint64_t master, int seed_index) {
  return rng::derive(master, {static_cast<std::uint64_t>(seed_index)});
}

ReplicaResult run_replica(const ExperimentConfig& cfg, const PreparedData& data, Strategy s, double mu,
                          int seed_index, double noise_variance, ReplicaArtifacts* artifacts) {
  ReplicaResult r;
  r.strategy = s;
  r.mu = mu;
  r.seed_index = seed_index;
  r.seed = replica_seed(cfg.master_seed, seed_index);
  r.noise_variance = noise_variance;

  PatternSet set = generate_set(s, data.density, cfg.N, mu, r.seed, cfg.generation);
  r.aggregate_pct = empirical_coverage(set).aggregate_pct;

  // Noise depends on seed and level only, so strategies see the same noise.
  const std::uint64_t noise_seed =
      rng::derive(r.seed, {kNoiseStream, std::bit_cast<std::uint64_t>(noise_variance)});
  std::vector<KSpaceData> acquired;
  acquired.reserve(data.kspace.size());
  for (std::size_t n = 0; n < data.kspace.size(); ++n) {
    acquired.push_back(undersample(add_noise(data.kspace[n], noise_variance, noise_seed), set.patterns[n]));
  }

  std::vector<ComplexImage> images;
  if (cfg.recon == "pe") {
    ReconResult rec = pe_reconstruct(acquired, set.patterns, data.density, cfg.pe);
    images = std::move(rec.images);
    r.objective_trace = std::move(rec.objective_trace);
  } else {
    for (const auto& k : acquired) images.push_back(zf_recon(k, data.density));
  }

  const EvalMode mode = cfg.eval_mode();
  RealImage shown;
  if (mode == EvalMode::per_contrast) {
    for (std::size_t n = 0; n < images.size(); ++n) {
      const QualityReport q = evaluate(magnitude(images[n]), magnitude(data.reference[n]), false, static_cast<int>(n));
      r.contrast_psnr.push_back(q.psnr_db);
      r.contrast_ssim.push_back(q.ssim_pct);
    }
    r.psnr_db = mean_of(r.contrast_psnr);
    r.ssim_pct = mean_of(r.contrast_ssim);
    shown = evaluated_image(EvalMode::average, images);
  } else {
    shown = evaluated_image(mode, images);
    const RealImage ref = evaluated_image(mode, data.reference);
    const QualityReport q = evaluate(shown, ref, true, -1);
    r.psnr_db = q.psnr_db;
    r.ssim_pct = q.ssim_pct;
  }

  if (artifacts) {
    artifacts->patterns = std::move(set);
    artifacts->images = std::move(images);
    artifacts->evaluated = std::move(shown);
  }
  return r;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return pairwise_sum(v) / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  std::vector<double> d(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) d[i] = (v[i] - m) * (v[i] - m);
  return std::sqrt(pairwise_sum(d) / static_cast<double>(v.size() - 1));
}

std::vector<StrategySummary> summarize(const std::vector<ReplicaResult>& results) {
  std::vector<StrategySummary> out;
  std::vector<std::vector<const ReplicaResult*>> groups;
  for (const auto& r : results) {
    auto it = std::find_if(out.begin(), out.end(), [&](const StrategySummary& s) {
      return s.strategy == r.strategy && s.mu == r.mu && s.noise_variance == r.noise_variance;
    });
    if (it == out.end()) {
      out.push_back({r.strategy, r.mu, r.noise_variance});
      groups.emplace_back();
      it = out.end() - 1;
    }
    groups[static_cast<std::size_t>(it - out.begin())].push_back(&r);
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    std::vector<double> p, s, a;
    for (const ReplicaResult* r : groups[g]) {
      p.push_back(r->psnr_db);
      s.push_back(r->ssim_pct);
      a.push_back(r->aggregate_pct);
    }
    out[g].replicas = static_cast<int>(p.size());
    out[g].psnr_mean = mean_of(p);
    out[g].psnr_std = stddev_of(p);
    out[g].ssim_mean = mean_of(s);
    out[g].ssim_std = stddev_of(s);
    out[g].aggregate_mean = mean_of(a);
  }
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const PreparedData data = prepare_data(cfg);
  std::vector<Job> jobs;
  for (std::size_t v = 0; v < cfg.noise_variance.size(); ++v) {
    for (Strategy s : cfg.strategies) {
      for (int i = 0; i < cfg.seed_count; ++i) {
        jobs.push_back({s, s == Strategy::segregated ? cfg.mu : 0.0, i, static_cast<int>(v)});
      }
    }
  }
  const bool write = !cfg.output_dir.empty();
  std::vector<ReplicaArtifacts> arts;
  ExperimentReport rep;
  rep.config = cfg;
  rep.replicas = run_jobs(cfg, data, jobs, write ? &arts : nullptr);
  rep.summary = summarize(rep.replicas);

  ojson j;
  j["name"] = cfg.name;
  j["version"] = std::string(io::kVersion);
  j["config_hash"] = cfg.hash();
  j["protocol"] = cfg.protocol;
  j["evaluation"] = to_string(cfg.eval_mode());
  j["recon"] = cfg.recon;
  j["N"] = cfg.N;
  j["R"] = cfg.effective_R();
  ojson rows = ojson::array();
  for (const auto& s : rep.summary) rows.push_back(summary_to_json(s));
  j["summary"] = rows;
  ojson order = ojson::array();
  for (double nv : cfg.noise_variance) {
    std::vector<StrategySummary> at;
    for (const auto& s : rep.summary) {
      if (s.noise_variance == nv) at.push_back(s);
    }
    std::stable_sort(at.begin(), at.end(),
                     [](const StrategySummary& a, const StrategySummary& b) { return a.psnr_mean > b.psnr_mean; });
    ojson names = ojson::array();
    for (const auto& s : at) names.push_back(to_string(s.strategy));
    order.push_back({{"noise_variance", nv}, {"psnr_descending", names}});
  }
  j["psnr_ordering"] = order;
  j["quality"] = ojson::parse(quality_metadata_json());
  rep.summary_json = j.dump(2) + "\n";

  if (write) {
    write_artifacts(cfg, data, jobs, rep.replicas, arts);
    io::write_atomic(std::filesystem::path(cfg.output_dir) / "summary.json", rep.summary_json);
  }
  return rep;
}

std::vector<StrategySummary> mu_sweep(const ExperimentConfig& cfg, const std::vector<double>& mus) {
  cfg.validate();
  for (double m : mus) require(m >= 0.0 && m <= 1.0, "mu sweep values must lie in [0, 1]");
  const PreparedData data = prepare_data(cfg);
  std::vector<Job> jobs;
  for (std::size_t v = 0; v < cfg.noise_variance.size(); ++v) {
    for (double m : mus) {
      for (int i = 0; i < cfg.seed_count; ++i) jobs.push_back({Strategy::segregated, m, i, static_cast<int>(v)});
    }
  }
  return summarize(run_jobs(cfg, data, jobs, nullptr));
}

std::vector<Table1Row> sweep_table1(const GridSpec& grid, const std::vector<double>& Rs, const std::vector<int>& Ns,
                                    int seed_count, std::uint64_t master_seed, double mu,
                                    const GenerationOptions& opts) {
  if (Rs.empty() || Ns.empty()) throw ValidationError("sweep_table1: empty R or N list");
  if (seed_count < 1) throw ValidationError("sweep_table1: seed_count must be >= 1");
  for (int n : Ns) {
    if (n < 1) throw ValidationError("sweep_table1: N must be >= 1");
  }
  const int n_max = *std::max_element(Ns.begin(), Ns.end());

  std::vector<Table1Row> rows;
  for (double R : Rs) {
    const SamplingDensity d = design_density(grid, R);
    // metrics[strategy][seed][N index] = {agg, diff, over}
    std::vector<std::vector<std::vector<std::array<double, 3>>>> metrics(
        2, std::vector<std::vector<std::array<double, 3>>>(static_cast<std::size_t>(seed_count)));
    for (int s = 0; s < seed_count; ++s) {
      const std::uint64_t seed = replica_seed(master_seed, s);
      const PatternSet full[2] = {generate_random_set(d, n_max, seed, opts.n_candidates),
                                  generate_segregated_set(d, n_max, mu, seed, opts.n_candidates)};
      for (int k = 0; k < 2; ++k) {
        // Both generators are sequential, so the first N patterns form the N-pattern set.
        for (int n : Ns) {
          PatternSet sub = full[k];
          sub.patterns.resize(static_cast<std::size_t>(n));
          const CoverageReport c = empirical_coverage(sub);
          metrics[k][s].push_back({c.aggregate_pct, c.differential_mean, c.overlap_pct});
        }
      }
    }
    for (std::size_t ni = 0; ni < Ns.size(); ++ni) {
      Table1Row row;
      row.R = R;
      row.N = Ns[ni];
      double m[2][3];
      for (int k = 0; k < 2; ++k) {
        for (int q = 0; q < 3; ++q) {
          std::vector<double> v;
          for (int s = 0; s < seed_count; ++s) v.push_back(metrics[k][s][ni][q]);
          m[k][q] = mean_of(v);
        }
      }
      row.random_agg = m[0][0];
      row.random_diff = m[0][1];
      row.random_over = m[0][2];
      row.segregated_agg = m[1][0];
      row.segregated_diff = m[1][1];
      row.segregated_over = m[1][2];
      row.delta_agg = m[1][0] - m[0][0];
      row.delta_diff = (m[1][1] - m[0][1]) * R;
      row.delta_over = (m[1][2] - m[0][2]) * R;
      rows.push_back(row);
    }
  }
  return rows;
}

} // namespace segsamp
