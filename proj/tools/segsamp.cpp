// segsamp: density design, pattern generation, simulation, reconstruction and
// evaluation from the command line.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "segsamp/density.hpp"
#include "segsamp/experiment.hpp"
#include "segsamp/io.hpp"
#include "segsamp/parallel.hpp"
#include "segsamp/patterns.hpp"
#include "segsamp/phantom.hpp"
#include "segsamp/quality.hpp"
#include "segsamp/recon.hpp"
#include "segsamp/rng.hpp"
#include "segsamp/stats.hpp"

namespace fs = std::filesystem;
using namespace segsamp;
using ojson = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kValidation = 3, kNumerical = 4 };

GridSpec parse_grid(const std::string& s) {
  const auto x = s.find('x');
  try {
    if (x == std::string::npos) {
      const int n = std::stoi(s);
      return {n, n};
    }
    return {std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
  } catch (const std::exception&) {
    throw ValidationError("grid must look like 256x256, got '" + s + "'");
  }
}

fs::path output_root() {
  const char* env = std::getenv("SEGSAMP_OUT");
  return env && *env ? fs::path(env) : fs::path("segsamp_out");
}

fs::path resolve_out(const std::string& flag, const std::string& sub) {
  return flag.empty() ? output_root() / sub : fs::path(flag);
}

std::string hash_of(const ojson& j) { return io::fnv1a_hex(j.dump()); }

void write_json(const fs::path& p, const ojson& j) { io::write_atomic(p, j.dump(2) + "\n"); }

ojson read_json(const fs::path& p) {
  try {
    return ojson::parse(io::read_file(p));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(p.string() + ": " + e.what());
  }
}

ojson coverage_json(const CoverageReport& c) {
  ojson j;
  j["N"] = c.N;
  j["R"] = c.R;
  j["aggregate_pct"] = c.aggregate_pct;
  j["differential_pct"] = c.differential_pct;
  j["differential_mean"] = c.differential_mean;
  j["differential_std"] = c.differential_std;
  j["differential_total_pct"] = c.differential_total_pct;
  j["overlap_pct"] = c.overlap_pct;
  return j;
}

// ---- density ----

struct DensityArgs {
  double R = 0.0;
  std::string grid = "256x256";
  std::optional<int> degree;
  std::optional<double> center_fraction;
  std::string out;
};

int cmd_density(const DensityArgs& a) {
  const GridSpec g = parse_grid(a.grid);
  const SamplingDensity d = design_density(g, a.R, a.degree, a.center_fraction);
  ojson meta;
  meta["version"] = std::string(io::kVersion);
  meta["grid"] = {g.ny, g.nz};
  meta["R"] = a.R;
  meta["degree"] = d.degree;
  meta["center_fraction"] = d.center_fraction;
  meta["offset"] = d.offset;
  meta["mean"] = d.mean();
  const std::string h = hash_of({{"grid", meta["grid"]}, {"R", a.R}, {"degree", d.degree},
                                 {"center_fraction", d.center_fraction}});
  meta["config_hash"] = h;
  const fs::path out = resolve_out(a.out, "density");
  io::write_grid_csv(out / "density.csv", d.values, "p", h);
  io::write_real_pgm(out / "density.pgm", d.values, 1.0);
  write_json(out / "density.json", meta);
  std::cout << "density R=" << a.R << " mean=" << d.mean() << " -> " << out.string() << "\n";
  return kOk;
}

// ---- patterns ----

struct PatternArgs {
  double R = 0.0;
  int N = 0;
  std::string grid = "256x256";
  std::string strategy = "segregated";
  double mu = 0.0;
  std::uint64_t seed = 1;
  GenerationOptions gen;
  std::string out;
};

int cmd_patterns(const PatternArgs& a) {
  const GridSpec g = parse_grid(a.grid);
  if (!(a.mu >= 0.0 && a.mu <= 1.0)) throw ValidationError("mu must lie in [0, 1]");
  if (a.N < 1) throw ValidationError("N must be >= 1");
  const Strategy s = parse_strategy(a.strategy);
  const SamplingDensity d = design_density(g, a.R);
  const PatternSet set = generate_set(s, d, a.N, a.mu, a.seed, a.gen);
  const CoverageReport cov = empirical_coverage(set);

  ojson cfg{{"grid", {g.ny, g.nz}}, {"R", a.R}, {"N", a.N}, {"strategy", to_string(s)}, {"mu", a.mu},
            {"seed", a.seed}, {"n_candidates", a.gen.n_candidates}};
  const std::string h = hash_of(cfg);
  const fs::path out = resolve_out(a.out, "patterns");

  ojson pats = ojson::array();
  for (int n = 0; n < set.size(); ++n) {
    const auto& p = set.patterns[n];
    const std::string stem = "mask_" + std::to_string(n);
    io::write_mask_csv(out / (stem + ".csv"), p.mask, h);
    io::write_mask_pgm(out / (stem + ".pgm"), p.mask);
    const PsfMetrics m = psf_metrics(p);
    pats.push_back({{"index", n}, {"seed", p.seed}, {"samples", p.count()}, {"file", stem + ".pgm"},
                    {"r_psf", m.r_psf}, {"aliasing_energy", m.aliasing_energy}});
  }

  io::CsvTable t{{"kr_center", "cells", "aggregate_pct", "differential_pct", "overlap_pct"}, {}};
  for (const auto& an : cov.annuli) {
    t.rows.push_back({io::format_double(an.kr_center), std::to_string(an.cells), io::format_double(an.aggregate_pct),
                      io::format_double(an.differential_pct), io::format_double(an.overlap_pct)});
  }
  io::write_csv(out / "coverage_radial.csv", t, h);

  ojson man;
  man["version"] = std::string(io::kVersion);
  man["config_hash"] = h;
  man["config"] = cfg;
  man["patterns"] = pats;
  man["coverage"] = coverage_json(cov);
  man["coverage_normalized"] = coverage_json(empirical_coverage(set, true));
  write_json(out / "manifest.json", man);
  std::cout << to_string(s) << " N=" << a.N << " R=" << a.R << " aggregate=" << cov.aggregate_pct
            << "% differential_mean=" << cov.differential_mean << "% overlap=" << cov.overlap_pct << "%\n";
  return kOk;
}

// ---- sweep-table1 ----

struct SweepArgs {
  std::string grid = "256x256";
  std::vector<double> Rs{2, 4, 6, 8};
  std::vector<int> Ns{2, 3, 4, 6, 8, 10};
  int seeds = 10;
  std::uint64_t master = 1;
  double mu = 0.0;
  int n_candidates = 1000;
  std::string out;
};

int cmd_sweep_table1(const SweepArgs& a) {
  const GridSpec g = parse_grid(a.grid);
  GenerationOptions opts;
  opts.n_candidates = a.n_candidates;
  const auto rows = sweep_table1(g, a.Rs, a.Ns, a.seeds, a.master, a.mu, opts);
  const std::string h = hash_of({{"grid", {g.ny, g.nz}}, {"R", a.Rs}, {"N", a.Ns}, {"seeds", a.seeds},
                                 {"master", a.master}, {"mu", a.mu}, {"n_candidates", a.n_candidates}});
  io::CsvTable t{{"R", "N", "random_agg", "random_diff", "random_over", "segregated_agg", "segregated_diff",
                  "segregated_over", "delta_agg", "delta_diff", "delta_over"},
                 {}};
  for (const auto& r : rows) {
    t.rows.push_back({io::format_double(r.R), std::to_string(r.N), io::format_double(r.random_agg),
                      io::format_double(r.random_diff), io::format_double(r.random_over),
                      io::format_double(r.segregated_agg), io::format_double(r.segregated_diff),
                      io::format_double(r.segregated_over), io::format_double(r.delta_agg),
                      io::format_double(r.delta_diff), io::format_double(r.delta_over)});
  }
  const fs::path out = resolve_out(a.out, "sweep-table1");
  io::write_csv(out / "table1.csv", t, h);
  std::cout << "R   N   dAgg   dDiff   dOver\n";
  for (const auto& r : rows) {
    std::printf("%-3g %-3d %6.1f %7.1f %7.1f\n", r.R, r.N, r.delta_agg, r.delta_diff, r.delta_over);
  }
  return kOk;
}

// ---- simulate ----

struct SimulateArgs {
  std::string protocol = "bssfp";
  int N = 4;
  std::string grid = "128x128";
  std::string tissues;
  std::string label_volume;
  double R = 1.0;
  std::string strategy = "segregated";
  double mu = 0.0;
  std::uint64_t seed = 1;
  double noise = 0.0;
  int n_candidates = 1000;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
  const GridSpec g = parse_grid(a.grid);
  const Protocol proto = Protocol::preset(a.protocol, a.N);
  for (const auto& w : proto.validate()) std::cerr << "warning: " << w << "\n";
  const TissuePreset tp = !a.tissues.empty() ? parse_tissue_preset(a.tissues)
                                             : (a.protocol == "t1_se" ? TissuePreset::t1_set : TissuePreset::bssfp_set);
  const PhantomSpec spec = a.label_volume.empty() ? make_analytic_phantom(g, tp)
                                                  : load_label_volume(a.label_volume, tissue_table(tp));
  std::vector<ComplexImage> imgs = render_acquisitions(spec, proto);
  const int N = std::max(a.N, proto.N());
  if (proto.N() > 1 && proto.N() != a.N) {
    std::cerr << "note: protocol " << a.protocol << " has " << proto.N() << " acquisitions; using N=" << proto.N()
              << "\n";
  }
  const int n_acq = proto.N() > 1 ? proto.N() : N;
  while (static_cast<int>(imgs.size()) < n_acq) imgs.push_back(imgs.front());

  const bool under = a.R > 1.0;
  std::optional<PatternSet> set;
  SamplingDensity d = uniform_density(spec.grid, 1.0);
  if (under) {
    d = design_density(spec.grid, a.R);
    GenerationOptions opts;
    opts.n_candidates = a.n_candidates;
    set = generate_set(parse_strategy(a.strategy), d, n_acq, a.mu, a.seed, opts);
  }

  ojson cfg{{"protocol", a.protocol}, {"N", n_acq}, {"grid", {spec.grid.ny, spec.grid.nz}},
            {"tissues", to_string(tp)}, {"label_volume", a.label_volume}, {"R", under ? a.R : 1.0},
            {"strategy", under ? a.strategy : "full"}, {"mu", a.mu}, {"seed", a.seed}, {"noise_variance", a.noise}};
  const std::string h = hash_of(cfg);
  const fs::path out = resolve_out(a.out, "simulate");
  const std::uint64_t noise_seed = rng::derive(a.seed, {0x6E6F697365ULL});
  ojson files = ojson::array();
  for (int n = 0; n < n_acq; ++n) {
    KSpaceData k = add_noise(forward_kspace(imgs[n], n), a.noise, noise_seed);
    const std::string stem = "acq" + std::to_string(n);
    ojson entry{{"index", n}, {"kspace", "kspace/" + stem + ".raw"}, {"reference", "reference/" + stem + ".raw"}};
    if (set) {
      k = undersample(k, set->patterns[n]);
      io::write_mask_pgm(out / "masks" / (stem + ".pgm"), k.mask);
      entry["mask"] = "masks/" + stem + ".pgm";
    }
    io::write_complex_raw(out / "kspace" / (stem + ".raw"), k.samples,
                          ojson{{"domain", "kspace"}, {"acquisition", n}}.dump());
    io::write_complex_raw(out / "reference" / (stem + ".raw"), imgs[n],
                          ojson{{"domain", "image"}, {"acquisition", n}}.dump());
    files.push_back(entry);
  }
  ojson man{{"version", std::string(io::kVersion)}, {"config_hash", h}, {"config", cfg}, {"acquisitions", files}};
  if (set) man["coverage"] = coverage_json(empirical_coverage(*set));
  write_json(out / "manifest.json", man);
  std::cout << "simulated " << n_acq << " acquisitions -> " << out.string() << "\n";
  return kOk;
}

// ---- recon ----

struct ReconArgs {
  std::string data;
  std::string method = "pe";
  std::string preset = "phantom";
  std::string pe_config;
  std::string out;
};

int cmd_recon(const ReconArgs& a) {
  const fs::path dir = a.data;
  if (!fs::exists(dir / "manifest.json")) throw IoError("no dataset manifest in " + dir.string());
  const ojson man = read_json(dir / "manifest.json");
  const ojson& cfg = man.at("config");
  const GridSpec g{cfg.at("grid")[0].get<int>(), cfg.at("grid")[1].get<int>()};
  const double R = cfg.at("R").get<double>();
  const SamplingDensity d = R > 1.0 ? design_density(g, R) : uniform_density(g, 1.0);

  std::vector<KSpaceData> data;
  std::vector<SamplingPattern> pats;
  for (const auto& e : man.at("acquisitions")) {
    const int n = e.at("index").get<int>();
    KSpaceData k{g, io::read_complex_raw(dir / e.at("kspace").get<std::string>()), n, {}};
    require_same_grid(g, k.samples.grid(), "recon");
    SamplingPattern p{g, Mask(g, 1), 0};
    if (e.contains("mask")) {
      p.mask = io::read_mask_pgm(dir / e.at("mask").get<std::string>());
      k.mask = p.mask;
    }
    data.push_back(std::move(k));
    pats.push_back(std::move(p));
  }

  PEConfig pe = PEConfig::preset(a.preset);
  if (!a.pe_config.empty()) pe = PEConfig::from_json(io::read_file(a.pe_config), pe);

  std::vector<ComplexImage> imgs;
  std::vector<double> trace;
  if (a.method == "zf") {
    for (const auto& k : data) imgs.push_back(zf_recon(k, d));
  } else if (a.method == "pe") {
    ReconResult r = pe_reconstruct(data, pats, d, pe);
    imgs = std::move(r.images);
    trace = std::move(r.objective_trace);
  } else {
    throw ValidationError("method must be 'pe' or 'zf'");
  }

  ojson rc{{"data_hash", man.value("config_hash", "")}, {"method", a.method}};
  if (a.method == "pe") rc["pe"] = ojson::parse(pe.to_json());
  const std::string h = hash_of(rc);
  const fs::path out = resolve_out(a.out, "recon");
  ojson files = ojson::array();
  for (std::size_t n = 0; n < imgs.size(); ++n) {
    const std::string f = "acq" + std::to_string(n) + ".raw";
    io::write_complex_raw(out / f, imgs[n], ojson{{"domain", "image"}, {"acquisition", n}, {"method", a.method}}.dump());
    files.push_back(f);
  }
  if (!trace.empty()) {
    io::CsvTable t{{"iteration", "objective"}, {}};
    for (std::size_t i = 0; i < trace.size(); ++i) t.rows.push_back({std::to_string(i), io::format_double(trace[i])});
    io::write_csv(out / "objective.csv", t, h);
  }
  rc["version"] = std::string(io::kVersion);
  rc["config_hash"] = h;
  rc["images"] = files;
  rc["outer_iterations"] = trace.size();
  write_json(out / "recon.json", rc);
  std::cout << a.method << " recon of " << imgs.size() << " acquisitions -> " << out.string() << "\n";
  return kOk;
}

// ---- evaluate ----

struct EvaluateArgs {
  std::vector<std::string> recon;
  std::string reference;
  std::string mode = "combined";
  std::string mu_sweep_config;
  std::vector<double> mus{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::string out;
};

std::vector<ComplexImage> load_images(const fs::path& dir) {
  std::vector<ComplexImage> imgs;
  for (int n = 0;; ++n) {
    const fs::path p = dir / ("acq" + std::to_string(n) + ".raw");
    if (!fs::exists(p)) break;
    imgs.push_back(io::read_complex_raw(p));
  }
  if (imgs.empty()) throw IoError("no acq<n>.raw images in " + dir.string());
  return imgs;
}

std::vector<ComplexImage> load_reference(const fs::path& p) {
  if (fs::exists(p / "reference")) return load_images(p / "reference");
  return load_images(p);
}

int cmd_mu_sweep(const EvaluateArgs& a) {
  ExperimentConfig cfg = ExperimentConfig::from_json(io::read_file(a.mu_sweep_config));
  const auto rows = mu_sweep(cfg, a.mus);
  io::CsvTable t{{"N", "mu", "noise_variance", "replicas", "coverage_pct", "psnr_mean", "psnr_std", "ssim_mean",
                  "ssim_std"},
                 {}};
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(cfg.N), io::format_double(r.mu), io::format_double(r.noise_variance),
                      std::to_string(r.replicas), io::format_double(r.aggregate_mean), io::format_double(r.psnr_mean),
                      io::format_double(r.psnr_std), io::format_double(r.ssim_mean), io::format_double(r.ssim_std)});
  }
  const fs::path out = resolve_out(a.out, "evaluate");
  io::write_csv(out / "mu_sweep.csv", t, cfg.hash());
  for (const auto& r : rows) std::printf("mu=%.2f coverage=%.1f%% psnr=%.2f dB\n", r.mu, r.aggregate_mean, r.psnr_mean);
  return kOk;
}

int cmd_evaluate(const EvaluateArgs& a) {
  if (!a.mu_sweep_config.empty()) return cmd_mu_sweep(a);
  if (a.recon.empty() || a.reference.empty()) throw CLI::ValidationError("evaluate needs --recon and --reference");
  const EvalMode mode = parse_eval_mode(a.mode);
  const auto ref = load_reference(a.reference);

  ojson reports = ojson::array();
  io::CsvTable t{{"recon", "contrast", "psnr_db", "ssim_pct", "mse"}, {}};
  std::vector<double> ps, ss;
  RealImage first_mse;
  for (const auto& dir : a.recon) {
    const auto imgs = load_images(dir);
    if (imgs.size() != ref.size()) throw ValidationError("recon and reference acquisition counts differ");
    std::vector<QualityReport> qs;
    if (mode == EvalMode::per_contrast) {
      for (std::size_t n = 0; n < imgs.size(); ++n) {
        qs.push_back(evaluate(magnitude(imgs[n]), magnitude(ref[n]), false, static_cast<int>(n)));
      }
    } else {
      auto reduce = [&](const std::vector<ComplexImage>& v) {
        if (mode == EvalMode::combined) return pnorm_combine(v, 2.0);
        ComplexImage avg(v.front().grid(), cd{});
        for (const auto& x : v) {
          for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += x[i] / static_cast<double>(v.size());
        }
        return magnitude(avg);
      };
      qs.push_back(evaluate(reduce(imgs), reduce(ref), true, -1));
    }
    std::vector<double> p, s;
    for (const auto& q : qs) {
      const std::string c = q.combined ? "combined" : std::to_string(q.acquisition_index);
      t.rows.push_back({dir, c, io::format_double(q.psnr_db), io::format_double(q.ssim_pct), io::format_double(q.mse)});
      reports.push_back({{"recon", dir}, {"contrast", c}, {"psnr_db", q.psnr_db}, {"ssim_pct", q.ssim_pct},
                         {"mse", q.mse}});
      p.push_back(q.psnr_db);
      s.push_back(q.ssim_pct);
    }
    ps.push_back(mean_of(p));
    ss.push_back(mean_of(s));
    if (first_mse.empty()) first_mse = qs.front().mse_map;
  }

  ojson cfg{{"recon", a.recon}, {"reference", a.reference}, {"mode", to_string(mode)}};
  const std::string h = hash_of(cfg);
  const fs::path out = resolve_out(a.out, "evaluate");
  if (a.recon.size() > 1) {
    t.rows.push_back({"mean", "all", io::format_double(mean_of(ps)), io::format_double(mean_of(ss)), ""});
    t.rows.push_back({"std", "all", io::format_double(stddev_of(ps)), io::format_double(stddev_of(ss)), ""});
  }
  io::write_csv(out / "quality.csv", t, h);
  RealImage logmse(first_mse.grid(), 0.0);
  for (std::size_t i = 0; i < logmse.size(); ++i) logmse[i] = std::log10(first_mse[i] + 1e-30);
  io::write_grid_csv(out / "mse_log10.csv", logmse, "log10_mse", h);
  ojson j{{"version", std::string(io::kVersion)}, {"config_hash", h}, {"config", cfg}, {"reports", reports},
          {"psnr_mean", mean_of(ps)}, {"psnr_std", stddev_of(ps)}, {"ssim_mean", mean_of(ss)},
          {"ssim_std", stddev_of(ss)}, {"metrics", ojson::parse(quality_metadata_json())}};
  write_json(out / "quality.json", j);
  std::printf("PSNR %.2f +- %.2f dB  SSIM %.2f +- %.2f %%\n", mean_of(ps), stddev_of(ps), mean_of(ss), stddev_of(ss));
  return kOk;
}

// ---- experiment ----

struct ExperimentArgs {
  std::string config;
  std::string out;
};

int cmd_experiment(const ExperimentArgs& a) {
  ExperimentConfig cfg = ExperimentConfig::from_json(io::read_file(a.config));
  if (!a.out.empty()) cfg.output_dir = a.out;
  if (cfg.output_dir.empty()) cfg.output_dir = (output_root() / cfg.name).string();
  const ExperimentReport rep = run_experiment(cfg);
  for (const auto& s : rep.summary) {
    std::printf("%-10s noise=%-8g PSNR %.2f +- %.2f dB  SSIM %.2f +- %.2f %%  coverage %.1f%%\n",
                to_string(s.strategy).c_str(), s.noise_variance, s.psnr_mean, s.psnr_std, s.ssim_mean, s.ssim_std,
                s.aggregate_mean);
  }
  std::cout << "summary -> " << (fs::path(cfg.output_dir) / "summary.json").string() << "\n";
  return kOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Segregated k-space sampling for multi-acquisition MRI"};
  app.set_version_flag("--version", std::string(io::kVersion));
  app.require_subcommand(1);
  unsigned workers = 0;
  app.add_option("--workers", workers, "Worker threads (0 = hardware)");

  DensityArgs da;
  auto* sd = app.add_subcommand("density", "Design a variable-density sampling profile");
  sd->add_option("--R", da.R, "Acceleration factor")->required();
  sd->add_option("--grid", da.grid, "Phase-encode grid, e.g. 256x256")->capture_default_str();
  sd->add_option("--degree", da.degree, "Polynomial degree override");
  sd->add_option("--center-fraction", da.center_fraction, "Fully sampled disk radius (normalized)");
  sd->add_option("--out", da.out, "Output directory");

  PatternArgs pa;
  auto* sp = app.add_subcommand("patterns", "Generate a pattern set and its coverage report");
  sp->add_option("--R", pa.R, "Acceleration factor")->required();
  sp->add_option("--N", pa.N, "Number of acquisitions")->required();
  sp->add_option("--grid", pa.grid)->capture_default_str();
  sp->add_option("--strategy", pa.strategy, "random | low_corr | segregated")->capture_default_str();
  sp->add_option("--mu", pa.mu, "Covered-location weight")->capture_default_str();
  sp->add_option("--seed", pa.seed)->capture_default_str();
  sp->add_option("--candidates", pa.gen.n_candidates, "Candidates per acquisition")->capture_default_str();
  sp->add_option("--lowcorr-total", pa.gen.lowcorr_total)->capture_default_str();
  sp->add_option("--lowcorr-shortlist", pa.gen.lowcorr_shortlist)->capture_default_str();
  sp->add_option("--out", pa.out);

  SweepArgs wa;
  auto* sw = app.add_subcommand("sweep-table1", "Random vs segregated coverage deltas over (R, N)");
  sw->add_option("--grid", wa.grid)->capture_default_str();
  sw->add_option("--R", wa.Rs)->delimiter(',')->capture_default_str();
  sw->add_option("--N", wa.Ns)->delimiter(',')->capture_default_str();
  sw->add_option("--seeds", wa.seeds)->capture_default_str();
  sw->add_option("--master-seed", wa.master)->capture_default_str();
  sw->add_option("--mu", wa.mu)->capture_default_str();
  sw->add_option("--candidates", wa.n_candidates)->capture_default_str();
  sw->add_option("--out", wa.out);

  SimulateArgs ma;
  auto* sm = app.add_subcommand("simulate", "Render phantom acquisitions and store k-space datasets");
  sm->add_option("--protocol", ma.protocol, "bssfp | t1_se | t2_se")->capture_default_str();
  sm->add_option("--N", ma.N)->capture_default_str();
  sm->add_option("--grid", ma.grid)->capture_default_str();
  sm->add_option("--tissues", ma.tissues, "t1_set | bssfp_set");
  sm->add_option("--label-volume", ma.label_volume, "Raw 8-bit label volume with JSON header");
  sm->add_option("--R", ma.R, "Undersampling factor (1 = fully sampled)")->capture_default_str();
  sm->add_option("--strategy", ma.strategy)->capture_default_str();
  sm->add_option("--mu", ma.mu)->capture_default_str();
  sm->add_option("--seed", ma.seed)->capture_default_str();
  sm->add_option("--noise", ma.noise, "k-space noise variance")->capture_default_str();
  sm->add_option("--candidates", ma.n_candidates)->capture_default_str();
  sm->add_option("--out", ma.out);

  ReconArgs ra;
  auto* sr = app.add_subcommand("recon", "Reconstruct a stored dataset");
  sr->add_option("--data", ra.data, "Dataset directory from simulate")->required();
  sr->add_option("--method", ra.method, "pe | zf")->capture_default_str();
  sr->add_option("--preset", ra.preset, "phantom | bssfp_invivo | multicontrast")->capture_default_str();
  sr->add_option("--pe-config", ra.pe_config, "JSON file with PE parameter overrides");
  sr->add_option("--out", ra.out);

  EvaluateArgs ea;
  auto* se = app.add_subcommand("evaluate", "Compare reconstructions with the fully sampled reference");
  se->add_option("--recon", ea.recon, "Recon directory; repeat for a seed group");
  se->add_option("--reference", ea.reference, "Dataset or image directory holding the reference");
  se->add_option("--mode", ea.mode, "combined | per_contrast | average")->capture_default_str();
  se->add_option("--mu-sweep", ea.mu_sweep_config, "Run a mu sweep for this experiment config");
  se->add_option("--mus", ea.mus)->delimiter(',')->capture_default_str();
  se->add_option("--out", ea.out);

  ExperimentArgs xa;
  auto* sx = app.add_subcommand("experiment", "Run an end-to-end experiment from a JSON config");
  sx->add_option("config", xa.config, "Experiment config")->required();
  sx->add_option("--out", xa.out, "Overrides output_dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    set_worker_count(workers);
    if (*sd) return cmd_density(da);
    if (*sp) return cmd_patterns(pa);
    if (*sw) return cmd_sweep_table1(wa);
    if (*sm) return cmd_simulate(ma);
    if (*sr) return cmd_recon(ra);
    if (*se) return cmd_evaluate(ea);
    if (*sx) return cmd_experiment(xa);
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
