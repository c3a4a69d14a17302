#include "segsamp/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <json.hpp>

#include "segsamp/fft.hpp"
#include "segsamp/io.hpp"
#include "segsamp/parallel.hpp"
#include "segsamp/rng.hpp"

namespace segsamp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kB0StdHz = 62.0;

double deg2rad(double d) { return d * kPi / 180.0; }

struct Ellipse {
  double cy, cz, ay, az, angle_deg;
  std::uint8_t label;

  bool contains(double y, double z) const {
    const double t = deg2rad(angle_deg);
    const double dy = y - cy, dz = z - cz;
    const double u = dy * std::cos(t) + dz * std::sin(t);
    const double v = -dy * std::sin(t) + dz * std::cos(t);
    return (u * u) / (ay * ay) + (v * v) / (az * az) <= 1.0;
  }
};

// Painted in order; later shapes overwrite earlier ones.
// Labels: 1 CSF, 2 blood, 3 WM, 4 GM, 5 muscle, 6 fat.
const std::vector<Ellipse>& head_shapes() {
  static const std::vector<Ellipse> shapes{
      {0.00, 0.00, 0.92, 0.76, 0, 6},    // scalp fat
      {0.00, 0.00, 0.86, 0.70, 0, 5},    // muscle
      {0.00, 0.00, 0.81, 0.65, 0, 1},    // outer CSF
      {0.00, 0.00, 0.77, 0.61, 0, 4},    // cortex
      {0.02, 0.00, 0.62, 0.47, 0, 3},    // white matter
      {-0.35, -0.22, 0.14, 0.09, 20, 4}, // deep gray nuclei
      {-0.35, 0.22, 0.14, 0.09, -20, 4},
      {0.30, -0.18, 0.10, 0.12, 0, 4},
      {0.30, 0.18, 0.10, 0.12, 0, 4},
      {-0.05, -0.11, 0.24, 0.05, 12, 1}, // lateral ventricles
      {-0.05, 0.11, 0.24, 0.05, -12, 1},
      {0.28, 0.00, 0.04, 0.04, 0, 1},    // third ventricle
      {0.55, 0.00, 0.05, 0.05, 0, 2},    // vessels
      {-0.62, 0.18, 0.03, 0.03, 0, 2},
      {-0.62, -0.18, 0.03, 0.03, 0, 2},
      {0.10, 0.52, 0.025, 0.025, 0, 2},
      {0.10, -0.52, 0.025, 0.025, 0, 2},
      {0.00, 0.00, 0.02, 0.02, 0, 2},
  };
  return shapes;
}

double b0_poly(double y, double z) {
  return 0.9 * y - 0.5 * z + 0.8 * y * z + 0.7 * y * y - 0.45 * z * z + 0.35 * y * y * z;
}

} // namespace

void TissueParams::validate() const {
  if (!(T2 > 0.0 && T1 > T2)) throw ValidationError("tissue '" + name + "': need T1 > T2 > 0");
  if (!(PD > 0.0 && PD <= 1.0)) throw ValidationError("tissue '" + name + "': PD must lie in (0, 1]");
}

void PhantomSpec::validate() const {
  require_same_grid(grid, labels.grid(), "phantom labels");
  require_same_grid(grid, b0_map.grid(), "phantom b0 map");
  for (const auto& t : tissues) t.validate();
  for (auto l : labels) {
    if (l > tissues.size()) throw ValidationError("phantom label " + std::to_string(l) + " has no tissue");
  }
  for (double b : b0_map) {
    if (!std::isfinite(b)) throw ValidationError("phantom b0 map is not finite");
  }
}

TissuePreset parse_tissue_preset(const std::string& name) {
  if (name == "t1_set") return TissuePreset::t1_set;
  if (name == "bssfp_set") return TissuePreset::bssfp_set;
  throw ValidationError("unknown tissue preset '" + name + "'");
}

std::string to_string(TissuePreset p) { return p == TissuePreset::t1_set ? "t1_set" : "bssfp_set"; }

std::vector<TissueParams> tissue_table(TissuePreset preset) {
  if (preset == TissuePreset::bssfp_set) {
    return {{"csf", 3000, 1000, 1.0},  {"blood", 1200, 250, 1.0}, {"white_matter", 1000, 80, 0.77},
            {"gray_matter", 1300, 110, 0.86}, {"muscle", 1400, 30, 1.0}, {"fat", 370, 130, 1.0}};
  }
  return {{"csf", 2570, 330, 1.0},  {"blood", 1200, 250, 1.0}, {"white_matter", 500, 70, 0.77},
          {"gray_matter", 830, 83, 0.86}, {"muscle", 970, 50, 1.0}, {"fat", 350, 70, 1.0}};
}

int Protocol::N() const {
  return static_cast<int>(kind == ProtocolKind::bssfp ? phase_cycles.size() : TE_list.size());
}

std::vector<std::string> Protocol::validate() const {
  std::vector<std::string> warnings;
  if (!(TR > 0.0)) throw ValidationError("protocol: TR must be positive");
  if (N() < 1) throw ValidationError("protocol: no acquisitions");
  if (kind == ProtocolKind::bssfp) {
    if (std::abs(TE - TR / 2.0) > 1e-9) throw ValidationError("protocol: bSSFP requires TE = TR/2");
    if (!(flip_deg > 0.0 && flip_deg < 180.0)) throw ValidationError("protocol: flip angle must lie in (0, 180)");
  } else {
    double max_te = 0.0;
    for (double te : TE_list) {
      if (!(te >= 0.0)) throw ValidationError("protocol: TE must be non-negative");
      max_te = std::max(max_te, te);
    }
    if (TR < 5.0 * max_te) warnings.push_back("spin echo: TR < 5 x max TE; the TR >> TE model is approximate");
  }
  return warnings;
}

Protocol Protocol::bssfp(int N, double flip_deg, double TR) {
  if (N < 1) throw ValidationError("bssfp protocol: N must be >= 1");
  Protocol p;
  p.kind = ProtocolKind::bssfp;
  p.name = "bssfp";
  p.flip_deg = flip_deg;
  p.TR = TR;
  p.TE = TR / 2.0;
  for (int n = 0; n < N; ++n) p.phase_cycles.push_back(2.0 * kPi * n / N);
  return p;
}

Protocol Protocol::t1_se() {
  Protocol p;
  p.kind = ProtocolKind::spin_echo;
  p.name = "t1_se";
  p.flip_deg = 90.0;
  p.TR = 575.0;
  p.TE_list = {14.0};
  return p;
}

Protocol Protocol::t2_se() {
  Protocol p;
  p.kind = ProtocolKind::spin_echo;
  p.name = "t2_se";
  p.flip_deg = 90.0;
  p.TR = 2800.0;
  p.TE_list = {60.0, 100.0, 140.0};
  return p;
}

Protocol Protocol::preset(const std::string& name, int N) {
  if (name == "bssfp") return bssfp(N);
  if (name == "t1_se") return t1_se();
  if (name == "t2_se") return t2_se();
  throw ValidationError("unknown protocol preset '" + name + "'");
}

cd bssfp_signal(const TissueParams& t, double flip_deg, double TR, double phi, double dphi) {
  const double a = deg2rad(flip_deg);
  const double E1 = std::exp(-TR / t.T1);
  const double E2 = std::exp(-TR / t.T2);
  const double den = 1.0 - E1 * std::cos(a) - E2 * E2 * (E1 - std::cos(a));
  const double M = t.PD * (1.0 - E1) * std::sin(a) / den * std::exp(-(TR / 2.0) / t.T2);
  const double A = E2;
  const double B = E2 * (1.0 - E1) * (1.0 + std::cos(a)) / den;
  const double theta = phi + dphi;
  const double q = 1.0 - B * std::cos(theta);
  if (std::abs(q) < 1e-12) throw NumericalError("bssfp_signal: singular denominator");
  return M * std::polar(1.0, theta / 2.0) * (1.0 - A * std::polar(1.0, -theta)) / q;
}

cd se_signal(const TissueParams& t, double TR, double TE) {
  if (!(TR > 0.0) || !(TE >= 0.0)) throw ValidationError("se_signal: times must be positive");
  return cd(0.0, t.PD * (1.0 - std::exp(-TR / t.T1)) * std::exp(-TE / t.T2));
}

std::vector<ComplexImage> render_acquisitions(const PhantomSpec& spec, const Protocol& proto) {
  spec.validate();
  proto.validate();
  const int N = proto.N();
  std::vector<ComplexImage> out(static_cast<std::size_t>(N), ComplexImage(spec.grid, cd{}));
  const double tr_s = proto.TR / 1000.0;
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t n) {
    ComplexImage& img = out[n];
    for (std::size_t i = 0; i < img.size(); ++i) {
      const auto l = spec.labels[i];
      if (l == 0) continue;
      const TissueParams& t = spec.tissues[l - 1u];
      if (proto.kind == ProtocolKind::bssfp) {
        const double phi = 2.0 * kPi * spec.b0_map[i] * tr_s;
        img[i] = bssfp_signal(t, proto.flip_deg, proto.TR, phi, proto.phase_cycles[n]);
      } else {
        img[i] = se_signal(t, proto.TR, proto.TE_list[n]);
      }
    }
  });
  return out;
}

KSpaceData forward_kspace(const ComplexImage& img, int acquisition_index) {
  return KSpaceData{img.grid(), fft2_centered_copy(img), acquisition_index, {}};
}

ComplexImage inverse_kspace(const KSpaceData& k) { return ifft2_centered_copy(k.samples); }

KSpaceData add_noise(const KSpaceData& k, double variance, std::uint64_t seed) {
  if (!(variance >= 0.0)) throw ValidationError("add_noise: variance must be non-negative");
  KSpaceData out = k;
  if (variance == 0.0) return out;
  const double sd = std::sqrt(variance / 2.0);
  const std::uint64_t stream = rng::derive(seed, {static_cast<std::uint64_t>(k.acquisition_index)});
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    double a = 0.0, b = 0.0;
    rng::normal_pair(stream, i, a, b);
    out.samples[i] += cd(sd * a, sd * b);
  }
  return out;
}

PhantomSpec make_analytic_phantom(const GridSpec& grid, TissuePreset preset) {
  if (grid.ny < 32 || grid.nz < 32) throw ValidationError("analytic phantom: grid must be at least 32x32");
  PhantomSpec s;
  s.grid = grid;
  s.tissues = tissue_table(preset);
  s.labels = LabelMap(grid, 0);
  s.b0_map = RealImage(grid, 0.0);
  for (int y = 0; y < grid.ny; ++y) {
    for (int z = 0; z < grid.nz; ++z) {
      const double u = 2.0 * (y - grid.ny / 2) / grid.ny;
      const double v = 2.0 * (z - grid.nz / 2) / grid.nz;
      for (const auto& e : head_shapes()) {
        if (e.contains(u, v)) s.labels(y, z) = e.label;
      }
      s.b0_map(y, z) = b0_poly(u, v);
    }
  }
  std::vector<double> obj;
  for (std::size_t i = 0; i < s.labels.size(); ++i) {
    if (s.labels[i]) obj.push_back(s.b0_map[i]);
  }
  const double n = static_cast<double>(obj.size());
  const double mean = pairwise_sum(obj) / n;
  for (double& v : obj) v = (v - mean) * (v - mean);
  const double sd = std::sqrt(pairwise_sum(obj) / n);
  for (double& b : s.b0_map) b = (b - mean) * kB0StdHz / sd;
  return s;
}

void save_label_volume(const PhantomSpec& spec, const std::filesystem::path& path) {
  spec.validate();
  std::string raw(spec.labels.size(), '\0');
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = static_cast<char>(spec.labels[i]);
  nlohmann::json h;
  h["dims"] = {spec.grid.ny, spec.grid.nz};
  nlohmann::json map = nlohmann::json::object();
  for (std::size_t t = 0; t < spec.tissues.size(); ++t) map[std::to_string(t + 1)] = spec.tissues[t].name;
  h["labels"] = map;
  io::write_atomic(path, raw);
  io::write_atomic(path.string() + ".json", h.dump(2) + "\n");
}

PhantomSpec load_label_volume(const std::filesystem::path& path, const std::vector<TissueParams>& table) {
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(io::read_file(path.string() + ".json"));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("label header: ") + e.what());
  }
  if (!h.contains("dims") || !h["dims"].is_array() || h["dims"].size() != 2) {
    throw ValidationError("label header: dims must be [ny, nz]");
  }
  GridSpec g{h["dims"][0].get<int>(), h["dims"][1].get<int>()};
  g.validate();
  const std::string raw = io::read_file(path);
  if (raw.size() != g.total()) {
    throw ValidationError("label volume: file holds " + std::to_string(raw.size()) + " bytes, header dims imply " +
                          std::to_string(g.total()));
  }

  std::map<int, std::string> names;
  if (h.contains("labels")) {
    for (const auto& [k, v] : h["labels"].items()) names[std::stoi(k)] = v.get<std::string>();
  }
  PhantomSpec s;
  s.grid = g;
  s.labels = LabelMap(g, 0);
  s.b0_map = RealImage(g, 0.0);
  std::map<int, std::uint8_t> remap;
  for (const auto& [label, name] : names) {
    if (label <= 0 || label > 255) throw ValidationError("label header: label values must lie in 1..255");
    auto it = std::find_if(table.begin(), table.end(), [&](const TissueParams& t) { return t.name == name; });
    if (it == table.end()) throw ValidationError("label header: unknown tissue '" + name + "'");
    s.tissues.push_back(*it);
    remap[label] = static_cast<std::uint8_t>(s.tissues.size());
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const int l = static_cast<unsigned char>(raw[i]);
    if (l == 0) continue;
    auto it = remap.find(l);
    if (it == remap.end()) throw ValidationError("label volume: unknown label " + std::to_string(l));
    s.labels[i] = it->second;
  }
  return s;
}

} // namespace segsamp
