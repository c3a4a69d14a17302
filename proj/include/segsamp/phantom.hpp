#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "segsamp/array2.hpp"

namespace segsamp {

struct TissueParams {
  std::string name;
  double T1 = 0.0; // ms
  double T2 = 0.0; // ms
  double PD = 1.0;

  void validate() const;
};

using LabelMap = Array2<std::uint8_t>;

// Label 0 is background; label l > 0 refers to tissues[l - 1].
struct PhantomSpec {
  GridSpec grid;
  LabelMap labels;
  std::vector<TissueParams> tissues;
  RealImage b0_map; // Hz

  void validate() const;
};

enum class TissuePreset { t1_set, bssfp_set };

TissuePreset parse_tissue_preset(const std::string& name);
std::string to_string(TissuePreset p);

// CSF, blood, white matter, gray matter, muscle, fat (labels 1..6).
std::vector<TissueParams> tissue_table(TissuePreset preset);

enum class ProtocolKind { bssfp, spin_echo };

struct Protocol {
  ProtocolKind kind = ProtocolKind::bssfp;
  std::string name;
  double flip_deg = 45.0;
  double TR = 5.0;                   // ms
  double TE = 2.5;                   // ms, bSSFP
  std::vector<double> TE_list;       // ms, spin echo
  std::vector<double> phase_cycles;  // rad, bSSFP

  int N() const;
  // Throws ValidationError on inconsistent fields; returns advisory warnings.
  std::vector<std::string> validate() const;

  // alpha 45 deg, TR/TE 5/2.5 ms, phase cycles 2 pi n / N.
  static Protocol bssfp(int N, double flip_deg = 45.0, double TR = 5.0);
  // Single T1-weighted spin echo, TR/TE 575/14 ms.
  static Protocol t1_se();
  // T2-weighted multi-echo spin echo, TR 2800 ms, TE 60/100/140 ms.
  static Protocol t2_se();
  static Protocol preset(const std::string& name, int N);
};

struct KSpaceData {
  GridSpec grid;
  ComplexImage samples;
  int acquisition_index = 0;
  Mask mask; // empty when fully sampled
};

// Steady-state bSSFP signal at TE = TR/2 for total per-TR phase theta = phi + dphi:
// M e^{i theta/2} (1 - A e^{-i theta}) / (1 - B cos theta).
cd bssfp_signal(const TissueParams& t, double flip_deg, double TR, double phi, double dphi);

// i PD (1 - e^{-TR/T1}) e^{-TE/T2}.
cd se_signal(const TissueParams& t, double TR, double TE);

// One image per acquisition; phi = 2 pi b0 TR with TR in seconds.
std::vector<ComplexImage> render_acquisitions(const PhantomSpec& spec, const Protocol& proto);

KSpaceData forward_kspace(const ComplexImage& img, int acquisition_index = 0);
ComplexImage inverse_kspace(const KSpaceData& k);

// Adds circular complex Gaussian noise with total variance `variance`.
KSpaceData add_noise(const KSpaceData& k, double variance, std::uint64_t seed);

// Layered-ellipse head phantom with a smooth off-resonance map of mean 0 and
// standard deviation 62 Hz over the object.
PhantomSpec make_analytic_phantom(const GridSpec& grid, TissuePreset preset);

// Raw 8-bit labels (row-major) plus a JSON header `<path>.json` holding dims
// and the label to tissue-name map. The off-resonance map is not stored.
void save_label_volume(const PhantomSpec& spec, const std::filesystem::path& path);
PhantomSpec load_label_volume(const std::filesystem::path& path, const std::vector<TissueParams>& tissue_table);

} // namespace segsamp
