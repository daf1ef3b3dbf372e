#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "fdd/field.hpp"
#include "fdd/optics.hpp"

namespace fdd {

enum class ModeKind { cos, sin };

const char* to_string(ModeKind m);

struct FisherEntry {
  WaveVector k;
  ModeKind mode = ModeKind::cos;
  /// Per-photon Fisher information for the a_k (cos) or b_k (sin) parameter.
  double value = 0.0;
};

/// Diagonal Fisher information over a list of {a_k, b_k} parameters, ordered
/// as (k_0 cos, k_0 sin, k_1 cos, ...).
struct FisherDiagonal {
  double a0 = 0.0;
  std::vector<FisherEntry> entries;
  /// Requested wavevectors that lay beyond the cutoff (their values are 0).
  std::size_t beyond_cutoff = 0;
};

/// Wavevectors m * dk_x along +k_x for m = 1 .. while m * dk_x <= max_k.
std::vector<WaveVector> axis_wavevectors(const GridSpec& grid, double max_k);

/// beta_DI(k) / (2 a0^2).
FisherDiagonal qfi_analytic(const Otf& otf_di, double a0, std::span<const WaveVector> ks);
/// beta_DI(k)^2 / (2 a0^2 beta_DI(0)).
FisherDiagonal fi_di_analytic(const Otf& otf_di, double a0, std::span<const WaveVector> ks);
/// beta_l(k)^2 / (2 a0^2 beta_l(0)); throws for an empty region.
FisherDiagonal fi_pupil_analytic(const Otf& otf_l, double a0, std::span<const WaveVector> ks);
/// Entrywise sum over the pupils.
FisherDiagonal fi_fdd_raw(std::span<const FisherDiagonal> per_pupil);
/// alpha * raw + (1 - alpha) * di.
FisherDiagonal fi_hybrid(const FisherDiagonal& raw, const FisherDiagonal& di, double alpha);
/// Entrywise 1 / (N * FI); infinite where FI = 0.
std::vector<double> crb(const FisherDiagonal& fi, double photons);

/// Complete analytic Fisher table for one (partition, alpha) configuration.
struct FisherTable {
  FisherDiagonal qfi;
  FisherDiagonal di;
  FisherDiagonal raw;
  FisherDiagonal hybrid;
  double alpha = 0.0;
};

FisherTable fisher_table(const Otf& full, const std::array<Otf, 5>& regions, double a0,
                         double alpha, std::span<const WaveVector> ks);

/// Columns kx, ky, mode, QFI, FI_DI, FI_FDD_raw, FI_hybrid, QCRB, CRB_DI,
/// CRB_FDD_raw, CRB_hybrid, CRB_ratio_DI_over_hybrid. CRBs are per `photons`.
void write_fisher_csv(const std::filesystem::path& path, const FisherTable& table,
                      double photons);

}  // namespace fdd
