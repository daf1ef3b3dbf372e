#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "fdd/field.hpp"
#include "fdd/optics.hpp"
#include "fdd/simulate.hpp"

namespace fdd {

struct ReconstructionConfig {
  int iterations = 3;
  /// Lower bound for the regularizer epsilon(k) (dimensionless, like S(k)).
  double epsilon_floor = 1e-12;
  /// Zero the fused spectrum beyond the cutoff.
  bool band_limit = true;

  void validate() const;
};

/// Per-frame Wiener weights C_l(k) and the epsilon(k) they were built with.
/// Frames with beta^H_l(0) = 0 carry all-zero weights.
struct WienerWeights {
  std::array<std::vector<double>, 6> c;
  std::vector<double> epsilon;
};

/// S(k) = sum_l beta^H_l(k)^2 / beta^H_l(0) over frames with beta^H_l(0) > 0.
std::vector<double> total_transfer(const OtfSet& otfs);

/// C_l = (beta^H_l / beta^H_l(0)) / (S + epsilon). Throws where S + epsilon
/// vanishes.
WienerWeights fdd_weights(const OtfSet& otfs, std::span<const double> epsilon);

struct ReconstructionResult {
  SpectralField spectrum;
  RealField image;
  /// epsilon(k) used at each iteration.
  std::vector<std::vector<double>> epsilon_history;
  /// Bins where epsilon was non-finite or below the floor and was floored.
  std::size_t floored_bins = 0;
  /// Measured photon total used as N.
  double photons = 0.0;
  double imag_residual = 0.0;
};

ReconstructionResult reconstruct_fdd(const RawImageSet& raw, const OtfSet& otfs,
                                     const ReconstructionConfig& cfg);
ReconstructionResult reconstruct_di_dcv(const RealField& di_frame, const Otf& otf_di,
                                        const ReconstructionConfig& cfg);

struct ParameterEstimate {
  WaveVector k;
  double a = 0.0;
  double b = 0.0;
};

/// a = (a0/N) [g(k) + g(-k)], b = (a0/N) i [g(k) - g(-k)]. N defaults to the
/// result's photon total. Throws for off-lattice k.
std::vector<ParameterEstimate> estimate_fourier_params(const ReconstructionResult& result,
                                                       double a0, std::span<const WaveVector> ks,
                                                       double photons = 0.0);

/// Per-photon CRB of a_k (or b_k) for the hybrid set, 2 a0^2 / S(k).
double crb_hybrid(const OtfSet& otfs, double a0, WaveVector k);

enum class NoiseMethod { theory, out_of_band };

const char* to_string(NoiseMethod m);

struct SnrReport {
  WaveVector k;
  NoiseMethod method = NoiseMethod::theory;
  /// Per frame 10 log10(|g_l(k)|^2 / noise_l); -inf for empty frames.
  std::array<double, 6> frame_db{};
  /// 10 log10 of the summed power ratios.
  double combined_db = 0.0;
};

/// Frames are photon densities; noise is N_l (theory) or the mean |g_l|^2 over
/// 1.05 k_c < |k| < min(1.5 k_c, Nyquist) (out of band).
SnrReport snr_at_k(std::span<const RealField> frames, std::span<const double> totals, WaveVector k,
                   double cutoff, NoiseMethod method);
SnrReport snr_at_k(const RawImageSet& raw, WaveVector k, double cutoff, NoiseMethod method);

/// Expected SNR gain of the hybrid set over direct imaging at k,
/// 10 log10(S(k) beta_DI(0) / beta_DI(k)^2).
double theoretical_snr_gain_db(const OtfSet& otfs, WaveVector k);

}  // namespace fdd
