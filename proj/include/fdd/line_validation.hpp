#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>

#include "fdd/fisher_numeric.hpp"

namespace fdd {

/// 1D comparison of the numerical QFI/FI matrices against the analytic
/// diagonal formulas for a random multi-mode sample.
struct LineValidationConfig {
  int n = 512;
  int bin_step = 4;
  int n_modes = 48;
  /// Cutoff k_c in spectral bins of the line.
  double cutoff_bins = 196.0;
  /// Physical pixel pitch; only scales the reported wavevectors.
  double dx = 1.0;
  std::uint64_t seed = 1;
  double min_over_max = 0.1;
  double alpha = 0.6;
  double inner_radius_ratio = 0.7;
  /// Tolerance bands checked by passed().
  double offdiag_tolerance = 0.05;
  double crb_tolerance = 0.15;
  double crb_band = 0.9;
  double psd_tolerance = -1e-6;
};

struct MatrixComparison {
  FisherMatrix numeric;
  Eigen::VectorXd analytic;
  /// sqrt(sum off-diagonal^2 / sum diagonal^2).
  double offdiag_ratio = 0.0;
  /// RMS of the off-diagonal normalized correlations M_ij / sqrt(M_ii M_jj).
  double rms_correlation = 0.0;
  /// max |M_aa / M_bb - 1| over modes in the CRB band.
  double cos_sin_deviation = 0.0;
  /// Numeric CRB (diagonal of the inverse) over analytic 1/FI, per parameter.
  Eigen::VectorXd crb_ratio;
  double crb_max_deviation = 0.0;
};

struct LineValidationReport {
  LineValidationConfig config;
  Line1D line;
  Sample1D sample;
  Eigen::Index support_size = 0;
  double trace = 0.0;
  double min_density_eigenvalue = 0.0;
  MatrixComparison qfi;
  MatrixComparison fi_di;
  MatrixComparison fi_hybrid;
  double min_eig_qfi_minus_di = 0.0;
  double min_eig_qfi_minus_hybrid = 0.0;
  /// Mode bins inside the CRB band whose deviation exceeded the tolerance.
  std::vector<int> failing_bins;

  bool offdiag_ok() const;
  bool crb_ok() const;
  bool psd_ok() const;
  bool passed() const { return offdiag_ok() && crb_ok() && psd_ok(); }
};

LineValidationReport run_line_validation(const LineValidationConfig& config);

/// Per-parameter CSV: label, k, analytic and numeric CRBs for QFI, DI, hybrid.
void write_line_validation_csv(const std::filesystem::path& path,
                               const LineValidationReport& report);

}  // namespace fdd
