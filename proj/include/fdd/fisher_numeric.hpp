#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fdd {

/// Periodic 1D sampling line of n points at pitch dx.
struct Line1D {
  int n = 512;
  double dx = 1.0;

  double dk() const;
  double length() const { return n * dx; }
};

/// 1D Fourier-series sample f(x) = a0 + sum a_i cos(k_i x) + b_i sin(k_i x),
/// with k_i = bins[i] * dk.
struct Sample1D {
  double a0 = 0.0;
  std::vector<int> bins;
  std::vector<double> a;
  std::vector<double> b;
};

Eigen::VectorXd synthesize_1d(const Sample1D& sample, const Line1D& line);

/// Gaussian-random coefficients at the given bins with a0 chosen so that
/// min f = min_over_max * max f, then scaled to unit integral.
Sample1D random_sample_1d(const Line1D& line, std::vector<int> bins, std::uint64_t seed,
                          double min_over_max = 0.1);

/// Indicator of lo <= |m| <= hi over the signed spectral bins m of the line.
Eigen::VectorXd band_indicator_1d(const Line1D& line, double lo_bins, double hi_bins);

/// Real amplitude PSF of a centro-symmetric 1D pupil indicator, scaled so that
/// sum psi^2 = count / full_count (1 for the full pupil).
Eigen::VectorXd apsf_1d(const Eigen::VectorXd& indicator, double full_count);

/// Indicator autocorrelation divided by full_count, in FFT bin order.
Eigen::VectorXd otf_1d(const Eigen::VectorXd& indicator, double full_count);

/// Single-photon density operator rho = sum_j w_j psi_j psi_j^T in the
/// position basis, psi_j the APSF shifted to x_j and w_j = f(x_j) dx / trace.
struct DensityOperator1D {
  Line1D line;
  /// Columns are the shifted APSFs psi_j.
  Eigen::MatrixXd shifted;
  Eigen::VectorXd weights;
  Eigen::MatrixXd matrix;
  /// Eigenpairs over the support xi > 1e-12 max xi, ascending.
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  /// Trace before renormalization.
  double raw_trace = 0.0;
  double min_eigenvalue = 0.0;
};

DensityOperator1D build_density_operator_1d(std::span<const double> f, const Line1D& line,
                                            const Eigen::VectorXd& apsf);

struct FisherMatrix {
  std::vector<std::string> labels;
  Eigen::MatrixXd values;

  double symmetry_defect() const;
  double min_eigenvalue() const;
  /// Diagonal of the inverse matrix.
  Eigen::VectorXd crb_diagonal() const;
};

/// Derivative weights c_j dx for each parameter (columns a_1..a_L, b_1..b_L):
/// d rho / d theta = sum_j c_j dx psi_j psi_j^T.
Eigen::MatrixXd mode_derivative_weights_1d(const Sample1D& sample, const Line1D& line);
std::vector<std::string> mode_labels_1d(const Sample1D& sample);

/// Eigenbasis QFI of rho for derivatives of the form above. Within the support
/// the three-term formula is used; pairs with |xi_l - xi_m| < 1e-6 max xi use
/// the symmetrized 2 / (xi_l + xi_m) term.
FisherMatrix qfi_numeric_1d(const DensityOperator1D& rho, const Eigen::MatrixXd& weights,
                            std::vector<std::string> labels = {});

/// Same formula for explicit dense operators. Rejects non-symmetric input.
Eigen::MatrixXd qfi_from_operators(const Eigen::MatrixXd& rho,
                                   const std::vector<Eigen::MatrixXd>& derivatives);

/// One detection channel: expected counts per pixel and their derivatives
/// (one column per parameter).
struct DetectionChannel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd derivatives;
};

/// sum over channels and pixels of d_i d_j / max(mean, 1e-12 peak), divided by
/// the total photon count (per-photon FI).
FisherMatrix fi_numeric(const std::vector<DetectionChannel>& channels, double photons,
                        std::vector<std::string> labels = {});

/// Expected per-photon image and derivative images of a sample through the
/// intensity PSF |psi|^2, scaled by `fraction` of the photons.
DetectionChannel detection_channel_1d(const Eigen::VectorXd& apsf, std::span<const double> f,
                                      const Eigen::MatrixXd& weights, const Line1D& line,
                                      double fraction);

}  // namespace fdd
