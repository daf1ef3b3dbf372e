#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "fdd/field.hpp"

namespace fdd {

/// One cos/sin pair of the sample's Fourier series, a cos(k.r) + b sin(k.r).
struct FourierMode {
  WaveVector k;
  double a = 0.0;
  double b = 0.0;
};

/// True for the non-redundant half plane: k.x > 0, or k.x == 0 and k.y > 0.
bool in_half_plane(WaveVector k, double tol = 1e-12);

/// Fourier-series description of a sample intensity,
/// f(r) = a0 + sum_k a_k cos(k.r) + b_k sin(k.r).
///
/// Modes live on the half plane and are unique. Normalization to unit
/// integral (a0 = 1/area) is checked against a grid by synthesize_sample.
class SampleSpectrum {
 public:
  SampleSpectrum(double a0, std::vector<FourierMode> modes);

  double a0() const { return a0_; }
  std::span<const FourierMode> modes() const { return modes_; }
  double max_frequency() const;

  /// Mode at k, or nullptr.
  const FourierMode* find(WaveVector k) const;
  /// Multiplies a0 and every coefficient by `factor`.
  SampleSpectrum scaled(double factor) const;

 private:
  double a0_;
  std::vector<FourierMode> modes_;
};

struct SynthesizedSample {
  RealField field;
  /// Pixels below -1e-12 a0; estimation still proceeds but callers may report it.
  std::size_t negative_pixels = 0;
};

/// Evaluates the Fourier series on `grid`. Every mode must sit on the grid
/// lattice away from the Nyquist row/column, and a0 * area must equal 1
/// within 1e-9.
SynthesizedSample synthesize_sample(const SampleSpectrum& spec, const GridSpec& grid);

/// Fourier coefficients of a unit-integral field on the half-plane lattice
/// with |k| <= max_k (Nyquist bins excluded).
SampleSpectrum analyze_sample(const RealField& field,
                              double max_k = std::numeric_limits<double>::infinity());

/// As analyze_sample, starting from a spectrum. Rejects spectra that are not
/// Hermitian within 1e-10 or not normalized within 1e-6.
SampleSpectrum analyze_spectrum(const SpectralField& spectrum,
                                double max_k = std::numeric_limits<double>::infinity());

enum class Orientation {
  vertical,   ///< lines parallel to y, intensity varies along x
  horizontal  ///< lines parallel to x
};

/// Parallel-line resolution target (a "quintuplet" for n_lines = 5).
struct ChartSpec {
  double lines_per_mm = 4500.0;
  int n_lines = 5;
  Orientation orientation = Orientation::vertical;
  /// Dark-background level relative to the line intensity.
  double background = 0.1;
  /// Line length in units of the line pitch.
  double line_length_pitches = 5.0;
};

/// Angular spatial frequency (rad/nm) of a line pattern given in lines/mm.
double lines_per_mm_to_k(double lines_per_mm);
/// Inverse of lines_per_mm_to_k.
double k_to_lines_per_mm(double k);

/// Renders the chart centred on the grid (pixel pitch in nm) with 50% duty
/// bars, using exact pixel-area coverage, normalized to unit integral.
/// Throws if the line frequency is at or above the grid Nyquist frequency.
RealField make_test_chart(const ChartSpec& chart, const GridSpec& grid);

}  // namespace fdd
