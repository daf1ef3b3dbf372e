#pragma once

#include <array>
#include <cstdint>
#include <filesystem>

#include "fdd/field.hpp"
#include "fdd/optics.hpp"
#include "fdd/sample.hpp"

namespace fdd {

struct AcquisitionConfig {
  /// Total expected photon count over all six frames.
  double photons = 1e6;
  double alpha = 0.6;
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  /// Gaussian read-noise standard deviation in counts per pixel (0 = off).
  double read_noise = 0.0;

  void validate() const;
};

/// Six frames in photons per unit area: index 0 is the direct-imaging frame,
/// 1-5 the partition regions.
struct RawImageSet {
  AcquisitionConfig config;
  std::array<RealField, 6> frames;
  /// Recorded photon totals sum(counts) per frame.
  std::array<double, 6> totals{};
  /// Expected totals N beta^H_l(0).
  std::array<double, 6> expected{};
  /// Pixels whose mean was negative and clipped to 0 before sampling.
  std::size_t clipped_pixels = 0;

  const GridSpec& grid() const { return frames[0].grid(); }
  double total() const;
};

struct MeanImage {
  RealField field;
  std::size_t negative_pixels = 0;
  double imag_residual = 0.0;
};

/// Inverse transform of N beta(k) f(k) for a sample given as a Fourier series
/// on the OTF grid.
MeanImage mean_image(const SampleSpectrum& sample, const Otf& otf, double photons);
/// Same for a sample given as a unit-integral field.
MeanImage mean_image(const RealField& sample, const Otf& otf, double photons);

struct PoissonFrame {
  RealField counts;
  double total = 0.0;
  std::size_t clipped_pixels = 0;
};

/// Independent Poisson counts with mean <g> dx^2 per pixel (negative means
/// clipped to 0), plus optional Gaussian read noise in counts; returned as
/// counts per unit area.
PoissonFrame poissonize(const RealField& mean, std::uint64_t seed, double read_noise = 0.0);

/// splitmix64 mix of (seed, frame, trial).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t frame, std::uint64_t trial);

/// Six noisy frames of the sample through the hybrid OTF set.
RawImageSet acquire(const RealField& sample, const OtfSet& otfs, const AcquisitionConfig& config);
RawImageSet acquire(const SampleSpectrum& sample, const OtfSet& otfs,
                    const AcquisitionConfig& config);

/// Photons per Airy-disk area for a density of `photons_per_pixel` at pitch dx.
double photons_per_airy_disk(double photons_per_pixel, double dx, const OpticsSpec& optics);

/// Writes frame_<l>.f32/.json for the six frames and raw.json with the config
/// and recorded totals.
void write_raw_image_set(const std::filesystem::path& dir, const RawImageSet& raw);
RawImageSet read_raw_image_set(const std::filesystem::path& dir);

}  // namespace fdd
