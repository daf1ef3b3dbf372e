#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fdd/field.hpp"

namespace fdd {

/// Wavelength (nm) and numerical aperture of an incoherent imaging system.
class OpticsSpec {
 public:
  OpticsSpec(double wavelength_nm, double numerical_aperture);

  double wavelength() const { return wavelength_; }
  double numerical_aperture() const { return na_; }
  /// Incoherent cutoff k_c = 4 pi NA / lambda (rad/nm).
  double cutoff() const;
  /// Rayleigh radius 0.61 lambda / NA (nm).
  double rayleigh_radius() const;
  double airy_disk_area() const;

 private:
  double wavelength_;
  double na_;
};

/// Square grid whose pixel pitch puts the cutoff at k_c * dx = fraction * pi.
GridSpec default_grid(const OpticsSpec& optics, int n = 256, double fraction = 0.8);

/// Binary pupil support on the spectral lattice of a grid.
///
/// `norm_count` is the pixel count of the full circular pupil the mask was
/// cut from; OTFs are normalized by it so the full pupil has beta(0) = 1 and a
/// sub-region has beta_l(0) equal to its pixel area fraction.
class PupilMask {
 public:
  PupilMask() = default;
  PupilMask(GridSpec grid, std::vector<std::uint8_t> support, std::size_t norm_count,
            double cutoff);

  const GridSpec& grid() const { return grid_; }
  std::span<const std::uint8_t> support() const { return support_; }
  bool contains(int ix, int iy) const { return support_[grid_.index(ix, iy)] != 0; }
  std::size_t pixel_count() const { return count_; }
  std::size_t norm_count() const { return norm_count_; }
  /// Cutoff k_c of the parent full pupil (twice the pupil radius).
  double cutoff() const { return cutoff_; }

 private:
  GridSpec grid_;
  std::vector<std::uint8_t> support_;
  std::size_t count_ = 0;
  std::size_t norm_count_ = 0;
  double cutoff_ = 0.0;
};

/// Disk of radius k_c/2. Rejects grids whose Nyquist frequency does not exceed
/// k_c, since the OTF support would alias.
PupilMask make_circular_pupil(const OpticsSpec& optics, const GridSpec& grid);

/// Image displacement of one partition region, in canvas pixels.
struct PixelOffset {
  int x = 0;
  int y = 0;
};

struct PupilRegion {
  PupilMask mask;
  PixelOffset displacement;
};

/// Five-region pupil division: region 1 is the central disk of radius k_a/2;
/// regions 2-5 split the annulus into four pairs of opposite 45-degree
/// sectors centred on 0, 45, 90 and 135 degrees.
struct PupilPartition {
  double inner_radius_ratio = 0.0;
  PupilMask parent;
  std::array<PupilRegion, 5> regions;
};

/// Region index 1..5 of the spectral bin at k, or 0 outside the pupil.
int partition_region(WaveVector k, double cutoff, double inner_radius_ratio);

/// Builds the partition and assigns cross-layout displacements
/// (centre, +x, +y, -x, -y) separated by footprint + 2 Rayleigh radii.
/// `footprint` is the object's extent in nm. Throws with the minimum canvas
/// size when the five displaced images do not fit on `canvas`.
PupilPartition partition_fdd(const PupilMask& pupil, double inner_radius_ratio,
                             const GridSpec& canvas, double footprint);

/// Optical transfer function sampled on a spectral lattice.
class Otf {
 public:
  Otf() = default;
  Otf(GridSpec grid, std::vector<double> values, double cutoff);
  static Otf zero(GridSpec grid, double cutoff);

  const GridSpec& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator()(int ix, int iy) const { return values_[grid_.index(ix, iy)]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double at(LatticeIndex m) const { return values_[grid_.spectral_index(m)]; }
  double dc() const { return values_.empty() ? 0.0 : values_[0]; }
  double cutoff() const { return cutoff_; }

  /// Bilinear interpolation between lattice bins; exact on the lattice and 0
  /// at or beyond the cutoff.
  double value_at(WaveVector k) const;
  /// Values along +k_x for bins 0 .. nx/2 - 1.
  std::vector<double> axis_profile() const;
  Otf scaled(double factor) const;

 private:
  GridSpec grid_;
  std::vector<double> values_;
  double cutoff_ = 0.0;
};

/// Normalized autocorrelation of the mask indicator, computed as an integer
/// correlation (transform pair, rounded to exact pixel counts). Throws on an
/// empty mask.
Otf compute_otf(const PupilMask& mask);

/// Real amplitude PSF of a centro-symmetric mask, normalized so that
/// sum psi^2 dx^2 = 1, with psi(0) > 0.
RealField compute_apsf(const PupilMask& mask);

/// Intensity PSF |psi|^2 normalized to unit integral.
RealField compute_psf(const PupilMask& mask);

/// First sign change of the amplitude PSF along +x (nm), linearly interpolated.
double first_radial_zero(const RealField& apsf);

/// OTFs of the five regions; empty regions yield an all-zero OTF.
std::array<Otf, 5> region_otfs(const PupilPartition& partition);

/// Hybrid OTF set: hybrid[0] = (1 - alpha) beta_DI, hybrid[l] = alpha beta_l.
struct OtfSet {
  double alpha = 0.0;
  Otf di;
  std::array<Otf, 6> hybrid;

  double cutoff() const { return di.cutoff(); }
};

OtfSet hybrid_otfs(const std::array<Otf, 5>& regions, const Otf& full, double alpha);
OtfSet hybrid_otfs(const PupilPartition& partition, const Otf& full, double alpha);

/// Radial chat function (2/pi)(acos rho - rho sqrt(1 - rho^2)), rho = |k|/k_c.
double circular_otf(double rho);

}  // namespace fdd
