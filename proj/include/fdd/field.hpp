#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace fdd {

using Complex = std::complex<double>;

/// Wavevector in rad/length.
struct WaveVector {
  double x = 0.0;
  double y = 0.0;

  double norm() const { return std::hypot(x, y); }
  WaveVector operator-() const { return {-x, -y}; }
  friend bool operator==(const WaveVector&, const WaveVector&) = default;
};

/// Signed integer coordinates of a bin on the spectral lattice.
struct LatticeIndex {
  int mx = 0;
  int my = 0;
  friend bool operator==(const LatticeIndex&, const LatticeIndex&) = default;
};

/// Periodic sampling grid shared by real-space and Fourier-space fields.
///
/// Real-space sample (ix, iy) sits at r = (ix*dx, iy*dx). Spectral bins are
/// stored in FFT order: storage column ix holds signed frequency index
/// ix for ix < nx/2 and ix - nx otherwise, so k = m * dk with m in
/// [-n/2, n/2).
class GridSpec {
 public:
  GridSpec() = default;
  GridSpec(int nx, int ny, double dx);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double dx() const { return dx_; }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_; }

  double dkx() const { return 2.0 * std::numbers::pi / (nx_ * dx_); }
  double dky() const { return 2.0 * std::numbers::pi / (ny_ * dx_); }
  double area() const { return nx_ * dx_ * ny_ * dx_; }
  double cell_area() const { return dx_ * dx_; }
  double nyquist() const { return std::numbers::pi / dx_; }

  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * nx_ + ix;
  }

  int signed_x(int ix) const { return ix < nx_ / 2 ? ix : ix - nx_; }
  int signed_y(int iy) const { return iy < ny_ / 2 ? iy : iy - ny_; }
  int storage_x(int mx) const { return ((mx % nx_) + nx_) % nx_; }
  int storage_y(int my) const { return ((my % ny_) + ny_) % ny_; }
  std::size_t spectral_index(LatticeIndex m) const {
    return index(storage_x(m.mx), storage_y(m.my));
  }

  /// Wavevector of the bin stored at (ix, iy).
  WaveVector k_at(int ix, int iy) const {
    return {signed_x(ix) * dkx(), signed_y(iy) * dky()};
  }
  WaveVector k_of(LatticeIndex m) const { return {m.mx * dkx(), m.my * dky()}; }

  /// Lattice bin for k; throws InvalidArgument if k is off-lattice.
  LatticeIndex lattice_of(WaveVector k, double rel_tol = 1e-6) const;
  /// True when the lattice bin lies on the Nyquist row or column.
  bool is_nyquist(LatticeIndex m) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  int nx_ = 0;
  int ny_ = 0;
  double dx_ = 0.0;
};

/// Real-valued sampled field (intensity, photon density, PSF, ...).
class RealField {
 public:
  RealField() = default;
  explicit RealField(GridSpec grid);
  RealField(GridSpec grid, std::vector<double> values);

  const GridSpec& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator()(int ix, int iy) const { return values_[grid_.index(ix, iy)]; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Riemann-sum integral, sum(values) * dx^2.
  double integral() const;
  double min() const;
  double max() const;

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

/// Complex spectrum on the lattice of a GridSpec (FFT storage order).
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(GridSpec grid);
  SpectralField(GridSpec grid, std::vector<Complex> values);

  const GridSpec& grid() const { return grid_; }
  std::span<const Complex> values() const { return values_; }
  Complex operator()(int ix, int iy) const { return values_[grid_.index(ix, iy)]; }
  Complex operator[](std::size_t i) const { return values_[i]; }
  Complex at(LatticeIndex m) const { return values_[grid_.spectral_index(m)]; }

  /// Largest |F(-k) - conj F(k)| relative to max |F|.
  double hermitian_defect() const;

 private:
  GridSpec grid_;
  std::vector<Complex> values_;
};

}  // namespace fdd
