#include "fdd/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fdd/error.hpp"
#include "fdd/fft.hpp"

namespace fdd {

using std::numbers::pi;

OpticsSpec::OpticsSpec(double wavelength_nm, double numerical_aperture)
    : wavelength_(wavelength_nm), na_(numerical_aperture) {
  if (!(wavelength_nm > 0.0) || !std::isfinite(wavelength_nm)) {
    throw InvalidArgument("wavelength must be positive");
  }
  if (!(numerical_aperture > 0.0) || numerical_aperture > 1.6) {
    throw InvalidArgument("numerical aperture must lie in (0, 1.6]");
  }
}

double OpticsSpec::cutoff() const { return 4.0 * pi * na_ / wavelength_; }
double OpticsSpec::rayleigh_radius() const { return 0.61 * wavelength_ / na_; }
double OpticsSpec::airy_disk_area() const { return pi * rayleigh_radius() * rayleigh_radius(); }

GridSpec default_grid(const OpticsSpec& optics, int n, double fraction) {
  return GridSpec(n, n, fraction * pi / optics.cutoff());
}

PupilMask::PupilMask(GridSpec grid, std::vector<std::uint8_t> support, std::size_t norm_count,
                     double cutoff)
    : grid_(grid), support_(std::move(support)), norm_count_(norm_count), cutoff_(cutoff) {
  if (support_.size() != grid_.size()) throw InvalidArgument("mask size does not match grid");
  count_ = static_cast<std::size_t>(std::count_if(support_.begin(), support_.end(),
                                                  [](std::uint8_t v) { return v != 0; }));
  if (norm_count_ == 0) throw InvalidArgument("mask normalization count must be positive");
}

PupilMask make_circular_pupil(const OpticsSpec& optics, const GridSpec& grid) {
  const double kc = optics.cutoff();
  if (kc >= grid.nyquist()) {
    std::ostringstream msg;
    msg << "grid too coarse: cutoff " << kc << " rad/nm needs Nyquist above it, grid has "
        << grid.nyquist() << " (reduce dx below " << pi / kc << " nm)";
    throw InvalidArgument(msg.str());
  }
  const double radius = kc / 2.0 * (1.0 + 1e-12);
  std::vector<std::uint8_t> support(grid.size(), 0);
  std::size_t count = 0;
  for (int iy = 0; iy < grid.ny(); ++iy) {
    for (int ix = 0; ix < grid.nx(); ++ix) {
      if (grid.k_at(ix, iy).norm() <= radius) {
        support[grid.index(ix, iy)] = 1;
        ++count;
      }
    }
  }
  return PupilMask(grid, std::move(support), count, kc);
}

int partition_region(WaveVector k, double cutoff, double inner_radius_ratio) {
  const double r = k.norm();
  const double slack = 1.0 + 1e-12;
  if (r > cutoff / 2.0 * slack) return 0;
  if (r <= inner_radius_ratio * cutoff / 2.0 * slack) return 1;
  // Opposite sectors share a region so each region's OTF reaches the cutoff.
  double theta = std::atan2(k.y, k.x) + pi / 8.0;
  theta = std::fmod(theta, pi);
  if (theta < 0.0) theta += pi;
  const int sector = std::min(3, static_cast<int>(theta / (pi / 4.0)));
  return 2 + sector;
}

PupilPartition partition_fdd(const PupilMask& pupil, double inner_radius_ratio,
                             const GridSpec& canvas, double footprint) {
  if (!(inner_radius_ratio > 0.0 && inner_radius_ratio < 1.0)) {
    throw InvalidArgument("inner radius ratio k_a/k_c must lie in (0, 1)");
  }
  if (!(footprint >= 0.0)) throw InvalidArgument("object footprint must be nonnegative");
  const GridSpec& g = pupil.grid();
  std::array<std::vector<std::uint8_t>, 5> supports;
  for (auto& s : supports) s.assign(g.size(), 0);
  for (int iy = 0; iy < g.ny(); ++iy) {
    for (int ix = 0; ix < g.nx(); ++ix) {
      if (!pupil.contains(ix, iy)) continue;
      const int region = partition_region(g.k_at(ix, iy), pupil.cutoff(), inner_radius_ratio);
      if (region == 0) throw NumericalError("pupil pixel outside the partition disk");
      supports[region - 1][g.index(ix, iy)] = 1;
    }
  }

  // Cross layout: images separated by the object footprint plus two Airy radii.
  const double airy = 2.44 * pi / pupil.cutoff();
  const int foot_px = static_cast<int>(std::ceil(footprint / canvas.dx()));
  const int step = static_cast<int>(std::ceil((footprint + 2.0 * airy) / canvas.dx()));
  const int needed = foot_px + 2 * step;
  if (needed > canvas.nx() || needed > canvas.ny()) {
    std::ostringstream msg;
    msg << "canvas " << canvas.nx() << "x" << canvas.ny()
        << " is too small for five disjoint displaced images; minimum canvas is " << needed
        << "x" << needed << " pixels";
    throw InvalidArgument(msg.str());
  }
  const std::array<PixelOffset, 5> offsets = {
      PixelOffset{0, 0}, PixelOffset{step, 0}, PixelOffset{0, step}, PixelOffset{-step, 0},
      PixelOffset{0, -step}};

  PupilPartition out;
  out.inner_radius_ratio = inner_radius_ratio;
  out.parent = pupil;
  for (int l = 0; l < 5; ++l) {
    out.regions[l] = {PupilMask(g, std::move(supports[l]), pupil.norm_count(), pupil.cutoff()),
                      offsets[l]};
  }
  return out;
}

Otf::Otf(GridSpec grid, std::vector<double> values, double cutoff)
    : grid_(grid), values_(std::move(values)), cutoff_(cutoff) {
  if (values_.size() != grid_.size()) throw InvalidArgument("OTF size does not match grid");
}

Otf Otf::zero(GridSpec grid, double cutoff) {
  return Otf(grid, std::vector<double>(grid.size(), 0.0), cutoff);
}

double Otf::value_at(WaveVector k) const {
  if (k.norm() >= cutoff_) return 0.0;
  const double fx = k.x / grid_.dkx();
  const double fy = k.y / grid_.dky();
  const double x0 = std::floor(fx);
  const double y0 = std::floor(fy);
  const double tx = fx - x0;
  const double ty = fy - y0;
  const int mx = static_cast<int>(x0);
  const int my = static_cast<int>(y0);
  auto v = [&](int dx, int dy) { return at({mx + dx, my + dy}); };
  if (tx == 0.0 && ty == 0.0) return v(0, 0);
  return (1 - tx) * (1 - ty) * v(0, 0) + tx * (1 - ty) * v(1, 0) + (1 - tx) * ty * v(0, 1) +
         tx * ty * v(1, 1);
}

std::vector<double> Otf::axis_profile() const {
  std::vector<double> out(grid_.nx() / 2);
  for (int m = 0; m < grid_.nx() / 2; ++m) out[m] = values_[grid_.index(m, 0)];
  return out;
}

Otf Otf::scaled(double factor) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= factor;
  return Otf(grid_, std::move(v), cutoff_);
}

Otf compute_otf(const PupilMask& mask) {
  if (mask.pixel_count() == 0) throw InvalidArgument("cannot compute the OTF of an empty mask");
  const GridSpec& g = mask.grid();
  std::vector<Complex> h(g.size());
  for (int iy = 0; iy < g.ny(); ++iy) {
    for (int ix = 0; ix < g.nx(); ++ix) {
      if (!mask.contains(ix, iy)) continue;
      if (std::abs(g.signed_x(ix)) >= g.nx() / 4 || std::abs(g.signed_y(iy)) >= g.ny() / 4) {
        throw InvalidArgument("mask extends past a quarter of the lattice; autocorrelation would wrap");
      }
      h[g.index(ix, iy)] = 1.0;
    }
  }
  auto H = dft2(h, g.nx(), g.ny(), Direction::forward);
  for (auto& v : H) v = std::norm(v);
  auto corr = dft2(H, g.nx(), g.ny(), Direction::backward);
  const double n = static_cast<double>(g.size());
  const double norm = static_cast<double>(mask.norm_count());
  std::vector<double> values(g.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::round(corr[i].real() / n) / norm;
  }
  return Otf(g, std::move(values), mask.cutoff());
}

RealField compute_apsf(const PupilMask& mask) {
  if (mask.pixel_count() == 0) throw InvalidArgument("cannot compute the PSF of an empty mask");
  const GridSpec& g = mask.grid();
  std::vector<Complex> h(g.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = mask.support()[i] ? 1.0 : 0.0;
  auto psi = dft2(h, g.nx(), g.ny(), Direction::backward);
  double energy = 0.0;
  for (const auto& v : psi) energy += v.real() * v.real();
  const double scale = (psi[0].real() >= 0.0 ? 1.0 : -1.0) / std::sqrt(energy * g.cell_area());
  std::vector<double> values(g.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = psi[i].real() * scale;
  return RealField(g, std::move(values));
}

RealField compute_psf(const PupilMask& mask) {
  RealField apsf = compute_apsf(mask);
  std::vector<double> values(apsf.values().begin(), apsf.values().end());
  double sum = 0.0;
  for (double& v : values) {
    v *= v;
    sum += v;
  }
  const double scale = 1.0 / (sum * apsf.grid().cell_area());
  for (double& v : values) v *= scale;
  return RealField(apsf.grid(), std::move(values));
}

double first_radial_zero(const RealField& apsf) {
  const GridSpec& g = apsf.grid();
  for (int ix = 0; ix + 1 < g.nx() / 2; ++ix) {
    const double a = apsf(ix, 0);
    const double b = apsf(ix + 1, 0);
    if (a > 0.0 && b <= 0.0) return (ix + a / (a - b)) * g.dx();
  }
  throw NumericalError("amplitude PSF has no zero crossing along +x");
}

std::array<Otf, 5> region_otfs(const PupilPartition& partition) {
  std::array<Otf, 5> out;
  for (int l = 0; l < 5; ++l) {
    const PupilMask& m = partition.regions[l].mask;
    out[l] = m.pixel_count() > 0 ? compute_otf(m) : Otf::zero(m.grid(), m.cutoff());
  }
  return out;
}

OtfSet hybrid_otfs(const std::array<Otf, 5>& regions, const Otf& full, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  for (const auto& r : regions) {
    if (!(r.grid() == full.grid())) throw InvalidArgument("region OTF grid mismatch");
  }
  OtfSet out;
  out.alpha = alpha;
  out.di = full;
  out.hybrid[0] = full.scaled(1.0 - alpha);
  for (int l = 0; l < 5; ++l) out.hybrid[l + 1] = regions[l].scaled(alpha);
  return out;
}

OtfSet hybrid_otfs(const PupilPartition& partition, const Otf& full, double alpha) {
  return hybrid_otfs(region_otfs(partition), full, alpha);
}

double circular_otf(double rho) {
  rho = std::abs(rho);
  if (rho >= 1.0) return 0.0;
  return 2.0 / pi * (std::acos(rho) - rho * std::sqrt(1.0 - rho * rho));
}

}  // namespace fdd
