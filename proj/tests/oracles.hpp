#pragma once

// Independent reference computations used by the tests. None of these call
// into the transform or OTF code under test.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using cd = std::complex<double>;
constexpr double pi = std::numbers::pi;

/// Direct sum F(k) = sum f(r) exp(-i k.r) dx^2 at signed bin (mx, my).
inline cd direct_bin(const std::vector<double>& f, int nx, int ny, double dx, int mx, int my) {
  cd acc = 0.0;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const double ph = -2.0 * pi * (static_cast<double>(mx) * ix / nx + static_cast<double>(my) * iy / ny);
      acc += f[static_cast<std::size_t>(iy) * nx + ix] * cd(std::cos(ph), std::sin(ph));
    }
  }
  return acc * dx * dx;
}

/// Radial autocorrelation of a centred disk, the incoherent OTF.
inline double chat(double rho) {
  rho = std::abs(rho);
  if (rho >= 1.0) return 0.0;
  return 2.0 / pi * (std::acos(rho) - rho * std::sqrt(1.0 - rho * rho));
}

/// Counts lattice points p with |p| <= r and |p + lag| <= r, by enumeration.
inline long disk_overlap(double r, int lx, int ly) {
  const int b = static_cast<int>(std::ceil(r)) + 1;
  long c = 0;
  for (int y = -b; y <= b; ++y) {
    for (int x = -b; x <= b; ++x) {
      if (std::hypot(x, y) <= r * (1 + 1e-12) && std::hypot(x + lx, y + ly) <= r * (1 + 1e-12)) ++c;
    }
  }
  return c;
}

inline std::vector<double> random_field(std::size_t n, std::uint64_t seed, double lo = 0.0,
                                        double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace oracle
