#include "fdd/field.hpp"

#include <algorithm>
#include <sstream>
#include <string>
#include <type_traits>

#include "fdd/error.hpp"

namespace fdd {

GridSpec::GridSpec(int nx, int ny, double dx) : nx_(nx), ny_(ny), dx_(dx) {
  if (nx < 16 || ny < 16 || nx % 2 != 0 || ny % 2 != 0) {
    std::ostringstream msg;
    msg << "grid dimensions must be even and >= 16, got " << nx << "x" << ny;
    throw InvalidArgument(msg.str());
  }
  if (!(dx > 0.0) || !std::isfinite(dx)) {
    throw InvalidArgument("grid pixel pitch must be positive and finite");
  }
}

LatticeIndex GridSpec::lattice_of(WaveVector k, double rel_tol) const {
  const double fx = k.x / dkx();
  const double fy = k.y / dky();
  const double rx = std::round(fx);
  const double ry = std::round(fy);
  if (std::abs(fx - rx) > rel_tol * std::max(1.0, std::abs(fx)) ||
      std::abs(fy - ry) > rel_tol * std::max(1.0, std::abs(fy))) {
    std::ostringstream msg;
    msg << "wavevector (" << k.x << ", " << k.y << ") is not on the grid lattice (dk = "
        << dkx() << ", " << dky() << ")";
    throw InvalidArgument(msg.str());
  }
  if (std::abs(rx) > nx_ / 2 || std::abs(ry) > ny_ / 2) {
    throw InvalidArgument("wavevector lies outside the grid's spectral extent");
  }
  return {static_cast<int>(rx), static_cast<int>(ry)};
}

bool GridSpec::is_nyquist(LatticeIndex m) const {
  return std::abs(m.mx) == nx_ / 2 || std::abs(m.my) == ny_ / 2;
}

namespace {

template <typename T>
void require_finite(std::span<const T> values, const char* what) {
  for (const auto& v : values) {
    bool finite;
    if constexpr (std::is_same_v<T, Complex>) {
      finite = std::isfinite(v.real()) && std::isfinite(v.imag());
    } else {
      finite = std::isfinite(v);
    }
    if (!finite) throw InvalidArgument(std::string(what) + " contains non-finite values");
  }
}

}  // namespace

RealField::RealField(GridSpec grid) : grid_(grid), values_(grid.size(), 0.0) {}

RealField::RealField(GridSpec grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw InvalidArgument("field size does not match grid");
  require_finite<double>(values_, "real field");
}

double RealField::integral() const {
  double sum = 0.0;
  for (double v : values_) sum += v;
  return sum * grid_.cell_area();
}

double RealField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double RealField::max() const { return *std::max_element(values_.begin(), values_.end()); }

SpectralField::SpectralField(GridSpec grid) : grid_(grid), values_(grid.size()) {}

SpectralField::SpectralField(GridSpec grid, std::vector<Complex> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw InvalidArgument("spectrum size does not match grid");
  require_finite<Complex>(values_, "spectral field");
}

double SpectralField::hermitian_defect() const {
  double peak = 0.0;
  for (const auto& v : values_) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return 0.0;
  double worst = 0.0;
  for (int iy = 0; iy < grid_.ny(); ++iy) {
    const int jy = grid_.storage_y(-grid_.signed_y(iy));
    for (int ix = 0; ix < grid_.nx(); ++ix) {
      const int jx = grid_.storage_x(-grid_.signed_x(ix));
      const Complex d = values_[grid_.index(jx, jy)] - std::conj(values_[grid_.index(ix, iy)]);
      worst = std::max(worst, std::abs(d));
    }
  }
  return worst / peak;
}

}  // namespace fdd
