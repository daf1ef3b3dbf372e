#include "fdd/sample.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "fdd/error.hpp"
#include "fdd/fft.hpp"

namespace fdd {

bool in_half_plane(WaveVector k, double tol) {
  return k.x > tol || (std::abs(k.x) <= tol && k.y > tol);
}

SampleSpectrum::SampleSpectrum(double a0, std::vector<FourierMode> modes)
    : a0_(a0), modes_(std::move(modes)) {
  if (!(a0 > 0.0) || !std::isfinite(a0)) throw InvalidArgument("sample a0 must be positive");
  double kmax = 0.0;
  for (const auto& m : modes_) {
    if (!std::isfinite(m.a) || !std::isfinite(m.b) || !std::isfinite(m.k.x) ||
        !std::isfinite(m.k.y)) {
      throw InvalidArgument("sample mode has non-finite fields");
    }
    kmax = std::max(kmax, m.k.norm());
  }
  const double tol = 1e-12 * std::max(kmax, 1e-300);
  for (const auto& m : modes_) {
    if (!in_half_plane(m.k, tol)) {
      std::ostringstream msg;
      msg << "mode k = (" << m.k.x << ", " << m.k.y << ") is not in the half plane";
      throw InvalidArgument(msg.str());
    }
  }
  std::vector<std::size_t> order(modes_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    const auto& a = modes_[i].k;
    const auto& b = modes_[j].k;
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto& a = modes_[order[i - 1]].k;
    const auto& b = modes_[order[i]].k;
    if (std::abs(a.x - b.x) <= tol && std::abs(a.y - b.y) <= tol) {
      throw InvalidArgument("duplicate mode wavevector in sample spectrum");
    }
  }
}

double SampleSpectrum::max_frequency() const {
  double kmax = 0.0;
  for (const auto& m : modes_) kmax = std::max(kmax, m.k.norm());
  return kmax;
}

const FourierMode* SampleSpectrum::find(WaveVector k) const {
  const double tol = 1e-9 * std::max(k.norm(), max_frequency());
  for (const auto& m : modes_) {
    if (std::abs(m.k.x - k.x) <= tol && std::abs(m.k.y - k.y) <= tol) return &m;
  }
  return nullptr;
}

SampleSpectrum SampleSpectrum::scaled(double factor) const {
  std::vector<FourierMode> modes(modes_.begin(), modes_.end());
  for (auto& m : modes) {
    m.a *= factor;
    m.b *= factor;
  }
  return SampleSpectrum(a0_ * factor, std::move(modes));
}

SynthesizedSample synthesize_sample(const SampleSpectrum& spec, const GridSpec& grid) {
  const double area = grid.area();
  if (std::abs(spec.a0() * area - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "sample is not normalized on this grid: a0 * area = " << spec.a0() * area;
    throw InvalidArgument(msg.str());
  }
  std::vector<Complex> F(grid.size());
  F[0] = spec.a0() * area;
  for (const auto& m : spec.modes()) {
    const LatticeIndex idx = grid.lattice_of(m.k);
    if (grid.is_nyquist(idx)) {
      throw InvalidArgument("sample mode on the Nyquist row/column cannot be represented");
    }
    const Complex half = Complex(m.a, -m.b) * (area / 2.0);
    F[grid.spectral_index(idx)] += half;
    F[grid.spectral_index({-idx.mx, -idx.my})] += std::conj(half);
  }
  RealField field = fft_inverse(SpectralField(grid, std::move(F)));
  SynthesizedSample out{std::move(field), 0};
  const double floor = -1e-12 * spec.a0();
  for (double v : out.field.values()) {
    if (v < floor) ++out.negative_pixels;
  }
  return out;
}

SampleSpectrum analyze_sample(const RealField& field, double max_k) {
  return analyze_spectrum(fft_forward(field), max_k);
}

SampleSpectrum analyze_spectrum(const SpectralField& spectrum, double max_k) {
  const GridSpec& g = spectrum.grid();
  if (const double defect = spectrum.hermitian_defect(); defect > 1e-10) {
    std::ostringstream msg;
    msg << "spectrum is not Hermitian (defect " << defect << "); it is not a real field";
    throw InvalidArgument(msg.str());
  }
  const double total = spectrum[0].real();
  if (std::abs(total - 1.0) > 1e-6) {
    std::ostringstream msg;
    msg << "field is not normalized to unit integral (integral = " << total << ")";
    throw InvalidArgument(msg.str());
  }
  const double area = g.area();
  std::vector<FourierMode> modes;
  for (int iy = 0; iy < g.ny(); ++iy) {
    for (int ix = 0; ix < g.nx(); ++ix) {
      const LatticeIndex m{g.signed_x(ix), g.signed_y(iy)};
      if (!(m.mx > 0 || (m.mx == 0 && m.my > 0)) || g.is_nyquist(m)) continue;
      const WaveVector k = g.k_of(m);
      if (k.norm() > max_k) continue;
      const Complex F = spectrum(ix, iy);
      modes.push_back({k, 2.0 * F.real() / area, -2.0 * F.imag() / area});
    }
  }
  return SampleSpectrum(total / area, std::move(modes));
}

double lines_per_mm_to_k(double lines_per_mm) {
  return 2.0 * std::numbers::pi * lines_per_mm * 1e-6;
}

double k_to_lines_per_mm(double k) { return k / (2.0 * std::numbers::pi) * 1e6; }

namespace {

// Length of [lo, hi) covered by the union of bars [start + j*pitch, start + j*pitch + width).
double bar_coverage(double lo, double hi, double start, double pitch, double width, int count) {
  double covered = 0.0;
  for (int j = 0; j < count; ++j) {
    const double a = start + j * pitch;
    covered += std::max(0.0, std::min(hi, a + width) - std::max(lo, a));
  }
  return covered;
}

}  // namespace

RealField make_test_chart(const ChartSpec& chart, const GridSpec& grid) {
  if (chart.n_lines < 0) throw InvalidArgument("chart line count must be nonnegative");
  if (chart.background < 0.0) throw InvalidArgument("chart background must be nonnegative");
  if (chart.n_lines == 0 && chart.background == 0.0) {
    throw InvalidArgument("an empty chart with zero background cannot be normalized");
  }
  if (chart.n_lines > 0) {
    if (!(chart.lines_per_mm > 0.0)) throw InvalidArgument("chart frequency must be positive");
    if (lines_per_mm_to_k(chart.lines_per_mm) >= grid.nyquist()) {
      std::ostringstream msg;
      msg << chart.lines_per_mm << " lines/mm is at or above the grid Nyquist frequency ("
          << k_to_lines_per_mm(grid.nyquist()) << " lines/mm)";
      throw InvalidArgument(msg.str());
    }
  }
  const double dx = grid.dx();
  const double pitch = chart.n_lines > 0 ? 1e6 / chart.lines_per_mm : 0.0;
  const double width = pitch / 2.0;
  const double span = chart.n_lines > 0 ? (chart.n_lines - 1) * pitch + width : 0.0;
  const double length = chart.line_length_pitches * pitch;

  const bool vertical = chart.orientation == Orientation::vertical;
  const double c_across = (vertical ? grid.nx() : grid.ny()) / 2 * dx;
  const double c_along = (vertical ? grid.ny() : grid.nx()) / 2 * dx;
  const double start = c_across - span / 2.0;
  const double along_lo = c_along - length / 2.0;

  std::vector<double> across_cov(vertical ? grid.nx() : grid.ny());
  for (std::size_t i = 0; i < across_cov.size(); ++i) {
    const double x = static_cast<double>(i) * dx;
    across_cov[i] =
        bar_coverage(x - dx / 2, x + dx / 2, start, pitch, width, chart.n_lines) / dx;
  }
  std::vector<double> along_cov(vertical ? grid.ny() : grid.nx());
  for (std::size_t i = 0; i < along_cov.size(); ++i) {
    const double y = static_cast<double>(i) * dx;
    along_cov[i] = chart.n_lines > 0
                       ? bar_coverage(y - dx / 2, y + dx / 2, along_lo, length, length, 1) / dx
                       : 0.0;
  }

  std::vector<double> values(grid.size());
  for (int iy = 0; iy < grid.ny(); ++iy) {
    for (int ix = 0; ix < grid.nx(); ++ix) {
      const double cover = vertical ? across_cov[ix] * along_cov[iy]
                                    : across_cov[iy] * along_cov[ix];
      values[grid.index(ix, iy)] = chart.background + cover;
    }
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  const double scale = 1.0 / (sum * grid.cell_area());
  for (double& v : values) v *= scale;
  return RealField(grid, std::move(values));
}

}  // namespace fdd
